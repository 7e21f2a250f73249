// Copyright 2026 The textasv Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Serial reference vs OpenMP kernels. The Exec argument is the benchmark's
// second range value: 0 serial, 1 parallel.

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "textasv/asv.hpp"
#include "textasv/attrib.hpp"
#include "textasv/checkpoint.hpp"
#include "textasv/random.hpp"
#include "textasv/tokenizer.hpp"
#include "textasv/trainer.hpp"

namespace {

using namespace textasv;

Exec ExecOf(const benchmark::State& state) { return state.range(1) == 0 ? Exec::kSerial : Exec::kParallel; }

std::vector<int32_t> RandomIds(Rng& rng, size_t vocab, size_t words) {
  std::vector<int32_t> ids{kClsId};
  for (size_t i = 0; i < words; ++i) ids.push_back(static_cast<int32_t>(rng.Between(kNumReserved, vocab - 1)));
  ids.push_back(kSepId);
  return ids;
}

Checkpoint Model(size_t vocab, size_t classes) {
  Checkpoint m;
  m.config.vocab_size = vocab;
  m.encoder = InitEncoderParams(m.config, 1);
  m.classifier = ClassifierWeights::Init(classes, m.config.penult_dim, 2);
  for (size_t c = 0; c < classes; ++c) m.classes.push_back("spk" + std::to_string(c));
  return m;
}

void BM_BatchGradient(benchmark::State& state) {
  const Checkpoint model = Model(2000, 20);
  Rng rng(3);
  std::vector<LabeledSequence> batch(static_cast<size_t>(state.range(0)));
  for (auto& item : batch) item = {RandomIds(rng, 2000, 20), static_cast<size_t>(rng.Index(20))};
  for (auto _ : state) {
    benchmark::DoNotOptimize(ComputeBatchGradient(model, batch, AAMConfig{}, 7, ExecOf(state)));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BatchGradient)->ArgsProduct({{32, 256}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_TrialsAndEer(benchmark::State& state) {
  const auto speakers = static_cast<size_t>(state.range(0));
  Rng rng(4);
  std::vector<EmbeddingRecord> enroll, trials;
  for (size_t s = 0; s < speakers; ++s) {
    const std::string id = "spk" + std::to_string(s);
    const Sex sex = s % 2 ? Sex::kMale : Sex::kFemale;
    for (size_t u = 0; u < 20; ++u) {
      Vector v(192);
      for (auto& x : v) x = rng.Normal();
      (u < 10 ? enroll : trials).push_back({id + "-" + std::to_string(u), id, sex, std::move(v)});
    }
  }
  const auto models = EnrollAll(enroll, true);
  for (auto _ : state) {
    const auto scores = MakeTrials(models, trials, true, ExecOf(state));
    benchmark::DoNotOptimize(ComputeSpeakerEers(scores, ExecOf(state)));
  }
}
BENCHMARK(BM_TrialsAndEer)->ArgsProduct({{20, 200}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_IntegratedGradients(benchmark::State& state) {
  const Checkpoint model = Model(2000, 2);
  Rng rng(5);
  const auto ids = RandomIds(rng, 2000, 30);
  Vector enrollment(model.config.penult_dim);
  for (auto& x : enrollment) x = rng.Normal();
  AttributionConfig cfg;
  cfg.steps = static_cast<size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(IntegratedGradients(model.encoder, model.config, ids, enrollment, 0.3, cfg, ExecOf(state)));
  }
}
BENCHMARK(BM_IntegratedGradients)->ArgsProduct({{50, 300}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
