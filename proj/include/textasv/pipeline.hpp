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

#ifndef TEXTASV_PIPELINE_HPP_
#define TEXTASV_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "textasv/asv.hpp"
#include "textasv/attrib.hpp"
#include "textasv/checkpoint.hpp"
#include "textasv/corpus.hpp"
#include "textasv/encoder.hpp"
#include "textasv/parallel.hpp"
#include "textasv/synthetic.hpp"
#include "textasv/tokenizer.hpp"
#include "textasv/trainer.hpp"

namespace textasv {

// Eval-mode embeddings for every utterance, in corpus order.
std::vector<EmbeddingRecord> EmbedCorpus(const Checkpoint& model, const Vocab& vocab, const Corpus& corpus,
                                         Exec exec = Exec::kParallel);

struct HoldoutSplit {
  Corpus train;   // attacker training material
  Corpus enroll;  // per-speaker enrollment utterances
  Corpus trial;   // per-speaker trial utterances
};

// Per speaker, the last ceil(eval_fraction * n) utterances (at least 2, at
// most n - 1; none for speakers with fewer than 3) are held out; the first
// ceil(enroll_fraction * held_out) of those enroll, the rest are trials.
HoldoutSplit SplitHoldout(const Corpus& corpus, double eval_fraction, double enroll_fraction);

// Training settings sized for the 20-speaker synthetic corpus: the standalone
// TrainConfig defaults take only a handful of tiny steps on 600 utterances.
inline TrainConfig DeskScaleTrainConfig() {
  TrainConfig c;
  c.epochs = 30;
  c.batch_size = 32;
  c.base_lr = 0.01;
  return c;
}

// The `pipeline` experiment configuration. Every field may be omitted from
// the JSON document.
struct PipelineConfig {
  std::optional<std::string> corpus_path;  // synthetic corpus when absent
  CorpusFormat corpus_format = CorpusFormat::kNdjson;
  SyntheticCorpusSpec synthetic;
  bool run_control = true;  // synthetic only

  double eval_fraction = 0.5;
  double enroll_fraction = 0.5;
  double validation_fraction = 0.1;
  uint64_t split_seed = 0;
  size_t vocab_max_size = 5000;

  EncoderConfig encoder;
  TrainConfig train = DeskScaleTrainConfig();

  bool normalize_enrollment = true;
  bool same_sex_only = true;

  AttributionConfig attribution;
  size_t attribution_speakers = 3;
  size_t attribution_utterances = 5;
  uint64_t attribution_seed = 0;

  double bin_width = 0.05;
};

PipelineConfig ParsePipelineConfig(std::string_view json_text);
std::string PipelineConfigJson(const PipelineConfig& config);

struct ExperimentResult {
  std::string name;
  TrainLog log;
  size_t selected_epoch = 0;  // 1-based
  EvalRun eval;
  std::vector<AttributionReport> attributions;
};

struct PipelineResult {
  ExperimentResult main;
  std::optional<ExperimentResult> control;
};

// split -> vocab -> train -> embed -> enroll -> trial -> eval -> attribute,
// writing every artifact under out_dir (the control corpus, when run, under
// out_dir/control).
PipelineResult RunPipeline(const PipelineConfig& config, const std::filesystem::path& out_dir,
                           Exec exec = Exec::kParallel);

// Random subset used for attribution: `speakers` enrolled speakers, then up to
// `per_speaker` of each one's trial utterances.
std::vector<Utterance> SampleAttributionUtterances(const Corpus& trial, std::span<const SpeakerEER> eers,
                                                   size_t speakers, size_t per_speaker, uint64_t seed);

}  // namespace textasv

#endif  // TEXTASV_PIPELINE_HPP_
