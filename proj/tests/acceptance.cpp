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


// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "checks.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "textasv/asv.hpp"
#include "textasv/cli.hpp"
#include "textasv/io.hpp"
#include "textasv/pipeline.hpp"

using namespace textasv;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

std::string Fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

Outcome EerOracle() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(2026);
  double worst = 0.0;
  for (int set = 0; set < 1000; ++set) {
    const auto total = static_cast<size_t>(rng.Between(2, 200));
    const auto num_pos = static_cast<size_t>(rng.Between(1, static_cast<int64_t>(total) - 1));
    // A third of the sets use coarse scores so ties are common.
    const bool coarse = set % 3 == 0;
    std::vector<double> pos, neg;
    std::vector<TrialScore> trials;
    for (size_t i = 0; i < total; ++i) {
      double s = 2.0 * rng.Uniform() - 1.0;
      if (coarse) s = std::round(s * 10.0) / 10.0;
      const bool is_pos = i < num_pos;
      (is_pos ? pos : neg).push_back(s);
      trials.push_back({"spk", "u" + std::to_string(i), is_pos ? "spk" : "other", s,
                        is_pos ? TrialLabel::kPositive : TrialLabel::kNegative});
    }
    const SpeakerEER got = ComputeSpeakerEer(trials);
    const oracle::EerResult want = oracle::BruteForceEer(pos, neg);
    worst = std::max(worst, std::abs(got.eer_percent - want.eer_percent));
  }
  const double secs = Seconds(start);
  return {worst <= 1e-9 && secs < 10.0,
          "1000 score sets, max |EER - oracle| = " + Fmt("%.3g", worst) + ", " + Fmt("%.2f", secs) + " s"};
}

Outcome Clipping() {
  bool ok = ClipEer(62.0) == 50.0;
  double prev = -1.0;
  for (int i = 0; i <= 10000; ++i) {
    const double x = i / 100.0;
    const double c = ClipEer(x);
    ok = ok && ClipEer(c) == c && c >= prev && c <= 50.0 && (x > 50.0 || c == x);
    prev = c;
  }
  return {ok, "clip(62) = " + Fmt("%g", ClipEer(62.0)) + "; idempotent and monotone over [0, 100]"};
}

Outcome AamGradient() {
  Rng rng(31);
  double worst = 0.0, softmax_gap = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto classes = static_cast<size_t>(rng.Between(2, 10));
    const auto dim = static_cast<size_t>(rng.Between(2, 16));
    const AAMConfig cfg{0.5 * rng.Uniform(), 1.0 + 63.0 * rng.Uniform()};
    worst = std::max(worst, checks::AamGradCheck(classes, dim, cfg, MixSeed(31, i)).Worst());

    const Vector e = checks::RandomVector(rng, dim);
    const ClassifierWeights w{checks::RandomMatrix(rng, classes, dim)};
    const size_t y = static_cast<size_t>(rng.Index(classes));
    const AamLossGrad got = AamLossAndGrad(e, w, y, AAMConfig{0.0, cfg.scale});
    const oracle::SoftmaxHead want = oracle::NormalizedSoftmax(e, w.weight, y, cfg.scale);
    // Two formulas for the same quantity: relative agreement, absolute below 1.
    softmax_gap = std::max(softmax_gap, oracle::RelativeError(got.loss, want.loss, 1.0));
    for (size_t d = 0; d < dim; ++d) {
      softmax_gap = std::max(softmax_gap, oracle::RelativeError(got.grad_embedding[d], want.grad_embedding[d], 1.0));
    }
    for (size_t k = 0; k < w.weight.size(); ++k) {
      softmax_gap =
          std::max(softmax_gap, oracle::RelativeError(got.grad_weights.data()[k], want.grad_weights.data()[k], 1.0));
    }
  }
  return {worst < 1e-4 && softmax_gap < 1e-12,
          "100 instances, max FD rel. error " + Fmt("%.3g", worst) + "; margin 0 vs softmax " + Fmt("%.3g", softmax_gap)};
}

Outcome EncoderGradient() {
  Rng rng(47);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    EncoderConfig config = checks::SmallEncoderConfig(rng);
    if (i % 4 == 3) config.activation = Activation::kIdentity;
    worst = std::max(worst, checks::EncoderGradCheck(config, MixSeed(47, i), i % 2 == 1).Worst());
  }
  return {worst < 1e-4, "20 configurations, max FD rel. error over all tensors " + Fmt("%.3g", worst)};
}

Outcome IgCompleteness() {
  double worst_ratio = 0.0, oracle_gap = 0.0;
  for (uint64_t seed = 0; seed < 50; ++seed) {
    const auto c = checks::IgCompleteness(checks::RandomIgInstance(MixSeed(5, seed), Activation::kTanh), 50);
    worst_ratio = std::max(worst_ratio, c.residual / c.tolerance);
    oracle_gap = std::max(oracle_gap,
                          checks::IgLinearOracleGap(checks::RandomIgInstance(MixSeed(6, seed), Activation::kIdentity), 50));
  }
  return {worst_ratio <= 1.0 && oracle_gap <= 1e-9,
          "50 trials, worst residual " + Fmt("%.3g", worst_ratio) + " of the 1% budget; linear oracle gap " +
              Fmt("%.3g", oracle_gap)};
}

struct PipelineRun {
  PipelineResult result;
  double seconds = 0.0;
};

PipelineRun RunDefaultPipeline(const fs::path& out) {
  const auto start = std::chrono::steady_clock::now();
  const PipelineConfig config = ParsePipelineConfig(ReadFile(fs::path(TEXTASV_SOURCE_DIR) / "configs/synthetic.json"));
  PipelineRun run{RunPipeline(config, out), 0.0};
  run.seconds = Seconds(start);
  return run;
}

Outcome Directional(const PipelineRun& run) {
  if (!run.result.control) return {false, "control experiment missing"};
  const auto& topical = run.result.main.eval.summary.mean_clipped_eer;
  const auto& control = run.result.control->eval.summary.mean_clipped_eer;
  bool ok = run.seconds < 300.0 && topical.size() == 2 && control.size() == 2;
  std::string detail;
  for (Sex sex : {Sex::kFemale, Sex::kMale}) {
    const double t = topical.count(sex) ? topical.at(sex) : NAN;
    const double c = control.count(sex) ? control.at(sex) : NAN;
    ok = ok && t <= 20.0 && c >= 40.0;
    detail += std::string(SexLabel(sex)) + ": topical " + Fmt("%.2f", t) + "%, control " + Fmt("%.2f", c) + "%; ";
  }
  return {ok, detail + Fmt("%.1f", run.seconds) + " s"};
}

Outcome NormalizationAblation(const fs::path& base) {
  const std::string enroll = (base / "run1/enroll_embeddings.ndjson").string();
  const std::string trial = (base / "run1/trial_embeddings.ndjson").string();
  std::ostringstream out, err;
  bool ok = true;
  for (const char* mode : {"on", "off"}) {
    ok = ok && CliMain({"eval", "--enroll-embeddings", enroll, "--trial-embeddings", trial, "--normalize-enrollment",
                        mode, "--out", (base / "ablation" / mode).string()},
                       out, err) == kExitOk;
  }
  if (!ok) return {false, "eval failed: " + err.str()};
  const auto on = nlohmann::json::parse(ReadFile(base / "ablation/on/summary.json"));
  const auto off = nlohmann::json::parse(ReadFile(base / "ablation/off/summary.json"));
  ok = on["normalize_enrollment"] == true && off["normalize_enrollment"] == false;
  std::string detail = "two summaries;";
  for (const char* sex : {"F", "M"}) {
    const double a = on["mean_clipped_eer"].value(sex, NAN), b = off["mean_clipped_eer"].value(sex, NAN);
    detail += std::string(" ") + sex + " on " + Fmt("%.2f", a) + "% / off " + Fmt("%.2f", b) + "%";
  }
  return {ok, detail};
}

Outcome Determinism(const fs::path& base) {
  RunDefaultPipeline(base / "run2");
  const bool same = ReadFile(base / "run1/summary.json") == ReadFile(base / "run2/summary.json") &&
                    ReadFile(base / "run1/control/summary.json") == ReadFile(base / "run2/control/summary.json");
  return {same, same ? "summary.json byte-identical across runs" : "summary.json differs between runs"};
}

}  // namespace

int main() {
  const fs::path base = fs::temp_directory_path() / "textasv_acceptance";
  fs::remove_all(base);

  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria;
  criteria.emplace_back("EER matches the brute-force oracle", EerOracle);
  criteria.emplace_back("EER clipping", Clipping);
  criteria.emplace_back("AAM gradient check", AamGradient);
  criteria.emplace_back("encoder gradient check", EncoderGradient);
  criteria.emplace_back("integrated-gradients completeness", IgCompleteness);

  PipelineRun first;
  criteria.emplace_back("topical vs control EER", [&] {
    first = RunDefaultPipeline(base / "run1");
    return Directional(first);
  });
  criteria.emplace_back("enrollment-normalization ablation", [&] { return NormalizationAblation(base); });
  criteria.emplace_back("determinism", [&] { return Determinism(base); });

  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s criterion %zu: %s -- %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(base);
  return failures == 0 ? 0 : 1;
}
