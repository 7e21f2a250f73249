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

#ifndef TEXTASV_ATTRIB_HPP_
#define TEXTASV_ATTRIB_HPP_

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "textasv/asv.hpp"
#include "textasv/corpus.hpp"
#include "textasv/encoder.hpp"
#include "textasv/parallel.hpp"
#include "textasv/tokenizer.hpp"

namespace textasv {

enum class Baseline { kPadEmbedding, kZeroEmbedding };

struct AttributionConfig {
  size_t steps = 50;  // midpoint Riemann nodes
  Baseline baseline = Baseline::kPadEmbedding;
  // Allowed |sum of importances - (F(input) - F(baseline))|, relative to
  // max(1, |F(input) - F(baseline)|).
  double completeness_tolerance = 0.01;
};

// F(E) = cos(enrollment, encoder(E)) - threshold, with the encoder run in
// eval mode from explicit embedding rows.
double TargetFunction(const EncoderParams& params, const EncoderConfig& config,
                      std::span<const double> enrollment, double threshold,
                      std::span<const int32_t> token_ids, const Matrix& rows);

// F and dF/dE for every position row. Throws Error{kZeroVector} when the
// encoder output or the enrollment vector is zero.
double TargetGradient(const EncoderParams& params, const EncoderConfig& config,
                      std::span<const double> enrollment, double threshold,
                      std::span<const int32_t> token_ids, const Matrix& rows, Matrix& grad_rows);

// Input rows with every position except [CLS] and [SEP] replaced by the
// baseline row.
Matrix BaselineRows(const EncoderParams& params, std::span<const int32_t> token_ids, Baseline baseline);

struct IntegratedGradientsResult {
  Vector importances;  // one per position
  double f_input = 0.0;
  double f_baseline = 0.0;
};

// IG_p = sum_d (E - E')_{p,d} * mean_k dF/dE_{p,d}(E' + a_k (E - E')),
// a_k = (k - 1/2) / steps. The parallel path evaluates the steps
// concurrently and sums them in step order. Throws Error{kInvalidTokenIds}.
IntegratedGradientsResult IntegratedGradients(const EncoderParams& params, const EncoderConfig& config,
                                              std::span<const int32_t> token_ids,
                                              std::span<const double> enrollment, double threshold,
                                              const AttributionConfig& attribution,
                                              Exec exec = Exec::kParallel);

struct TokenAttribution {
  std::string token;
  double importance = 0.0;

  friend bool operator==(const TokenAttribution&, const TokenAttribution&) = default;
};

enum class Decision { kAccept, kReject };

struct AttributionReport {
  std::string utt_id;
  std::string trial_speaker_id;
  std::string enroll_speaker_id;
  int true_label = 0;  // 1 when trial and enrollment speaker match
  Decision decision = Decision::kReject;
  double raw_score = 0.0;
  double threshold = 0.0;
  double margin_to_threshold = 0.0;
  std::vector<TokenAttribution> tokens;
  double attribution_score = 0.0;
  double target_delta = 0.0;  // F(input) - F(baseline)
  double completeness_residual = 0.0;
  bool completeness_ok = true;

  friend bool operator==(const AttributionReport&, const AttributionReport&) = default;
};

AttributionReport AttributeUtterance(const EncoderParams& params, const EncoderConfig& config,
                                     const Vocab& vocab, const Utterance& utterance,
                                     const EnrollmentModel& enrollment, double threshold,
                                     const AttributionConfig& attribution, Exec exec = Exec::kParallel);

// One report per utterance against its own speaker's enrollment, ordered by
// (speaker_id, utt_id). Reports are computed concurrently under kParallel.
// Throws Error{kMissingThreshold, kMissingEnrollment}.
std::vector<AttributionReport> AttributeBatch(const EncoderParams& params, const EncoderConfig& config,
                                              const Vocab& vocab, std::span<const Utterance> utterances,
                                              std::span<const EnrollmentModel> enrollments,
                                              const std::map<std::string, double>& thresholds,
                                              const AttributionConfig& attribution,
                                              Exec exec = Exec::kParallel);

std::string SerializeReports(std::span<const AttributionReport> reports);  // NDJSON
std::vector<AttributionReport> ParseReports(std::string_view content);

}  // namespace textasv

#endif  // TEXTASV_ATTRIB_HPP_
