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

#include "textasv/attrib.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <unordered_map>

#include "json.hpp"
#include "textasv/error.hpp"
#include "textasv/io.hpp"

namespace textasv {

using nlohmann::json;

namespace {

void CheckTokenIds(std::span<const int32_t> token_ids, size_t vocab_size) {
  if (token_ids.size() < 2 || token_ids.front() != kClsId || token_ids.back() != kSepId) {
    throw Error(ErrorKind::kInvalidTokenIds, "sequence must start with [CLS] and end with [SEP]");
  }
  for (int32_t id : token_ids) {
    if (id < 0 || static_cast<size_t>(id) >= vocab_size) {
      throw Error(ErrorKind::kInvalidTokenIds, "token id " + std::to_string(id) + " out of range");
    }
  }
}

bool IsSpecial(int32_t id) { return id == kClsId || id == kSepId; }

}  // namespace

double TargetFunction(const EncoderParams& params, const EncoderConfig& config,
                      std::span<const double> enrollment, double threshold,
                      std::span<const int32_t> token_ids, const Matrix& rows) {
  const auto fwd = EncodeFromEmbeddings(params, config, token_ids, rows, EncodeMode::Eval());
  const double ne = Norm(enrollment);
  const double nz = Norm(fwd.embedding);
  if (!(ne > 0.0)) throw Error(ErrorKind::kZeroVector, "enrollment vector");
  if (!(nz > 0.0)) throw Error(ErrorKind::kZeroVector, "encoder output");
  return Dot(enrollment, fwd.embedding) / (ne * nz) - threshold;
}

double TargetGradient(const EncoderParams& params, const EncoderConfig& config,
                      std::span<const double> enrollment, double threshold,
                      std::span<const int32_t> token_ids, const Matrix& rows, Matrix& grad_rows) {
  const auto fwd = EncodeFromEmbeddings(params, config, token_ids, rows, EncodeMode::Eval());
  const auto& z = fwd.embedding;
  const double ne = Norm(enrollment);
  const double nz = Norm(z);
  if (!(ne > 0.0)) throw Error(ErrorKind::kZeroVector, "enrollment vector");
  if (!(nz > 0.0)) throw Error(ErrorKind::kZeroVector, "encoder output");
  const double cos = Dot(enrollment, z) / (ne * nz);
  // d cos / dz = (e_hat - cos * z_hat) / |z|
  Vector grad_z(z.size());
  for (size_t k = 0; k < z.size(); ++k) grad_z[k] = (enrollment[k] / ne - cos * z[k] / nz) / nz;
  AccumulateBackward(fwd.trace, params, config, grad_z, nullptr, &grad_rows);
  return cos - threshold;
}

Matrix BaselineRows(const EncoderParams& params, std::span<const int32_t> token_ids, Baseline baseline) {
  const size_t dim = params.token_embeddings.cols();
  Matrix rows(token_ids.size(), dim);
  for (size_t p = 0; p < token_ids.size(); ++p) {
    const int32_t source = IsSpecial(token_ids[p]) ? token_ids[p] : kPadId;
    if (!IsSpecial(token_ids[p]) && baseline == Baseline::kZeroEmbedding) continue;
    auto src = params.token_embeddings.row(static_cast<size_t>(source));
    std::copy(src.begin(), src.end(), rows.row(p).begin());
  }
  return rows;
}

IntegratedGradientsResult IntegratedGradients(const EncoderParams& params, const EncoderConfig& config,
                                              std::span<const int32_t> token_ids,
                                              std::span<const double> enrollment, double threshold,
                                              const AttributionConfig& attribution, Exec exec) {
  CheckTokenIds(token_ids, params.token_embeddings.rows());
  if (attribution.steps < 1) throw Error(ErrorKind::kInvalidConfig, "integrated gradients needs >= 1 step");
  const size_t positions = token_ids.size();
  const size_t dim = params.token_embeddings.cols();

  Matrix input(positions, dim);
  for (size_t p = 0; p < positions; ++p) {
    auto src = params.token_embeddings.row(static_cast<size_t>(token_ids[p]));
    std::copy(src.begin(), src.end(), input.row(p).begin());
  }
  const Matrix baseline = BaselineRows(params, token_ids, attribution.baseline);
  Matrix delta(positions, dim);
  for (size_t i = 0; i < delta.size(); ++i) delta.data()[i] = input.data()[i] - baseline.data()[i];

  const size_t steps = attribution.steps;
  std::vector<Matrix> step_grads(steps);
  ParallelFor(exec, steps, [&](size_t k) {
    const double alpha = (static_cast<double>(k) + 0.5) / static_cast<double>(steps);
    Matrix point(positions, dim);
    for (size_t i = 0; i < point.size(); ++i) {
      point.data()[i] = baseline.data()[i] + alpha * delta.data()[i];
    }
    TargetGradient(params, config, enrollment, threshold, token_ids, point, step_grads[k]);
  });

  Matrix mean_grad(positions, dim);
  for (const auto& g : step_grads) Axpy(1.0, g.data(), mean_grad.data());
  for (auto& v : mean_grad.data()) v /= static_cast<double>(steps);

  IntegratedGradientsResult result;
  result.importances.assign(positions, 0.0);
  for (size_t p = 0; p < positions; ++p) result.importances[p] = Dot(delta.row(p), mean_grad.row(p));
  result.f_input = TargetFunction(params, config, enrollment, threshold, token_ids, input);
  result.f_baseline = TargetFunction(params, config, enrollment, threshold, token_ids, baseline);
  return result;
}

AttributionReport AttributeUtterance(const EncoderParams& params, const EncoderConfig& config,
                                     const Vocab& vocab, const Utterance& utterance,
                                     const EnrollmentModel& enrollment, double threshold,
                                     const AttributionConfig& attribution, Exec exec) {
  const TokenizedText tok = TokenizeWithPieces(utterance.text, vocab, config.max_seq_len);
  const auto ig = IntegratedGradients(params, config, tok.ids, enrollment.vector, threshold, attribution, exec);

  AttributionReport r;
  r.utt_id = utterance.utt_id;
  r.trial_speaker_id = utterance.speaker_id;
  r.enroll_speaker_id = enrollment.speaker_id;
  r.true_label = utterance.speaker_id == enrollment.speaker_id ? 1 : 0;
  r.threshold = threshold;
  r.raw_score = ig.f_input + threshold;
  r.margin_to_threshold = ig.f_input;
  r.decision = r.raw_score >= threshold ? Decision::kAccept : Decision::kReject;
  for (size_t p = 0; p < tok.ids.size(); ++p) {
    r.tokens.push_back({tok.pieces[p], ig.importances[p]});
    r.attribution_score += ig.importances[p];
  }
  r.target_delta = ig.f_input - ig.f_baseline;
  r.completeness_residual = std::abs(r.attribution_score - r.target_delta);
  r.completeness_ok =
      r.completeness_residual <= attribution.completeness_tolerance * std::max(1.0, std::abs(r.target_delta));
  return r;
}

std::vector<AttributionReport> AttributeBatch(const EncoderParams& params, const EncoderConfig& config,
                                              const Vocab& vocab, std::span<const Utterance> utterances,
                                              std::span<const EnrollmentModel> enrollments,
                                              const std::map<std::string, double>& thresholds,
                                              const AttributionConfig& attribution, Exec exec) {
  std::unordered_map<std::string, const EnrollmentModel*> enrollment_of;
  for (const auto& e : enrollments) enrollment_of.emplace(e.speaker_id, &e);

  std::vector<const Utterance*> ordered;
  for (const auto& u : utterances) ordered.push_back(&u);
  std::sort(ordered.begin(), ordered.end(), [](const Utterance* a, const Utterance* b) {
    return std::tie(a->speaker_id, a->utt_id) < std::tie(b->speaker_id, b->utt_id);
  });
  for (const auto* u : ordered) {
    if (!enrollment_of.count(u->speaker_id)) throw Error(ErrorKind::kMissingEnrollment, u->speaker_id);
    if (!thresholds.count(u->speaker_id)) throw Error(ErrorKind::kMissingThreshold, u->speaker_id);
  }

  std::vector<AttributionReport> reports(ordered.size());
  ParallelFor(exec, ordered.size(), [&](size_t i) {
    const Utterance& u = *ordered[i];
    reports[i] = AttributeUtterance(params, config, vocab, u, *enrollment_of.at(u.speaker_id),
                                    thresholds.at(u.speaker_id), attribution, Exec::kSerial);
  });
  return reports;
}

std::string SerializeReports(std::span<const AttributionReport> reports) {
  std::string out;
  for (const auto& r : reports) {
    json tokens = json::array();
    for (const auto& t : r.tokens) tokens.push_back({{"token", t.token}, {"importance", t.importance}});
    json obj = {{"utt_id", r.utt_id},
                {"trial_speaker_id", r.trial_speaker_id},
                {"enroll_speaker_id", r.enroll_speaker_id},
                {"true_label", r.true_label},
                {"decision", r.decision == Decision::kAccept ? "accept" : "reject"},
                {"raw_score", r.raw_score},
                {"threshold", r.threshold},
                {"margin_to_threshold", r.margin_to_threshold},
                {"attribution_score", r.attribution_score},
                {"target_delta", r.target_delta},
                {"completeness_residual", r.completeness_residual},
                {"completeness_ok", r.completeness_ok},
                {"tokens", tokens}};
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::vector<AttributionReport> ParseReports(std::string_view content) {
  std::vector<AttributionReport> reports;
  for (auto [line_no, line] : Lines(content)) {
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      throw Error(ErrorKind::kMalformedRecord, "attribution line " + std::to_string(line_no));
    }
    try {
      AttributionReport r;
      r.utt_id = obj.at("utt_id").get<std::string>();
      r.trial_speaker_id = obj.value("trial_speaker_id", "");
      r.enroll_speaker_id = obj.at("enroll_speaker_id").get<std::string>();
      r.true_label = obj.at("true_label").get<int>();
      r.decision = obj.at("decision").get<std::string>() == "accept" ? Decision::kAccept : Decision::kReject;
      r.raw_score = obj.at("raw_score").get<double>();
      r.threshold = obj.value("threshold", 0.0);
      r.margin_to_threshold = obj.at("margin_to_threshold").get<double>();
      r.attribution_score = obj.at("attribution_score").get<double>();
      r.target_delta = obj.value("target_delta", 0.0);
      r.completeness_residual = obj.value("completeness_residual", 0.0);
      r.completeness_ok = obj.value("completeness_ok", true);
      for (const auto& t : obj.at("tokens")) {
        r.tokens.push_back({t.at("token").get<std::string>(), t.at("importance").get<double>()});
      }
      reports.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kMalformedRecord, "attribution line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return reports;
}

}  // namespace textasv
