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

#include "textasv/aam.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "textasv/error.hpp"
#include "textasv/random.hpp"

namespace textasv {

void AAMConfig::Validate() const {
  if (!(margin >= 0.0 && margin < std::numbers::pi / 2)) {
    throw Error(ErrorKind::kInvalidConfig, "AAM margin must lie in [0, pi/2)");
  }
  if (!(scale > 0.0)) throw Error(ErrorKind::kInvalidConfig, "AAM scale must be positive");
}

ClassifierWeights ClassifierWeights::Init(size_t num_classes, size_t dim, uint64_t seed) {
  ClassifierWeights w{Matrix(num_classes, dim)};
  Rng rng(seed);
  for (auto& v : w.weight.data()) v = rng.Normal();
  return w;
}

namespace {

struct Normalised {
  double embedding_norm = 0.0;
  Vector row_norms;
  Vector raw;  // unclamped cosines
};

Normalised RawCosines(std::span<const double> embedding, const ClassifierWeights& weights) {
  if (embedding.size() != weights.weight.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "embedding and classifier dimensions differ");
  }
  Normalised n;
  n.embedding_norm = Norm(embedding);
  if (!(n.embedding_norm > 0.0)) throw Error(ErrorKind::kZeroNormEmbedding, "embedding has zero norm");
  const size_t classes = weights.num_classes();
  n.row_norms.resize(classes);
  n.raw.resize(classes);
  for (size_t j = 0; j < classes; ++j) {
    auto row = weights.weight.row(j);
    n.row_norms[j] = Norm(row);
    if (!(n.row_norms[j] > 0.0)) throw Error(ErrorKind::kZeroNormWeightRow, "row " + std::to_string(j));
    n.raw[j] = Dot(embedding, row) / (n.embedding_norm * n.row_norms[j]);
  }
  return n;
}

double Clamp(double c) { return std::clamp(c, -1.0 + kCosineClamp, 1.0 - kCosineClamp); }
bool InsideClamp(double c) { return c > -1.0 + kCosineClamp && c < 1.0 - kCosineClamp; }

}  // namespace

Vector CosineLogits(std::span<const double> embedding, const ClassifierWeights& weights) {
  Vector cos = RawCosines(embedding, weights).raw;
  for (auto& c : cos) c = Clamp(c);
  return cos;
}

Vector AamLogits(std::span<const double> cosines, size_t target, const AAMConfig& config) {
  if (target >= cosines.size()) {
    throw Error(ErrorKind::kTargetOutOfRange,
                "target " + std::to_string(target) + " of " + std::to_string(cosines.size()));
  }
  Vector logits(cosines.size());
  for (size_t j = 0; j < cosines.size(); ++j) logits[j] = config.scale * cosines[j];
  const double theta = std::acos(cosines[target]);
  logits[target] = config.scale * std::cos(std::min(theta + config.margin, std::numbers::pi));
  return logits;
}

double AccumulateAamLossAndGrad(std::span<const double> embedding, const ClassifierWeights& weights,
                                size_t target, const AAMConfig& config, double grad_scale,
                                std::span<double> grad_embedding, Matrix& grad_weights) {
  const Normalised n = RawCosines(embedding, weights);
  const size_t classes = weights.num_classes();
  if (target >= classes) {
    throw Error(ErrorKind::kTargetOutOfRange,
                "target " + std::to_string(target) + " of " + std::to_string(classes));
  }
  if (grad_embedding.size() != embedding.size() || !grad_weights.SameShape(weights.weight)) {
    throw Error(ErrorKind::kShapeMismatch, "AAM gradient buffers");
  }

  Vector cos(classes);
  for (size_t j = 0; j < classes; ++j) cos[j] = Clamp(n.raw[j]);
  const Vector logits = AamLogits(cos, target, config);

  const double max_logit = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  Vector prob(classes);
  for (size_t j = 0; j < classes; ++j) {
    prob[j] = std::exp(logits[j] - max_logit);
    denom += prob[j];
  }
  for (auto& p : prob) p /= denom;
  const double loss = max_logit + std::log(denom) - logits[target];

  // d loss / d cos_j, zero where the clamp is active.
  Vector grad_cos(classes, 0.0);
  for (size_t j = 0; j < classes; ++j) {
    if (!InsideClamp(n.raw[j])) continue;
    const double grad_logit = prob[j] - (j == target ? 1.0 : 0.0);
    double dlogit_dcos = config.scale;
    if (j == target) {
      const double theta = std::acos(cos[j]);
      const double shifted = theta + config.margin;
      dlogit_dcos = shifted < std::numbers::pi ? config.scale * std::sin(shifted) / std::sin(theta) : 0.0;
    }
    grad_cos[j] = grad_logit * dlogit_dcos;
  }

  // Through c_j = <e/|e|, w_j/|w_j|>.
  const size_t dim = embedding.size();
  std::fill(grad_embedding.begin(), grad_embedding.end(), 0.0);
  for (size_t j = 0; j < classes; ++j) {
    if (grad_cos[j] == 0.0) continue;
    auto row = weights.weight.row(j);
    auto grad_row = grad_weights.row(j);
    const double g = grad_scale * grad_cos[j];
    const double inv_e = 1.0 / n.embedding_norm;
    const double inv_w = 1.0 / n.row_norms[j];
    for (size_t k = 0; k < dim; ++k) {
      const double e_hat = embedding[k] * inv_e;
      const double w_hat = row[k] * inv_w;
      grad_embedding[k] += g * (w_hat - n.raw[j] * e_hat) * inv_e;
      grad_row[k] += g * (e_hat - n.raw[j] * w_hat) * inv_w;
    }
  }
  return loss;
}

AamLossGrad AamLossAndGrad(std::span<const double> embedding, const ClassifierWeights& weights,
                           size_t target, const AAMConfig& config) {
  AamLossGrad out;
  out.grad_embedding.assign(embedding.size(), 0.0);
  out.grad_weights = Matrix(weights.weight.rows(), weights.weight.cols());
  out.loss = AccumulateAamLossAndGrad(embedding, weights, target, config, 1.0, out.grad_embedding,
                                      out.grad_weights);
  const Vector logits = AamLogits(CosineLogits(embedding, weights), target, config);
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  out.probabilities.resize(logits.size());
  for (size_t j = 0; j < logits.size(); ++j) {
    out.probabilities[j] = std::exp(logits[j] - max_logit);
    denom += out.probabilities[j];
  }
  for (auto& p : out.probabilities) p /= denom;
  return out;
}

size_t PredictClass(std::span<const double> embedding, const ClassifierWeights& weights) {
  const Vector cos = CosineLogits(embedding, weights);
  return static_cast<size_t>(std::max_element(cos.begin(), cos.end()) - cos.begin());
}

}  // namespace textasv
