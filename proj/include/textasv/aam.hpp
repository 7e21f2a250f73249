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

#ifndef TEXTASV_AAM_HPP_
#define TEXTASV_AAM_HPP_

#include <cstdint>
#include <span>

#include "textasv/matrix.hpp"

namespace textasv {

// Cosines are clamped to [-1 + eps, 1 - eps] so arccos stays differentiable.
inline constexpr double kCosineClamp = 1e-7;

struct AAMConfig {
  double margin = 0.2;  // radians
  double scale = 30.0;

  void Validate() const;  // margin in [0, pi/2), scale > 0
};

// One unnormalised row per training speaker. Rows are L2-normalised on use;
// there is no bias.
struct ClassifierWeights {
  Matrix weight;  // num_classes x embed_dim

  size_t num_classes() const { return weight.rows(); }
  static ClassifierWeights Init(size_t num_classes, size_t dim, uint64_t seed);
  friend bool operator==(const ClassifierWeights&, const ClassifierWeights&) = default;
};

// cos(theta_j) between the normalised embedding and each normalised row,
// clamped. Throws Error{kZeroNormEmbedding, kZeroNormWeightRow}.
Vector CosineLogits(std::span<const double> embedding, const ClassifierWeights& weights);

// scale * cos(theta_j) for non-target classes and
// scale * cos(min(theta_t + margin, pi)) for the target.
Vector AamLogits(std::span<const double> cosines, size_t target, const AAMConfig& config);

struct AamLossGrad {
  double loss = 0.0;
  Vector grad_embedding;
  Matrix grad_weights;
  Vector probabilities;  // softmax over the margin-adjusted logits
};

// Cross-entropy of softmax(AamLogits) against target, with exact gradients
// through the normalisations, arccos and clamps.
AamLossGrad AamLossAndGrad(std::span<const double> embedding, const ClassifierWeights& weights,
                           size_t target, const AAMConfig& config);

// Same as AamLossAndGrad but adds grad_scale * gradients into caller-owned
// buffers. grad_embedding is overwritten, grad_weights accumulated. Returns
// the (unscaled) loss.
double AccumulateAamLossAndGrad(std::span<const double> embedding, const ClassifierWeights& weights,
                                size_t target, const AAMConfig& config, double grad_scale,
                                std::span<double> grad_embedding, Matrix& grad_weights);

// Index of the largest cosine logit.
size_t PredictClass(std::span<const double> embedding, const ClassifierWeights& weights);

}  // namespace textasv

#endif  // TEXTASV_AAM_HPP_
