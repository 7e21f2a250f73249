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


// Randomised instances and gradient checks shared by the unit tests and the
// acceptance suite.

#ifndef TEXTASV_TESTS_CHECKS_HPP_
#define TEXTASV_TESTS_CHECKS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "textasv/aam.hpp"
#include "textasv/attrib.hpp"
#include "textasv/encoder.hpp"
#include "textasv/random.hpp"
#include "textasv/tokenizer.hpp"

namespace checks {

using namespace textasv;

// Every tensor (biases and the PAD row included) drawn from N(0, scale^2).
inline EncoderParams RandomEncoder(const EncoderConfig& config, uint64_t seed, double scale = 0.5) {
  EncoderParams p = EncoderParams::Zeros(config);
  Rng rng(seed);
  for (auto t : p.Tensors()) {
    for (auto& v : t) v = scale * rng.Normal();
  }
  return p;
}

// CLS, `words` random ids (PAD allowed in the middle when pad_holes), SEP.
inline std::vector<int32_t> RandomSequence(Rng& rng, size_t vocab_size, size_t words, bool pad_holes) {
  std::vector<int32_t> ids{kClsId};
  for (size_t i = 0; i < words; ++i) {
    if (pad_holes && rng.Bernoulli(0.2)) {
      ids.push_back(kPadId);
    } else {
      ids.push_back(static_cast<int32_t>(rng.Between(kNumReserved - 3, static_cast<int64_t>(vocab_size) - 1)));
    }
  }
  ids.push_back(kSepId);
  return ids;
}

inline EncoderConfig SmallEncoderConfig(Rng& rng) {
  EncoderConfig c;
  c.vocab_size = static_cast<size_t>(rng.Between(6, 14));
  c.embed_dim = static_cast<size_t>(rng.Between(1, 6));
  c.hidden_dim = static_cast<size_t>(rng.Between(1, 6));
  c.penult_dim = static_cast<size_t>(rng.Between(1, 6));
  c.dropout_p = rng.Bernoulli(0.5) ? 0.0 : 0.3;
  return c;
}

struct GradCheck {
  std::vector<double> max_rel_error;  // per encoder tensor, or {embedding, weights} for the head
  double Worst() const { return *std::max_element(max_rel_error.begin(), max_rel_error.end()); }
};

// Loss = <g, encode(tokens)> for a random g; every parameter entry is
// compared against a central difference.
inline GradCheck EncoderGradCheck(const EncoderConfig& config, uint64_t seed, bool train_mode) {
  Rng rng(seed);
  EncoderParams params = RandomEncoder(config, MixSeed(seed, 1));
  const auto ids = RandomSequence(rng, config.vocab_size, static_cast<size_t>(rng.Between(1, 7)), true);
  Vector g(config.penult_dim);
  for (auto& v : g) v = rng.Normal();
  const EncodeMode mode = train_mode ? EncodeMode::Train(MixSeed(seed, 2)) : EncodeMode::Eval();

  const auto loss = [&] { return oracle::DotProduct(g, Encode(params, config, ids, mode).embedding); };
  const Forward fwd = Encode(params, config, ids, mode);
  const EncoderGrads grads = EncodeBackward(fwd.trace, params, config, g);
  const double floor = oracle::NoiseFloor(loss());

  GradCheck out;
  auto tensors = params.Tensors();
  const auto analytic = grads.params.Tensors();
  for (size_t t = 0; t < tensors.size(); ++t) {
    double worst = 0.0;
    for (size_t i = 0; i < tensors[t].size(); ++i) {
      const double numeric = oracle::CentralDifference(loss, tensors[t][i]);
      worst = std::max(worst, oracle::RelativeError(analytic[t][i], numeric, floor));
    }
    out.max_rel_error.push_back(worst);
  }
  return out;
}

inline Matrix RandomMatrix(Rng& rng, size_t rows, size_t cols) {
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = rng.Normal();
  return m;
}

inline Vector RandomVector(Rng& rng, size_t n) {
  Vector v(n);
  for (auto& x : v) x = rng.Normal();
  return v;
}

// AAM loss gradient against central differences on embedding and weights.
inline GradCheck AamGradCheck(size_t classes, size_t dim, const AAMConfig& config, uint64_t seed) {
  Rng rng(seed);
  Vector e = RandomVector(rng, dim);
  ClassifierWeights w{RandomMatrix(rng, classes, dim)};
  const size_t target = static_cast<size_t>(rng.Index(classes));
  const auto loss = [&] { return AamLossAndGrad(e, w, target, config).loss; };
  const AamLossGrad analytic = AamLossAndGrad(e, w, target, config);
  // The loss is a log-sum-exp of logits bounded by the scale.
  const double floor = oracle::NoiseFloor(std::max(analytic.loss, config.scale));

  GradCheck out{{0.0, 0.0}};
  for (size_t d = 0; d < dim; ++d) {
    out.max_rel_error[0] = std::max(
        out.max_rel_error[0], oracle::RelativeError(analytic.grad_embedding[d], oracle::CentralDifference(loss, e[d]), floor));
  }
  for (size_t i = 0; i < w.weight.size(); ++i) {
    out.max_rel_error[1] =
        std::max(out.max_rel_error[1], oracle::RelativeError(analytic.grad_weights.data()[i],
                                                             oracle::CentralDifference(loss, w.weight.data()[i]),
                                                             floor));
  }
  return out;
}


struct IgInstance {
  EncoderConfig config;
  EncoderParams params;
  std::vector<int32_t> ids;
  Vector enrollment;
  double threshold = 0.0;
};

// A random small encoder, token sequence, enrollment vector and threshold.
inline IgInstance RandomIgInstance(uint64_t seed, Activation activation) {
  Rng rng(seed);
  IgInstance x;
  x.config.vocab_size = static_cast<size_t>(rng.Between(8, 30));
  x.config.embed_dim = static_cast<size_t>(rng.Between(2, 8));
  x.config.hidden_dim = static_cast<size_t>(rng.Between(2, 8));
  x.config.penult_dim = static_cast<size_t>(rng.Between(2, 8));
  x.config.activation = activation;
  x.params = RandomEncoder(x.config, MixSeed(seed, 1), 0.8);
  for (auto& v : x.params.token_embeddings.row(kPadId)) v = 0.0;
  x.ids = RandomSequence(rng, x.config.vocab_size, static_cast<size_t>(rng.Between(1, 10)), false);
  x.enrollment = RandomVector(rng, x.config.penult_dim);
  x.threshold = rng.Uniform() - 0.5;
  return x;
}

struct Completeness {
  double residual = 0.0;   // |sum importances - (F(x) - F(x'))|
  double tolerance = 0.0;  // 1% of max(1, |F(x) - F(x')|)
};

inline Completeness IgCompleteness(const IgInstance& x, size_t steps) {
  AttributionConfig cfg;
  cfg.steps = steps;
  const auto r = IntegratedGradients(x.params, x.config, x.ids, x.enrollment, x.threshold, cfg);
  double sum = 0.0;
  for (double v : r.importances) sum += v;
  const double delta = r.f_input - r.f_baseline;
  return {std::abs(sum - delta), 0.01 * std::max(1.0, std::abs(delta))};
}

// Largest absolute gap between the attribution of an identity-activation
// encoder and the closed-form affine oracle.
inline double IgLinearOracleGap(const IgInstance& x, size_t steps) {
  const size_t positions = x.ids.size(), E = x.config.embed_dim, H = x.config.hidden_dim, P = x.config.penult_dim;
  const auto& p = x.params;

  Matrix A(E, P);  // W_h W_p
  for (size_t i = 0; i < E; ++i)
    for (size_t h = 0; h < H; ++h)
      for (size_t j = 0; j < P; ++j) A(i, j) += p.hidden_weight(i, h) * p.penult_weight(h, j);
  Vector c = p.penult_bias;  // b_h W_p + b_p
  for (size_t h = 0; h < H; ++h)
    for (size_t j = 0; j < P; ++j) c[j] += p.hidden_bias[h] * p.penult_weight(h, j);

  // PAD-row baseline with CLS/SEP kept; PAD positions are not pooled.
  std::vector<bool> pooled(positions);
  Matrix delta(positions, E);
  Vector z_base = c;
  size_t n = 0;
  for (size_t q = 0; q < positions; ++q) n += pooled[q] = x.ids[q] != kPadId;
  for (size_t q = 0; q < positions; ++q) {
    const bool special = x.ids[q] == kClsId || x.ids[q] == kSepId;
    const auto row = p.token_embeddings.row(static_cast<size_t>(x.ids[q]));
    const auto base = p.token_embeddings.row(special ? static_cast<size_t>(x.ids[q]) : kPadId);
    for (size_t i = 0; i < E; ++i) {
      delta(q, i) = row[i] - base[i];
      if (pooled[q])
        for (size_t j = 0; j < P; ++j) z_base[j] += base[i] * A(i, j) / static_cast<double>(n);
    }
  }
  const auto want = oracle::LinearIntegratedGradients(delta, pooled, A, z_base, x.enrollment, steps);

  AttributionConfig cfg;
  cfg.steps = steps;
  const auto got = IntegratedGradients(p, x.config, x.ids, x.enrollment, x.threshold, cfg);
  double gap = 0.0;
  for (size_t q = 0; q < positions; ++q) gap = std::max(gap, std::abs(got.importances[q] - want[q]));
  return gap;
}

}  // namespace checks

#endif  // TEXTASV_TESTS_CHECKS_HPP_
