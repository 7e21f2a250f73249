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

#ifndef TEXTASV_ENCODER_HPP_
#define TEXTASV_ENCODER_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "textasv/matrix.hpp"

namespace textasv {

enum class Activation { kTanh, kIdentity };

struct EncoderConfig {
  size_t vocab_size = 0;
  size_t embed_dim = 64;
  size_t hidden_dim = 64;
  size_t penult_dim = 192;
  double dropout_p = 0.1;
  size_t max_seq_len = 128;
  // kIdentity turns the encoder affine; used to build closed-form oracles.
  Activation activation = Activation::kTanh;

  void Validate() const;  // throws Error{kInvalidConfig}
  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

// Bag-of-embeddings text encoder:
//   tokens -> embedding rows -> mean over non-PAD positions
//          -> tanh(x W_h + b_h) -> dropout -> (.) W_p + b_p
struct EncoderParams {
  Matrix token_embeddings;  // vocab_size x embed_dim
  Matrix hidden_weight;     // embed_dim x hidden_dim
  Vector hidden_bias;       // hidden_dim
  Matrix penult_weight;     // hidden_dim x penult_dim
  Vector penult_bias;       // penult_dim

  static EncoderParams Zeros(const EncoderConfig& config);

  // Flat views in a fixed order: token_embeddings, hidden_weight,
  // hidden_bias, penult_weight, penult_bias.
  std::vector<std::span<double>> Tensors();
  std::vector<std::span<const double>> Tensors() const;
  static const std::vector<std::string>& TensorNames();

  bool SameShape(const EncoderParams& o) const;
  friend bool operator==(const EncoderParams&, const EncoderParams&) = default;
};

// Token rows start small so early pooled vectors sit in tanh's linear range.
inline constexpr double kTokenInitStd = 0.1;

// Normal initialisation; the PAD row starts (and, being excluded from
// pooling, stays) at zero.
EncoderParams InitEncoderParams(const EncoderConfig& config, uint64_t seed);

struct EncodeMode {
  bool train = false;
  uint64_t dropout_seed = 0;

  static EncodeMode Eval() { return {}; }
  static EncodeMode Train(uint64_t seed) { return {true, seed}; }
};

// Everything the backward pass needs, including the realised dropout mask.
struct ForwardTrace {
  std::vector<int32_t> token_ids;
  Matrix input_rows;     // one embedding row per position
  size_t pooled_count = 0;
  Vector pooled;         // embed_dim
  Vector hidden_pre;     // hidden_dim, before the activation
  Vector hidden_post;    // hidden_dim, after the activation
  Vector dropout_scale;  // hidden_dim; 0 or 1/(1-p) in train mode, 1 in eval
  Vector dropped;        // hidden_post * dropout_scale
  Vector embedding;      // penult_dim
};

struct Forward {
  Vector embedding;
  ForwardTrace trace;
};

// Throws Error{kTokenIdOutOfRange}.
Forward Encode(const EncoderParams& params, const EncoderConfig& config,
               std::span<const int32_t> token_ids, EncodeMode mode);

// Runs the encoder from explicit per-position embedding rows instead of the
// lookup table. token_ids still decide which positions are pooled (PAD is
// skipped).
Forward EncodeFromEmbeddings(const EncoderParams& params, const EncoderConfig& config,
                             std::span<const int32_t> token_ids, const Matrix& rows,
                             EncodeMode mode);

// Adds d(loss)/d(params) into *grad when non-null (same shapes as params;
// token_embeddings rows receive the sum over their positions). When
// grad_rows is non-null it is resized to positions x embed_dim and receives
// the per-position gradient. Throws Error{kTraceMismatch} if trace, params and gradient sizes
// disagree.
void AccumulateBackward(const ForwardTrace& trace, const EncoderParams& params,
                        const EncoderConfig& config, std::span<const double> grad_embedding,
                        EncoderParams* grad, Matrix* grad_rows);

struct EncoderGrads {
  EncoderParams params;
  Matrix token_rows;
};

EncoderGrads EncodeBackward(const ForwardTrace& trace, const EncoderParams& params,
                            const EncoderConfig& config, std::span<const double> grad_embedding);

}  // namespace textasv

#endif  // TEXTASV_ENCODER_HPP_
