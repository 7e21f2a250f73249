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

#include "textasv/encoder.hpp"

#include <cmath>

#include "textasv/error.hpp"
#include "textasv/random.hpp"
#include "textasv/tokenizer.hpp"

namespace textasv {

void EncoderConfig::Validate() const {
  if (vocab_size < static_cast<size_t>(kNumReserved)) {
    throw Error(ErrorKind::kInvalidConfig, "vocab_size must cover the reserved tokens");
  }
  if (embed_dim < 1 || hidden_dim < 1 || penult_dim < 1) {
    throw Error(ErrorKind::kInvalidConfig, "encoder dimensions must be >= 1");
  }
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "dropout_p must lie in [0, 1)");
  }
  if (max_seq_len < 2) throw Error(ErrorKind::kInvalidConfig, "max_seq_len must be >= 2");
}

EncoderParams EncoderParams::Zeros(const EncoderConfig& config) {
  EncoderParams p;
  p.token_embeddings = Matrix(config.vocab_size, config.embed_dim);
  p.hidden_weight = Matrix(config.embed_dim, config.hidden_dim);
  p.hidden_bias = Vector(config.hidden_dim, 0.0);
  p.penult_weight = Matrix(config.hidden_dim, config.penult_dim);
  p.penult_bias = Vector(config.penult_dim, 0.0);
  return p;
}

std::vector<std::span<double>> EncoderParams::Tensors() {
  return {token_embeddings.data(), hidden_weight.data(), hidden_bias, penult_weight.data(),
          penult_bias};
}

std::vector<std::span<const double>> EncoderParams::Tensors() const {
  return {token_embeddings.data(), hidden_weight.data(), hidden_bias, penult_weight.data(),
          penult_bias};
}

const std::vector<std::string>& EncoderParams::TensorNames() {
  static const std::vector<std::string> kNames = {"token_embeddings", "hidden_weight",
                                                  "hidden_bias", "penult_weight", "penult_bias"};
  return kNames;
}

bool EncoderParams::SameShape(const EncoderParams& o) const {
  return token_embeddings.SameShape(o.token_embeddings) && hidden_weight.SameShape(o.hidden_weight) &&
         hidden_bias.size() == o.hidden_bias.size() && penult_weight.SameShape(o.penult_weight) &&
         penult_bias.size() == o.penult_bias.size();
}

EncoderParams InitEncoderParams(const EncoderConfig& config, uint64_t seed) {
  config.Validate();
  EncoderParams p = EncoderParams::Zeros(config);
  Rng rng(seed);
  for (size_t r = 1; r < p.token_embeddings.rows(); ++r) {
    for (auto& v : p.token_embeddings.row(r)) v = kTokenInitStd * rng.Normal();
  }
  const double hidden_std = 1.0 / std::sqrt(static_cast<double>(config.embed_dim));
  for (auto& v : p.hidden_weight.data()) v = hidden_std * rng.Normal();
  const double penult_std = 1.0 / std::sqrt(static_cast<double>(config.hidden_dim));
  for (auto& v : p.penult_weight.data()) v = penult_std * rng.Normal();
  return p;
}

namespace {

void CheckIds(std::span<const int32_t> token_ids, size_t vocab_size) {
  for (int32_t id : token_ids) {
    if (id < 0 || static_cast<size_t>(id) >= vocab_size) {
      throw Error(ErrorKind::kTokenIdOutOfRange,
                  "token id " + std::to_string(id) + " with vocab size " + std::to_string(vocab_size));
    }
  }
}

}  // namespace

Forward Encode(const EncoderParams& params, const EncoderConfig& config,
               std::span<const int32_t> token_ids, EncodeMode mode) {
  CheckIds(token_ids, params.token_embeddings.rows());
  Matrix rows(token_ids.size(), config.embed_dim);
  for (size_t p = 0; p < token_ids.size(); ++p) {
    auto src = params.token_embeddings.row(static_cast<size_t>(token_ids[p]));
    std::copy(src.begin(), src.end(), rows.row(p).begin());
  }
  return EncodeFromEmbeddings(params, config, token_ids, rows, mode);
}

Forward EncodeFromEmbeddings(const EncoderParams& params, const EncoderConfig& config,
                             std::span<const int32_t> token_ids, const Matrix& rows,
                             EncodeMode mode) {
  const size_t e_dim = config.embed_dim;
  const size_t h_dim = config.hidden_dim;
  const size_t p_dim = config.penult_dim;
  if (rows.rows() != token_ids.size() || rows.cols() != e_dim ||
      params.hidden_weight.rows() != e_dim || params.hidden_weight.cols() != h_dim ||
      params.penult_weight.rows() != h_dim || params.penult_weight.cols() != p_dim) {
    throw Error(ErrorKind::kShapeMismatch, "encoder inputs do not match the configuration");
  }

  Forward out;
  ForwardTrace& t = out.trace;
  t.token_ids.assign(token_ids.begin(), token_ids.end());
  t.input_rows = rows;

  t.pooled.assign(e_dim, 0.0);
  for (size_t p = 0; p < token_ids.size(); ++p) {
    if (token_ids[p] == kPadId) continue;
    Axpy(1.0, rows.row(p), t.pooled);
    ++t.pooled_count;
  }
  if (t.pooled_count > 0) {
    const double inv = 1.0 / static_cast<double>(t.pooled_count);
    for (auto& v : t.pooled) v *= inv;
  }

  t.hidden_pre = params.hidden_bias;
  for (size_t i = 0; i < e_dim; ++i) Axpy(t.pooled[i], params.hidden_weight.row(i), t.hidden_pre);
  t.hidden_post.resize(h_dim);
  for (size_t j = 0; j < h_dim; ++j) {
    t.hidden_post[j] = config.activation == Activation::kTanh ? std::tanh(t.hidden_pre[j]) : t.hidden_pre[j];
  }

  t.dropout_scale.assign(h_dim, 1.0);
  if (mode.train && config.dropout_p > 0.0) {
    Rng rng(mode.dropout_seed);
    const double keep = 1.0 - config.dropout_p;
    for (auto& s : t.dropout_scale) s = rng.Bernoulli(keep) ? 1.0 / keep : 0.0;
  }
  t.dropped.resize(h_dim);
  for (size_t j = 0; j < h_dim; ++j) t.dropped[j] = t.hidden_post[j] * t.dropout_scale[j];

  t.embedding = params.penult_bias;
  for (size_t j = 0; j < h_dim; ++j) Axpy(t.dropped[j], params.penult_weight.row(j), t.embedding);

  out.embedding = t.embedding;
  return out;
}

void AccumulateBackward(const ForwardTrace& trace, const EncoderParams& params,
                        const EncoderConfig& config, std::span<const double> grad_embedding,
                        EncoderParams* grad, Matrix* grad_rows) {
  const size_t e_dim = config.embed_dim;
  const size_t h_dim = config.hidden_dim;
  const size_t p_dim = config.penult_dim;
  if (grad_embedding.size() != p_dim || trace.embedding.size() != p_dim ||
      trace.pooled.size() != e_dim || trace.hidden_post.size() != h_dim ||
      trace.dropout_scale.size() != h_dim || trace.input_rows.rows() != trace.token_ids.size() ||
      trace.input_rows.cols() != e_dim || (grad != nullptr && !grad->SameShape(params)) ||
      params.penult_weight.cols() != p_dim || params.hidden_weight.cols() != h_dim ||
      params.hidden_weight.rows() != e_dim) {
    throw Error(ErrorKind::kTraceMismatch, "trace, parameters and gradient do not match");
  }
  for (int32_t id : trace.token_ids) {
    if (id < 0 || static_cast<size_t>(id) >= params.token_embeddings.rows()) {
      throw Error(ErrorKind::kTraceMismatch, "trace token id outside the parameter vocabulary");
    }
  }

  // Penultimate affine layer.
  if (grad != nullptr) Axpy(1.0, grad_embedding, grad->penult_bias);
  Vector grad_hidden(h_dim, 0.0);
  for (size_t j = 0; j < h_dim; ++j) {
    if (grad != nullptr) Axpy(trace.dropped[j], grad_embedding, grad->penult_weight.row(j));
    grad_hidden[j] = Dot(params.penult_weight.row(j), grad_embedding) * trace.dropout_scale[j];
  }

  // Activation.
  if (config.activation == Activation::kTanh) {
    for (size_t j = 0; j < h_dim; ++j) {
      grad_hidden[j] *= 1.0 - trace.hidden_post[j] * trace.hidden_post[j];
    }
  }

  // Hidden affine layer.
  if (grad != nullptr) Axpy(1.0, grad_hidden, grad->hidden_bias);
  Vector grad_pooled(e_dim, 0.0);
  for (size_t i = 0; i < e_dim; ++i) {
    if (grad != nullptr) Axpy(trace.pooled[i], grad_hidden, grad->hidden_weight.row(i));
    grad_pooled[i] = Dot(params.hidden_weight.row(i), grad_hidden);
  }

  // Mean pooling over non-PAD positions.
  const size_t positions = trace.token_ids.size();
  if (grad_rows != nullptr) *grad_rows = Matrix(positions, e_dim);
  if (trace.pooled_count == 0) return;
  const double inv = 1.0 / static_cast<double>(trace.pooled_count);
  for (size_t p = 0; p < positions; ++p) {
    if (trace.token_ids[p] == kPadId) continue;
    if (grad != nullptr) {
      Axpy(inv, grad_pooled, grad->token_embeddings.row(static_cast<size_t>(trace.token_ids[p])));
    }
    if (grad_rows != nullptr) Axpy(inv, grad_pooled, grad_rows->row(p));
  }
}

EncoderGrads EncodeBackward(const ForwardTrace& trace, const EncoderParams& params,
                            const EncoderConfig& config, std::span<const double> grad_embedding) {
  EncoderGrads g;
  g.params.token_embeddings = Matrix(params.token_embeddings.rows(), params.token_embeddings.cols());
  g.params.hidden_weight = Matrix(params.hidden_weight.rows(), params.hidden_weight.cols());
  g.params.hidden_bias.assign(params.hidden_bias.size(), 0.0);
  g.params.penult_weight = Matrix(params.penult_weight.rows(), params.penult_weight.cols());
  g.params.penult_bias.assign(params.penult_bias.size(), 0.0);
  AccumulateBackward(trace, params, config, grad_embedding, &g.params, &g.token_rows);
  return g;
}

}  // namespace textasv
