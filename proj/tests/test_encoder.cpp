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


#include <algorithm>
#include <cmath>
#include <vector>

#include "checks.hpp"
#include "doctest.h"
#include "textasv/encoder.hpp"
#include "textasv/error.hpp"

using namespace textasv;

namespace {

EncoderConfig Tiny() {
  EncoderConfig c;
  c.vocab_size = 10;
  c.embed_dim = 4;
  c.hidden_dim = 4;
  c.penult_dim = 4;
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  EncoderConfig c = Tiny();
  CHECK_NOTHROW(c.Validate());
  c.dropout_p = 1.0;
  CHECK_THROWS_AS(c.Validate(), Error);
  c = Tiny();
  c.hidden_dim = 0;
  CHECK_THROWS_AS(c.Validate(), Error);
  c = Tiny();
  c.vocab_size = 3;
  CHECK_THROWS_AS(c.Validate(), Error);
}

TEST_CASE("init: PAD row zero, defaults shaped") {
  EncoderConfig c;
  c.vocab_size = 50;
  const EncoderParams p = InitEncoderParams(c, 3);
  CHECK(p.token_embeddings.rows() == 50);
  CHECK(p.token_embeddings.cols() == 64);
  CHECK(p.penult_weight.cols() == 192);
  for (double v : p.token_embeddings.row(kPadId)) CHECK(v == 0.0);
  CHECK(InitEncoderParams(c, 3) == p);
  CHECK(!(InitEncoderParams(c, 4) == p));
}

TEST_CASE("all-zero params give the penultimate bias") {
  const EncoderConfig c = Tiny();
  EncoderParams p = EncoderParams::Zeros(c);
  p.penult_bias = {0.5, -1.0, 2.0, 0.0};
  const std::vector<int32_t> ids{kClsId, 5, 6, kSepId};
  CHECK(Encode(p, c, ids, EncodeMode::Eval()).embedding == p.penult_bias);
  CHECK(Encode(p, c, ids, EncodeMode::Train(9)).embedding == p.penult_bias);
}

TEST_CASE("eval mode is deterministic; train mode is deterministic per seed") {
  const EncoderConfig c = Tiny();
  const EncoderParams p = checks::RandomEncoder(c, 1);
  const std::vector<int32_t> ids{kClsId, 4, 7, 7, kSepId};
  CHECK(Encode(p, c, ids, EncodeMode::Eval()).embedding == Encode(p, c, ids, EncodeMode::Eval()).embedding);
  CHECK(Encode(p, c, ids, EncodeMode::Train(5)).embedding == Encode(p, c, ids, EncodeMode::Train(5)).embedding);
}

TEST_CASE("repeating one distinct token does not change the mean pool") {
  const EncoderConfig c = Tiny();
  const EncoderParams p = checks::RandomEncoder(c, 2);
  const std::vector<int32_t> once{6};
  const std::vector<int32_t> five{6, 6, 6, 6, 6};
  CHECK(Encode(p, c, once, EncodeMode::Eval()).embedding == Encode(p, c, five, EncodeMode::Eval()).embedding);
}

TEST_CASE("permuting tokens between CLS and SEP leaves the embedding unchanged") {
  EncoderConfig c = Tiny();
  c.vocab_size = 40;
  const EncoderParams p = checks::RandomEncoder(c, 3);
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto ids = checks::RandomSequence(rng, c.vocab_size, 8, false);
    const auto base = Encode(p, c, ids, EncodeMode::Eval()).embedding;
    std::vector<int32_t> middle(ids.begin() + 1, ids.end() - 1);
    rng.Shuffle(middle);
    std::copy(middle.begin(), middle.end(), ids.begin() + 1);
    const auto permuted = Encode(p, c, ids, EncodeMode::Eval()).embedding;
    for (size_t i = 0; i < base.size(); ++i) CHECK(permuted[i] == doctest::Approx(base[i]).epsilon(1e-14));
  }
}

TEST_CASE("PAD positions are not pooled") {
  const EncoderConfig c = Tiny();
  const EncoderParams p = checks::RandomEncoder(c, 4);  // PAD row is non-zero here on purpose
  const std::vector<int32_t> plain{kClsId, 5, kSepId};
  const std::vector<int32_t> padded{kClsId, 5, kSepId, kPadId, kPadId};
  const auto a = Encode(p, c, plain, EncodeMode::Eval()).embedding;
  const auto b = Encode(p, c, padded, EncodeMode::Eval()).embedding;
  for (size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-14));
}

TEST_CASE("out-of-range token ids") {
  const EncoderConfig c = Tiny();
  const EncoderParams p = checks::RandomEncoder(c, 5);
  const std::vector<int32_t> bad{kClsId, 10, kSepId};
  const std::vector<int32_t> negative{-1};
  CHECK_THROWS_AS(Encode(p, c, bad, EncodeMode::Eval()), Error);
  CHECK_THROWS_AS(Encode(p, c, negative, EncodeMode::Eval()), Error);
}

TEST_CASE("zero upstream gradient gives zero gradients") {
  const EncoderConfig c = Tiny();
  const EncoderParams p = checks::RandomEncoder(c, 6);
  const std::vector<int32_t> ids{kClsId, 4, 8, kSepId};
  const Forward f = Encode(p, c, ids, EncodeMode::Train(1));
  const EncoderGrads g = EncodeBackward(f.trace, p, c, Vector(c.penult_dim, 0.0));
  for (auto t : g.params.Tensors()) {
    for (double v : t) CHECK(v == 0.0);
  }
  for (double v : g.token_rows.data()) CHECK(v == 0.0);
}

TEST_CASE("PAD row receives no gradient") {
  const EncoderConfig c = Tiny();
  const EncoderParams p = checks::RandomEncoder(c, 7);
  const std::vector<int32_t> ids{kClsId, 4, kPadId, 8, kSepId, kPadId};
  const Forward f = Encode(p, c, ids, EncodeMode::Eval());
  const EncoderGrads g = EncodeBackward(f.trace, p, c, Vector(c.penult_dim, 1.0));
  for (double v : g.params.token_embeddings.row(kPadId)) CHECK(v == 0.0);
  for (double v : g.token_rows.row(2)) CHECK(v == 0.0);
  for (double v : g.token_rows.row(5)) CHECK(v == 0.0);
}

TEST_CASE("backward rejects a mismatched trace") {
  const EncoderConfig c = Tiny();
  const EncoderParams p = checks::RandomEncoder(c, 8);
  const std::vector<int32_t> ids{kClsId, 4, kSepId};
  const Forward f = Encode(p, c, ids, EncodeMode::Eval());
  CHECK_THROWS_AS(EncodeBackward(f.trace, p, c, Vector(c.penult_dim + 1, 1.0)), Error);
  EncoderConfig wider = c;
  wider.hidden_dim = 5;
  CHECK_THROWS_AS(EncodeBackward(f.trace, checks::RandomEncoder(wider, 1), wider, Vector(c.penult_dim, 1.0)), Error);
}

TEST_CASE("finite differences: vocab 10, dims 4, eval and train mode") {
  for (bool train : {false, true}) {
    const auto check = checks::EncoderGradCheck(Tiny(), 21, train);
    for (size_t t = 0; t < check.max_rel_error.size(); ++t) {
      CHECK_MESSAGE(check.max_rel_error[t] < 1e-4, EncoderParams::TensorNames()[t]);
    }
  }
}

TEST_CASE("finite differences: identity activation") {
  EncoderConfig c = Tiny();
  c.activation = Activation::kIdentity;
  CHECK(checks::EncoderGradCheck(c, 22, true).Worst() < 1e-4);
}

TEST_CASE("per-position row gradients sum to the token-table gradient") {
  const EncoderConfig c = Tiny();
  const EncoderParams p = checks::RandomEncoder(c, 9);
  const std::vector<int32_t> ids{kClsId, 4, 4, 7, kSepId};
  const Forward f = Encode(p, c, ids, EncodeMode::Eval());
  const EncoderGrads g = EncodeBackward(f.trace, p, c, Vector(c.penult_dim, 0.5));
  for (size_t d = 0; d < c.embed_dim; ++d) {
    CHECK(g.params.token_embeddings(4, d) == doctest::Approx(g.token_rows(1, d) + g.token_rows(2, d)));
    CHECK(g.params.token_embeddings(7, d) == doctest::Approx(g.token_rows(3, d)));
  }
}

TEST_CASE("dropout: eval activation equals the mean over train masks") {
  EncoderConfig c = Tiny();
  c.hidden_dim = 8;
  c.dropout_p = 0.1;
  const EncoderParams p = checks::RandomEncoder(c, 10);
  const std::vector<int32_t> ids{kClsId, 4, 5, 6, kSepId};
  const Vector eval = Encode(p, c, ids, EncodeMode::Eval()).trace.dropped;
  const int masks = 20000;
  Vector mean(c.hidden_dim, 0.0);
  for (int s = 0; s < masks; ++s) {
    const Vector d = Encode(p, c, ids, EncodeMode::Train(MixSeed(77, s))).trace.dropped;
    for (size_t j = 0; j < d.size(); ++j) mean[j] += d[j] / masks;
  }
  for (size_t j = 0; j < eval.size(); ++j) {
    CHECK(std::abs(mean[j] - eval[j]) <= 0.01 * std::max(std::abs(eval[j]), 1e-3));
  }
}

TEST_CASE("encode from explicit rows matches the lookup path") {
  const EncoderConfig c = Tiny();
  const EncoderParams p = checks::RandomEncoder(c, 12);
  const std::vector<int32_t> ids{kClsId, 9, 3, kSepId};
  Matrix rows(ids.size(), c.embed_dim);
  for (size_t i = 0; i < ids.size(); ++i) {
    std::copy_n(p.token_embeddings.row(ids[i]).begin(), c.embed_dim, rows.row(i).begin());
  }
  CHECK(EncodeFromEmbeddings(p, c, ids, rows, EncodeMode::Eval()).embedding ==
        Encode(p, c, ids, EncodeMode::Eval()).embedding);
}
