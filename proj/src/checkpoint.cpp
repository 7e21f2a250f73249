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

#include "textasv/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <span>

#include "json.hpp"
#include "textasv/error.hpp"
#include "textasv/io.hpp"

namespace textasv {

using nlohmann::json;

namespace {

struct TensorRef {
  std::string name;
  size_t rows;
  size_t cols;
};

std::vector<TensorRef> Layout(const Checkpoint& c) {
  const auto& e = c.encoder;
  return {{"token_embeddings", e.token_embeddings.rows(), e.token_embeddings.cols()},
          {"hidden_weight", e.hidden_weight.rows(), e.hidden_weight.cols()},
          {"hidden_bias", 1, e.hidden_bias.size()},
          {"penult_weight", e.penult_weight.rows(), e.penult_weight.cols()},
          {"penult_bias", 1, e.penult_bias.size()},
          {"classifier_weight", c.classifier.weight.rows(), c.classifier.weight.cols()}};
}

std::vector<std::span<const double>> Data(const Checkpoint& c) {
  auto tensors = c.encoder.Tensors();
  tensors.push_back(c.classifier.weight.data());
  return tensors;
}

void AppendLittleEndian(std::string& out, double v) {
  uint64_t bits = std::bit_cast<uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>(bits & 0xff));
    bits >>= 8;
  }
}

double ReadLittleEndian(const unsigned char* p) {
  uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
  return std::bit_cast<double>(bits);
}

json Header(const Checkpoint& c, size_t data_offset) {
  json tensors = json::array();
  size_t offset = data_offset;
  for (const auto& t : Layout(c)) {
    const size_t bytes = t.rows * t.cols * sizeof(double);
    tensors.push_back({{"name", t.name}, {"shape", {t.rows, t.cols}}, {"offset", offset}, {"bytes", bytes}});
    offset += bytes;
  }
  return {{"format", "textasv-checkpoint"},
          {"version", 1},
          {"dims",
           {{"vocab_size", c.config.vocab_size},
            {"embed_dim", c.config.embed_dim},
            {"hidden_dim", c.config.hidden_dim},
            {"penult_dim", c.config.penult_dim},
            {"num_classes", c.classifier.weight.rows()},
            {"max_seq_len", c.config.max_seq_len}}},
          {"dropout_p", c.config.dropout_p},
          {"activation", c.config.activation == Activation::kTanh ? "tanh" : "identity"},
          {"seed", c.seed},
          {"epoch", c.epoch},
          {"classes", c.classes},
          {"dtype", "float64"},
          {"byte_order", "little"},
          {"data_offset", data_offset},
          {"tensors", tensors}};
}

[[noreturn]] void Bad(const std::string& why) { throw Error(ErrorKind::kBadCheckpoint, why); }

}  // namespace

std::string SerializeCheckpoint(const Checkpoint& ckpt) {
  // The header states absolute offsets, which depend on its own length.
  size_t data_offset = 0;
  std::string header;
  for (int i = 0; i < 8; ++i) {
    header = Header(ckpt, data_offset).dump();
    if (header.size() + 1 == data_offset) break;
    data_offset = header.size() + 1;
  }
  std::string out = header;
  out.push_back('\n');
  for (auto tensor : Data(ckpt)) {
    for (double v : tensor) AppendLittleEndian(out, v);
  }
  return out;
}

Checkpoint ParseCheckpoint(std::string_view bytes) {
  const size_t newline = bytes.find('\n');
  if (newline == std::string_view::npos) Bad("missing header line");
  json h = json::parse(bytes.substr(0, newline), nullptr, false);
  if (h.is_discarded() || !h.is_object() || h.value("format", "") != "textasv-checkpoint") {
    Bad("not a textasv checkpoint");
  }
  Checkpoint c;
  try {
    const auto& d = h.at("dims");
    c.config.vocab_size = d.at("vocab_size").get<size_t>();
    c.config.embed_dim = d.at("embed_dim").get<size_t>();
    c.config.hidden_dim = d.at("hidden_dim").get<size_t>();
    c.config.penult_dim = d.at("penult_dim").get<size_t>();
    c.config.max_seq_len = d.at("max_seq_len").get<size_t>();
    c.config.dropout_p = h.at("dropout_p").get<double>();
    c.config.activation = h.at("activation").get<std::string>() == "identity" ? Activation::kIdentity
                                                                             : Activation::kTanh;
    c.seed = h.at("seed").get<uint64_t>();
    c.epoch = h.at("epoch").get<int>();
    c.classes = h.at("classes").get<std::vector<std::string>>();
    const size_t num_classes = d.at("num_classes").get<size_t>();
    c.encoder = EncoderParams::Zeros(c.config);
    c.classifier.weight = Matrix(num_classes, c.config.penult_dim);
    if (c.classes.size() != num_classes) Bad("class list length differs from num_classes");

    const auto layout = Layout(c);
    const auto& tensors = h.at("tensors");
    if (tensors.size() != layout.size()) Bad("unexpected tensor count");
    auto targets = c.encoder.Tensors();
    size_t end = newline + 1;
    targets.push_back(c.classifier.weight.data());
    for (size_t i = 0; i < layout.size(); ++i) {
      const auto& t = tensors[i];
      if (t.at("name").get<std::string>() != layout[i].name) Bad("unexpected tensor " + t.at("name").get<std::string>());
      const auto shape = t.at("shape").get<std::vector<size_t>>();
      if (shape.size() != 2 || shape[0] != layout[i].rows || shape[1] != layout[i].cols) {
        Bad("shape mismatch for " + layout[i].name);
      }
      const size_t offset = t.at("offset").get<size_t>();
      const size_t count = targets[i].size();
      if (offset + count * sizeof(double) > bytes.size()) Bad("truncated tensor " + layout[i].name);
      const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
      for (size_t k = 0; k < count; ++k) {
        targets[i][k] = ReadLittleEndian(p + 8 * k);
        if (!std::isfinite(targets[i][k])) Bad("non-finite value in " + layout[i].name);
      }
      end = std::max(end, offset + count * sizeof(double));
    }
    if (end != bytes.size()) Bad("trailing bytes after the last tensor");
  } catch (const json::exception& e) {
    Bad(std::string("header: ") + e.what());
  }
  return c;
}

void SaveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  WriteFile(path, SerializeCheckpoint(ckpt));
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) { return ParseCheckpoint(ReadFile(path)); }

}  // namespace textasv
