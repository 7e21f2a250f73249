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

#ifndef TEXTASV_CHECKPOINT_HPP_
#define TEXTASV_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "textasv/aam.hpp"
#include "textasv/encoder.hpp"

namespace textasv {

// Encoder parameters plus the classifier head, as written after an epoch.
struct Checkpoint {
  EncoderConfig config;
  EncoderParams encoder;
  ClassifierWeights classifier;
  std::vector<std::string> classes;  // speaker id per classifier row
  uint64_t seed = 0;
  int epoch = 0;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

// File layout: one line of JSON header, '\n', then every tensor as row-major
// little-endian float64 in header order. The header records dims, seed,
// epoch and, per tensor, its shape and absolute byte offset.
std::string SerializeCheckpoint(const Checkpoint& ckpt);
Checkpoint ParseCheckpoint(std::string_view bytes);  // throws Error{kBadCheckpoint}

void SaveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace textasv

#endif  // TEXTASV_CHECKPOINT_HPP_
