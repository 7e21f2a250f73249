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


#include <cmath>
#include <filesystem>
#include <string>

#include "checks.hpp"
#include "doctest.h"
#include "textasv/checkpoint.hpp"
#include "textasv/error.hpp"

using namespace textasv;

namespace {

Checkpoint Sample() {
  Rng rng(2);
  Checkpoint c;
  c.config = checks::SmallEncoderConfig(rng);
  c.encoder = checks::RandomEncoder(c.config, 3);
  c.classes = {"alice", "bob", "carol"};
  c.classifier = ClassifierWeights::Init(c.classes.size(), c.config.penult_dim, 4);
  c.seed = 99;
  c.epoch = 7;
  return c;
}

ErrorKind KindOf(const std::string& bytes) {
  try {
    ParseCheckpoint(bytes);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("checkpoint parsed");
  return ErrorKind::kInvalidConfig;
}

}  // namespace

TEST_CASE("checkpoint round trip is exact") {
  const Checkpoint c = Sample();
  CHECK(ParseCheckpoint(SerializeCheckpoint(c)) == c);

  Checkpoint odd = c;
  odd.encoder.hidden_bias[0] = -0.0;
  odd.encoder.penult_bias[1] = 1e-308;
  odd.encoder.token_embeddings(2, 1) = 0.1 + 0.2;
  const Checkpoint back = ParseCheckpoint(SerializeCheckpoint(odd));
  CHECK(back == odd);
  CHECK(std::signbit(back.encoder.hidden_bias[0]));
}

TEST_CASE("checkpoint file round trip") {
  const auto path = std::filesystem::temp_directory_path() / "textasv_test_checkpoint.ckpt";
  const Checkpoint c = Sample();
  SaveCheckpoint(c, path);
  CHECK(LoadCheckpoint(path) == c);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(LoadCheckpoint(path), Error);
}

TEST_CASE("corrupted checkpoints are rejected") {
  const std::string good = SerializeCheckpoint(Sample());
  CHECK(KindOf("") == ErrorKind::kBadCheckpoint);
  CHECK(KindOf("not json\n") == ErrorKind::kBadCheckpoint);
  CHECK(KindOf(good.substr(0, good.size() - 8)) == ErrorKind::kBadCheckpoint);
  CHECK(KindOf(good + "x") == ErrorKind::kBadCheckpoint);
  CHECK(KindOf(good.substr(0, good.find('\n'))) == ErrorKind::kBadCheckpoint);

  std::string bad_dim = good;
  const size_t at = bad_dim.find("\"penult_dim\"");
  REQUIRE(at != std::string::npos);
  bad_dim.insert(bad_dim.find(':', at) + 1, "1");
  CHECK(KindOf(bad_dim) == ErrorKind::kBadCheckpoint);

  std::string nan = good;
  const size_t payload = nan.find('\n') + 1;
  const double q = std::nan("");
  nan.replace(payload, sizeof q, reinterpret_cast<const char*>(&q), sizeof q);
  CHECK(KindOf(nan) == ErrorKind::kBadCheckpoint);
}
