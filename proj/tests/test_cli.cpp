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


#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "textasv/asv.hpp"
#include "textasv/attrib.hpp"
#include "textasv/cli.hpp"
#include "textasv/io.hpp"

using namespace textasv;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run Cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = CliMain(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& leaf) const { return (path / leaf).string(); }
};

}  // namespace

TEST_CASE("cli: usage errors") {
  CHECK(Cli({}).code == kExitUsage);
  const Run unknown = Cli({"frobnicate"});
  CHECK(unknown.code == kExitUsage);
  CHECK(unknown.err.find("unknown subcommand: frobnicate") != std::string::npos);
  CHECK(Cli({"--help"}).code == kExitOk);
  CHECK(Cli({"eval", "--help"}).code == kExitOk);
  CHECK(Cli({"train", "--out", "/tmp/x"}).code == kExitUsage);
  CHECK(Cli({"ingest", "--corpus", "/nonexistent/corpus.ndjson", "--out", "/tmp/x"}).code == kExitUsage);
  CHECK(Cli({"eval", "--out", "/tmp/x"}).code == kExitUsage);
  CHECK(Cli({"enroll", "--embeddings", "/dev/null", "--normalize-enrollment", "maybe", "--out", "/tmp/x"}).code ==
        kExitUsage);
}

TEST_CASE("cli: data errors") {
  TempDir dir("textasv_test_cli_data");
  WriteFile(dir / "bad.ndjson", "{\"utt_id\": \"a\", \"speaker_id\": \"s\", \"text\": \"\"}\n");
  const Run r = Cli({"ingest", "--corpus", dir / "bad.ndjson", "--out", dir / "o"});
  CHECK(r.code == kExitData);
  CHECK(!r.err.empty());
  WriteFile(dir / "emb.ndjson", "{\"utt_id\": \"a\", \"speaker_id\": \"s\", \"sex\": \"F\", \"vector\": [0, 0]}\n"
                                "{\"utt_id\": \"b\", \"speaker_id\": \"s\", \"sex\": \"F\", \"vector\": [1, 0]}\n");
  CHECK(Cli({"enroll", "--embeddings", dir / "emb.ndjson", "--out", dir / "o"}).code == kExitNumeric);
}

TEST_CASE("cli: eval over an existing score file") {
  TempDir dir("textasv_test_cli_scores");
  std::vector<TrialScore> scores;
  const std::vector<double> pos{0.9, 0.8, 0.7, 0.3}, neg{0.5, 0.2, 0.1, 0.05};
  for (size_t i = 0; i < 4; ++i) {
    scores.push_back({"spk", "p" + std::to_string(i), "spk", pos[i], TrialLabel::kPositive});
    scores.push_back({"spk", "n" + std::to_string(i), "other", neg[i], TrialLabel::kNegative});
  }
  WriteFile(dir / "scores.csv", ScoresCsv(scores));
  WriteFile(dir / "corpus.tsv", "x\tspk\t1\tF\thello\n");
  const Run r = Cli({"eval", "--scores", dir / "scores.csv", "--corpus", dir / "corpus.tsv", "--out", dir / "o"});
  REQUIRE(r.code == kExitOk);
  const json summary = json::parse(ReadFile(dir / "o/summary.json"));
  CHECK(summary["mean_clipped_eer"]["F"].get<double>() == 25.0);
  CHECK(summary["per_speaker"][0]["eer_percent"].get<double>() == 25.0);
  const auto eers = ParseSpeakerEerCsv(ReadFile(dir / "o/speaker_eer.csv"));
  REQUIRE(eers.size() == 1);
  CHECK(eers[0].num_pos == 4);
  CHECK(eers[0].threshold == doctest::Approx(0.4));
}

TEST_CASE("cli: external embeddings, normalisation switch") {
  TempDir dir("textasv_test_cli_embeddings");
  // Two speakers whose utterance vectors differ in length: normalising them
  // before averaging changes the enrollment direction.
  std::vector<EmbeddingRecord> records{
      {"a1", "a", Sex::kFemale, {10.0, 1.0}}, {"a2", "a", Sex::kFemale, {0.1, 1.0}},
      {"a3", "a", Sex::kFemale, {1.0, 0.9}},  {"a4", "a", Sex::kFemale, {0.2, 1.0}},
      {"b1", "b", Sex::kFemale, {1.0, -5.0}}, {"b2", "b", Sex::kFemale, {1.0, 0.1}},
      {"b3", "b", Sex::kFemale, {1.0, 0.3}},  {"b4", "b", Sex::kFemale, {0.8, -1.0}},
  };
  WriteFile(dir / "emb.ndjson", SerializeEmbeddings(records));
  REQUIRE(Cli({"eval", "--embeddings", dir / "emb.ndjson", "--out", dir / "on"}).code == kExitOk);
  REQUIRE(Cli({"eval", "--embeddings", dir / "emb.ndjson", "--normalize-enrollment", "off", "--out", dir / "off"})
              .code == kExitOk);
  const json on = json::parse(ReadFile(dir / "on/summary.json"));
  const json off = json::parse(ReadFile(dir / "off/summary.json"));
  CHECK(on["normalize_enrollment"].get<bool>());
  CHECK(!off["normalize_enrollment"].get<bool>());
  CHECK(ReadFile(dir / "on/scores.csv") != ReadFile(dir / "off/scores.csv"));
  CHECK(ParseEnrollments(ReadFile(dir / "on/enrollments.ndjson"))[0].num_utterances == 2);

  // Explicit enrollment / trial files.
  std::vector<EmbeddingRecord> enroll(records.begin(), records.begin() + 2);
  enroll.insert(enroll.end(), records.begin() + 4, records.begin() + 6);
  std::vector<EmbeddingRecord> trial(records.begin() + 2, records.begin() + 4);
  trial.insert(trial.end(), records.begin() + 6, records.end());
  WriteFile(dir / "enroll.ndjson", SerializeEmbeddings(enroll));
  WriteFile(dir / "trial.ndjson", SerializeEmbeddings(trial));
  REQUIRE(Cli({"eval", "--enroll-embeddings", dir / "enroll.ndjson", "--trial-embeddings", dir / "trial.ndjson",
               "--out", dir / "split"})
              .code == kExitOk);
  CHECK(ReadFile(dir / "split/summary.json") == ReadFile(dir / "on/summary.json"));
}

TEST_CASE("cli: staged run from synthetic corpus to report") {
  TempDir dir("textasv_test_cli_stages");
  const std::string d = dir.path.string();
  auto ok = [](const std::vector<std::string>& args) {
    const Run r = Cli(args);
    CAPTURE(args[0]);
    CAPTURE(r.err);
    CHECK(r.code == kExitOk);
    return r;
  };
  ok({"synth", "--num-speakers", "4", "--utterances-per-speaker", "12", "--sessions-per-speaker", "2",
      "--shared-vocab-size", "60", "--out", d});
  CHECK(fs::exists(dir / "control.ndjson"));
  CHECK(fs::exists(dir / "keywords.json"));
  ok({"ingest", "--corpus", dir / "corpus.ndjson", "--out", dir / "ingested"});
  CHECK(ReadFile(dir / "ingested/corpus.ndjson") == ReadFile(dir / "corpus.ndjson"));
  ok({"split", "--corpus", dir / "corpus.ndjson", "--out", d});
  ok({"vocab", "--corpus", dir / "corpus.ndjson", "--split", dir / "split.json", "--out", d});
  ok({"train", "--corpus", dir / "corpus.ndjson", "--split", dir / "split.json", "--vocab", dir / "vocab.ndjson",
      "--embed-dim", "8", "--hidden-dim", "8", "--penult-dim", "8", "--epochs", "2", "--batch-size", "8", "--base-lr",
      "0.01", "--seed", "3", "--keep-epochs", "--out", d});
  CHECK(fs::exists(dir / "checkpoint.ckpt"));
  CHECK(fs::exists(dir / "epoch_002.ckpt"));
  CHECK(fs::exists(dir / "train_log.csv"));
  ok({"embed", "--checkpoint", dir / "checkpoint.ckpt", "--vocab", dir / "vocab.ndjson", "--corpus",
      dir / "corpus.ndjson", "--out", d});
  ok({"--serial", "eval", "--embeddings", dir / "embeddings.ndjson", "--out", dir / "eval"});
  ok({"enroll", "--embeddings", dir / "embeddings.ndjson", "--out", d});
  ok({"trial", "--enrollments", dir / "enrollments.ndjson", "--embeddings", dir / "embeddings.ndjson", "--out", d});
  CHECK(fs::exists(dir / "scores.csv"));
  ok({"attribute", "--checkpoint", dir / "checkpoint.ckpt", "--vocab", dir / "vocab.ndjson", "--corpus",
      dir / "corpus.ndjson", "--enrollments", dir / "eval/enrollments.ndjson", "--speaker-eer",
      dir / "eval/speaker_eer.csv", "--steps", "16", "--speakers", "2", "--per-speaker", "2", "--out", d});
  const auto reports = ParseReports(ReadFile(dir / "attributions.ndjson"));
  CHECK(reports.size() == 4);
  ok({"report", "--scores", dir / "eval/scores.csv", "--speaker-eer", dir / "eval/speaker_eer.csv", "--radar",
      "attack=" + dir / "eval/speaker_eer.csv", "--attributions", dir / "attributions.ndjson", "--format",
      "markdown", "--out", dir / "report"});
  for (const char* f : {"hist.json", "radar.json", "attributions.md"}) {
    CAPTURE(f);
    CHECK(fs::exists(dir.path / "report" / f));
  }
}
