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

#ifndef TEXTASV_CORPUS_HPP_
#define TEXTASV_CORPUS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace textasv {

enum class Sex { kFemale, kMale, kUnknown };

std::string_view SexLabel(Sex sex);  // "F", "M" or "Unknown"
std::optional<Sex> ParseSex(std::string_view label);

struct Utterance {
  std::string utt_id;
  std::string speaker_id;
  std::string session_id;
  Sex sex = Sex::kUnknown;
  std::string text;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

// Utterances in ingestion order. Construct through LoadCorpus or
// ValidateCorpus so the uniqueness and sex-consistency invariants hold.
struct Corpus {
  std::string name;
  std::vector<Utterance> utterances;

  const Utterance* Find(std::string_view utt_id) const;
  // Speaker ids in order of first appearance.
  std::vector<std::string> SpeakerIds() const;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

enum class CorpusFormat { kNdjson, kTsv };

// Throws Error{kDuplicateUttId, kEmptyText, kInconsistentSex} on the first
// violated invariant.
void ValidateCorpus(const Corpus& corpus);

Corpus ParseCorpus(std::string_view content, CorpusFormat format, std::string name = "");
Corpus LoadCorpus(const std::filesystem::path& path, CorpusFormat format);
std::string SerializeCorpus(const Corpus& corpus);  // canonical NDJSON
void SaveCorpus(const Corpus& corpus, const std::filesystem::path& path);

struct SplitResult {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  uint64_t seed = 0;

  friend bool operator==(const SplitResult&, const SplitResult&) = default;
};

// Stratified split per (speaker, session) group. Inside a group the
// utterances are shuffled with a seeded stream and the last
// clamp(ceil(fraction * n), 1, n - 1) go to validation; singleton groups stay
// in train. Both output lists follow corpus order.
SplitResult SplitSpkDiverseSess(const Corpus& corpus, double validation_fraction, uint64_t seed);

std::string SerializeSplit(const SplitResult& split);
SplitResult ParseSplit(std::string_view content);

// Speakers grouped by sex label, each list in first-appearance order.
std::map<Sex, std::vector<std::string>> PartitionBySex(const Corpus& corpus);

// Sub-corpus holding the listed utterances, in corpus order.
Corpus Subset(const Corpus& corpus, const std::vector<std::string>& utt_ids);

}  // namespace textasv

#endif  // TEXTASV_CORPUS_HPP_
