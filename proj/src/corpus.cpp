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

#include "textasv/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "textasv/error.hpp"
#include "textasv/io.hpp"
#include "textasv/random.hpp"

namespace textasv {

using nlohmann::json;

std::string_view SexLabel(Sex sex) {
  switch (sex) {
    case Sex::kFemale: return "F";
    case Sex::kMale: return "M";
    case Sex::kUnknown: break;
  }
  return "Unknown";
}

std::optional<Sex> ParseSex(std::string_view label) {
  if (label == "F" || label == "f") return Sex::kFemale;
  if (label == "M" || label == "m") return Sex::kMale;
  if (label.empty() || label == "Unknown" || label == "null" || label == "-") return Sex::kUnknown;
  return std::nullopt;
}

const Utterance* Corpus::Find(std::string_view utt_id) const {
  for (const auto& u : utterances) {
    if (u.utt_id == utt_id) return &u;
  }
  return nullptr;
}

std::vector<std::string> Corpus::SpeakerIds() const {
  std::vector<std::string> ids;
  std::unordered_set<std::string> seen;
  for (const auto& u : utterances) {
    if (seen.insert(u.speaker_id).second) ids.push_back(u.speaker_id);
  }
  return ids;
}

namespace {

std::string Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\f\v");
  if (first == std::string_view::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n\f\v");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void Malformed(size_t line, const std::string& why) {
  throw Error(ErrorKind::kMalformedRecord, "line " + std::to_string(line) + ": " + why);
}

std::string RequireString(const json& obj, const char* key, size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) Malformed(line, std::string("missing string field '") + key + "'");
  return it->get<std::string>();
}

Utterance ParseNdjsonLine(std::string_view line, size_t line_no) {
  json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (obj.is_discarded() || !obj.is_object()) Malformed(line_no, "not a JSON object");
  Utterance u;
  u.utt_id = RequireString(obj, "utt_id", line_no);
  u.speaker_id = RequireString(obj, "speaker_id", line_no);
  u.session_id = RequireString(obj, "session_id", line_no);
  u.text = Trim(RequireString(obj, "text", line_no));
  auto sex = obj.find("sex");
  if (sex == obj.end() || sex->is_null()) {
    u.sex = Sex::kUnknown;
  } else if (sex->is_string()) {
    auto parsed = ParseSex(sex->get<std::string>());
    if (!parsed) Malformed(line_no, "bad sex label");
    u.sex = *parsed;
  } else {
    Malformed(line_no, "bad sex label");
  }
  return u;
}

Utterance ParseTsvLine(std::string_view line, size_t line_no) {
  std::vector<std::string_view> cols;
  size_t start = 0;
  while (cols.size() < 4) {
    const size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) Malformed(line_no, "expected 5 tab-separated columns");
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  cols.push_back(line.substr(start));
  Utterance u;
  u.utt_id = Trim(cols[0]);
  u.speaker_id = Trim(cols[1]);
  u.session_id = Trim(cols[2]);
  auto sex = ParseSex(Trim(cols[3]));
  if (!sex) Malformed(line_no, "bad sex label");
  u.sex = *sex;
  u.text = Trim(cols[4]);
  if (u.utt_id.empty() || u.speaker_id.empty()) Malformed(line_no, "empty id column");
  return u;
}

}  // namespace

void ValidateCorpus(const Corpus& corpus) {
  std::unordered_set<std::string> ids;
  std::unordered_map<std::string, Sex> speaker_sex;
  for (const auto& u : corpus.utterances) {
    if (!ids.insert(u.utt_id).second) throw Error(ErrorKind::kDuplicateUttId, u.utt_id);
    if (Trim(u.text).empty()) throw Error(ErrorKind::kEmptyText, u.utt_id);
    auto [it, inserted] = speaker_sex.emplace(u.speaker_id, u.sex);
    if (!inserted && it->second != u.sex) throw Error(ErrorKind::kInconsistentSex, u.speaker_id);
  }
}

Corpus ParseCorpus(std::string_view content, CorpusFormat format, std::string name) {
  Corpus corpus;
  corpus.name = std::move(name);
  for (auto [line_no, line] : Lines(content)) {
    corpus.utterances.push_back(format == CorpusFormat::kNdjson ? ParseNdjsonLine(line, line_no)
                                                                : ParseTsvLine(line, line_no));
  }
  ValidateCorpus(corpus);
  return corpus;
}

Corpus LoadCorpus(const std::filesystem::path& path, CorpusFormat format) {
  return ParseCorpus(ReadFile(path), format, path.stem().string());
}

std::string SerializeCorpus(const Corpus& corpus) {
  std::string out;
  for (const auto& u : corpus.utterances) {
    json obj = json::object();
    obj["utt_id"] = u.utt_id;
    obj["speaker_id"] = u.speaker_id;
    obj["session_id"] = u.session_id;
    obj["sex"] = u.sex == Sex::kUnknown ? json(nullptr) : json(std::string(SexLabel(u.sex)));
    obj["text"] = u.text;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void SaveCorpus(const Corpus& corpus, const std::filesystem::path& path) {
  WriteFile(path, SerializeCorpus(corpus));
}

SplitResult SplitSpkDiverseSess(const Corpus& corpus, double validation_fraction, uint64_t seed) {
  if (corpus.utterances.empty()) throw Error(ErrorKind::kEmptyCorpus, corpus.name);
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "validation fraction must lie in (0, 1)");
  }

  // Groups in first-appearance order, members as corpus indices.
  std::vector<std::vector<size_t>> groups;
  std::map<std::pair<std::string, std::string>, size_t> group_of;
  for (size_t i = 0; i < corpus.utterances.size(); ++i) {
    const auto& u = corpus.utterances[i];
    auto [it, inserted] = group_of.emplace(std::make_pair(u.speaker_id, u.session_id), groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }

  Rng rng(seed);
  std::vector<bool> is_validation(corpus.utterances.size(), false);
  for (auto& members : groups) {
    const size_t n = members.size();
    if (n < 2) continue;
    rng.Shuffle(members);
    const double wanted = std::ceil(validation_fraction * static_cast<double>(n) - 1e-9);
    const size_t n_val = std::clamp<size_t>(static_cast<size_t>(wanted), 1, n - 1);
    for (size_t k = n - n_val; k < n; ++k) is_validation[members[k]] = true;
  }

  SplitResult split;
  split.seed = seed;
  for (size_t i = 0; i < corpus.utterances.size(); ++i) {
    (is_validation[i] ? split.validation : split.train).push_back(corpus.utterances[i].utt_id);
  }
  return split;
}

std::string SerializeSplit(const SplitResult& split) {
  json obj = json::object();
  obj["seed"] = split.seed;
  obj["train"] = split.train;
  obj["validation"] = split.validation;
  return obj.dump() + "\n";
}

SplitResult ParseSplit(std::string_view content) {
  json obj = json::parse(content, nullptr, false);
  if (obj.is_discarded() || !obj.is_object() || !obj.contains("train") || !obj.contains("validation")) {
    throw Error(ErrorKind::kMalformedRecord, "split file is not a {seed, train, validation} object");
  }
  SplitResult split;
  try {
    split.seed = obj.value("seed", uint64_t{0});
    split.train = obj["train"].get<std::vector<std::string>>();
    split.validation = obj["validation"].get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kMalformedRecord, std::string("split file: ") + e.what());
  }
  return split;
}

std::map<Sex, std::vector<std::string>> PartitionBySex(const Corpus& corpus) {
  std::map<Sex, std::vector<std::string>> out;
  std::unordered_set<std::string> seen;
  for (const auto& u : corpus.utterances) {
    if (seen.insert(u.speaker_id).second) out[u.sex].push_back(u.speaker_id);
  }
  return out;
}

Corpus Subset(const Corpus& corpus, const std::vector<std::string>& utt_ids) {
  std::unordered_set<std::string> wanted(utt_ids.begin(), utt_ids.end());
  Corpus out;
  out.name = corpus.name;
  for (const auto& u : corpus.utterances) {
    if (wanted.count(u.utt_id)) out.utterances.push_back(u);
  }
  return out;
}

}  // namespace textasv
