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

#include "textasv/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "json.hpp"
#include "textasv/error.hpp"
#include "textasv/io.hpp"

namespace textasv {

namespace {

const std::vector<std::string>& ReservedTokens() {
  static const std::vector<std::string> kReserved = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};
  return kReserved;
}

bool IsWordByte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

}  // namespace

Vocab::Vocab() : Vocab(ReservedTokens()) {}

Vocab::Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  const auto& reserved = ReservedTokens();
  if (tokens_.size() < reserved.size() || !std::equal(reserved.begin(), reserved.end(), tokens_.begin())) {
    throw Error(ErrorKind::kInvalidConfig, "vocab must start with [PAD] [UNK] [CLS] [SEP]");
  }
  for (size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int32_t>(i)).second) {
      throw Error(ErrorKind::kInvalidConfig, "duplicate vocab token '" + tokens_[i] + "'");
    }
  }
}

int32_t Vocab::Id(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? kUnkId : it->second;
}

std::vector<std::string> SplitWords(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (unsigned char c : text) {
    if (IsWordByte(c)) {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

Vocab BuildVocab(std::span<const Utterance> train_utterances, size_t max_size) {
  if (train_utterances.empty()) throw Error(ErrorKind::kEmptyTrainingSet, "no training utterances");
  if (max_size < static_cast<size_t>(kNumReserved)) {
    throw Error(ErrorKind::kInvalidConfig, "vocab max_size must be >= 4");
  }
  std::map<std::string, size_t> counts;
  for (const auto& u : train_utterances) {
    for (auto& w : SplitWords(u.text)) ++counts[w];
  }
  // Reserved spellings contain brackets, so no word can collide with them.
  std::vector<std::pair<std::string, size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens = ReservedTokens();
  const size_t slots = max_size - kNumReserved;
  for (size_t i = 0; i < ranked.size() && i < slots; ++i) tokens.push_back(ranked[i].first);
  return Vocab(std::move(tokens));
}

TokenizedText TokenizeWithPieces(std::string_view text, const Vocab& vocab, size_t max_seq_len) {
  if (max_seq_len < 2) throw Error(ErrorKind::kInvalidConfig, "max_seq_len must be >= 2");
  auto words = SplitWords(text);
  if (words.size() > max_seq_len - 2) words.resize(max_seq_len - 2);
  TokenizedText out;
  out.ids.reserve(words.size() + 2);
  out.pieces.reserve(words.size() + 2);
  out.ids.push_back(kClsId);
  out.pieces.push_back(vocab.token(kClsId));
  for (auto& w : words) {
    out.ids.push_back(vocab.Id(w));
    out.pieces.push_back(std::move(w));
  }
  out.ids.push_back(kSepId);
  out.pieces.push_back(vocab.token(kSepId));
  return out;
}

std::vector<int32_t> Tokenize(std::string_view text, const Vocab& vocab, size_t max_seq_len) {
  return TokenizeWithPieces(text, vocab, max_seq_len).ids;
}

std::string SerializeVocab(const Vocab& vocab) {
  std::string out;
  for (size_t i = 0; i < vocab.size(); ++i) {
    nlohmann::json obj = {{"id", i}, {"token", vocab.tokens()[i]}};
    out += obj.dump();
    out += '\n';
  }
  return out;
}

Vocab ParseVocab(std::string_view content) {
  std::vector<std::string> tokens;
  for (auto [line_no, line] : Lines(content)) {
    auto obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object() || !obj.contains("id") || !obj.contains("token") ||
        !obj["id"].is_number_integer() || !obj["token"].is_string()) {
      throw Error(ErrorKind::kMalformedRecord, "vocab line " + std::to_string(line_no));
    }
    if (obj["id"].get<int64_t>() != static_cast<int64_t>(tokens.size())) {
      throw Error(ErrorKind::kMalformedRecord, "vocab ids must be contiguous from 0 (line " +
                                                   std::to_string(line_no) + ")");
    }
    tokens.push_back(obj["token"].get<std::string>());
  }
  return Vocab(std::move(tokens));
}

}  // namespace textasv
