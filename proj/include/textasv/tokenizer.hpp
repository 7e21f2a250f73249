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

#ifndef TEXTASV_TOKENIZER_HPP_
#define TEXTASV_TOKENIZER_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "textasv/corpus.hpp"

namespace textasv {

inline constexpr int32_t kPadId = 0;
inline constexpr int32_t kUnkId = 1;
inline constexpr int32_t kClsId = 2;
inline constexpr int32_t kSepId = 3;
inline constexpr int32_t kNumReserved = 4;

class Vocab {
 public:
  Vocab();  // reserved tokens only
  explicit Vocab(std::vector<std::string> tokens);  // tokens[0..3] must be the reserved ones

  size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(int32_t id) const { return tokens_.at(static_cast<size_t>(id)); }
  int32_t Id(std::string_view word) const;  // kUnkId when absent

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int32_t> index_;
};

// Top (max_size - 4) words by training frequency, ties broken
// lexicographically, after the four reserved tokens.
Vocab BuildVocab(std::span<const Utterance> train_utterances, size_t max_size);

// Lowercased alphanumeric runs. Bytes >= 0x80 count as word characters so
// UTF-8 letters stay inside words.
std::vector<std::string> SplitWords(std::string_view text);

struct TokenizedText {
  std::vector<int32_t> ids;
  std::vector<std::string> pieces;  // surface form per position ("[CLS]", words, "[SEP]")
};

// [CLS] w1 ... wk [SEP], truncated to max_seq_len by dropping trailing words.
TokenizedText TokenizeWithPieces(std::string_view text, const Vocab& vocab, size_t max_seq_len);
std::vector<int32_t> Tokenize(std::string_view text, const Vocab& vocab, size_t max_seq_len);

std::string SerializeVocab(const Vocab& vocab);  // NDJSON {"id", "token"}
Vocab ParseVocab(std::string_view content);

}  // namespace textasv

#endif  // TEXTASV_TOKENIZER_HPP_
