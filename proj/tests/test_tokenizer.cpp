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


#include <string>
#include <vector>

#include "doctest.h"
#include "textasv/error.hpp"
#include "textasv/tokenizer.hpp"

using namespace textasv;

namespace {

std::vector<Utterance> Texts(std::initializer_list<const char*> texts) {
  std::vector<Utterance> out;
  int i = 0;
  for (const char* t : texts) out.push_back({"u" + std::to_string(i++), "s", "s", Sex::kUnknown, t});
  return out;
}

}  // namespace

TEST_CASE("vocab: frequency order, lexicographic ties, reserved prefix") {
  const Vocab v = BuildVocab(Texts({"a a b", "b c"}), 6);
  CHECK(v.tokens() == std::vector<std::string>{"[PAD]", "[UNK]", "[CLS]", "[SEP]", "a", "b"});
  CHECK(v.Id("c") == kUnkId);

  const Vocab wide = BuildVocab(Texts({"a a b", "b c"}), 100);
  CHECK(wide.size() == 7);
  CHECK(wide.token(6) == "c");
}

TEST_CASE("vocab: reserved tokens only") {
  const Vocab v = BuildVocab(Texts({"hello there"}), 4);
  CHECK(v.size() == 4);
  CHECK(Tokenize("hello there", v, 16) == std::vector<int32_t>{kClsId, kUnkId, kUnkId, kSepId});
}

TEST_CASE("vocab: errors, determinism and round trip") {
  CHECK_THROWS_AS(BuildVocab({}, 10), Error);
  CHECK_THROWS_AS(BuildVocab(Texts({"a"}), 3), Error);
  const auto texts = Texts({"the quick brown fox", "the lazy dog", "quick quick"});
  const Vocab v = BuildVocab(texts, 50);
  CHECK(BuildVocab(texts, 50) == v);
  CHECK(ParseVocab(SerializeVocab(v)) == v);
  CHECK_THROWS_AS(ParseVocab(R"({"id":0,"token":"[PAD]"})" "\n" R"({"id":2,"token":"[UNK]"})"), Error);
  CHECK_THROWS_AS(Vocab({"x", "y", "z", "w"}), Error);
}

TEST_CASE("tokenize: lowercase, punctuation splits, CLS/SEP framing") {
  const Vocab v({"[PAD]", "[UNK]", "[CLS]", "[SEP]", "the", "cat"});
  CHECK(Tokenize("The cat.", v, 128) == std::vector<int32_t>{kClsId, 4, 5, kSepId});
  CHECK(Tokenize("xylophone", v, 128) == std::vector<int32_t>{kClsId, kUnkId, kSepId});
  CHECK(Tokenize("", v, 128) == std::vector<int32_t>{kClsId, kSepId});
  CHECK(Tokenize("the--cat,,,THE", v, 128) == std::vector<int32_t>{kClsId, 4, 5, 4, kSepId});
  CHECK(SplitWords("It's 2 o'clock") == std::vector<std::string>{"it", "s", "2", "o", "clock"});
}

TEST_CASE("tokenize: truncation keeps CLS and SEP") {
  std::string text;
  for (int i = 0; i < 200; ++i) text += "the ";
  const Vocab v({"[PAD]", "[UNK]", "[CLS]", "[SEP]", "the"});
  const auto ids = Tokenize(text, v, 128);
  CHECK(ids.size() == 128);
  CHECK(ids.front() == kClsId);
  CHECK(ids.back() == kSepId);
  const auto pieces = TokenizeWithPieces(text, v, 128);
  CHECK(pieces.pieces.size() == 128);
  CHECK(pieces.pieces.front() == "[CLS]");
  CHECK(pieces.pieces[1] == "the");
}

TEST_CASE("tokenize: pieces keep surface words for OOV") {
  const Vocab v({"[PAD]", "[UNK]", "[CLS]", "[SEP]", "cat"});
  const auto t = TokenizeWithPieces("Cat zebra", v, 16);
  CHECK(t.ids == std::vector<int32_t>{kClsId, 4, kUnkId, kSepId});
  CHECK(t.pieces == std::vector<std::string>{"[CLS]", "cat", "zebra", "[SEP]"});
}
