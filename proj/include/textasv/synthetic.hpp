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

#ifndef TEXTASV_SYNTHETIC_HPP_
#define TEXTASV_SYNTHETIC_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "textasv/corpus.hpp"

namespace textasv {

// Desk-scale stand-in for a read-speech transcript corpus in which each
// speaker's texts keep returning to a few topic words.
struct SyntheticCorpusSpec {
  size_t num_speakers = 20;
  size_t utterances_per_speaker = 40;
  size_t sessions_per_speaker = 4;
  size_t topic_keywords_per_speaker = 8;
  size_t shared_vocab_size = 500;
  double topical_word_rate = 0.3;  // P(word drawn from the speaker's keywords)
  size_t min_words = 5;
  size_t max_words = 25;
  uint64_t seed = 0;

  void Validate() const;  // throws Error{kInvalidConfig, kVocabTooSmall}
};

struct SyntheticCorpora {
  Corpus topical;
  Corpus control;  // same draws with topical_word_rate = 0
  std::vector<std::vector<std::string>> keywords;  // per speaker, disjoint
};

// Speakers alternate F/M. Keywords are disjoint slices of the shared
// vocabulary. The random stream does not depend on topical_word_rate, so a
// rate of 0 reproduces the control corpus exactly.
SyntheticCorpora GenerateSyntheticCorpus(const SyntheticCorpusSpec& spec);

// Pronounceable pseudo-word for a vocabulary index; distinct indices give
// distinct words.
std::string PseudoWord(size_t index);

}  // namespace textasv

#endif  // TEXTASV_SYNTHETIC_HPP_
