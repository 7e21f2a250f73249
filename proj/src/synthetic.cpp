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

#include "textasv/synthetic.hpp"

#include <cstdio>
#include <numeric>

#include "textasv/error.hpp"
#include "textasv/random.hpp"

namespace textasv {

namespace {

constexpr const char* kConsonants = "bdfgklmnprstvz";
constexpr const char* kVowels = "aeiou";
constexpr size_t kNumSyllables = 14 * 5;
constexpr size_t kWordSpace = kNumSyllables * kNumSyllables * kNumSyllables;
// Coprime with kWordSpace = 2^3 5^3 7^3, so index -> index * kStride is a
// bijection that scatters neighbouring indices.
constexpr size_t kStride = 7919;

std::string Pad(size_t v, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*zu", width, v);
  return buf;
}

}  // namespace

void SyntheticCorpusSpec::Validate() const {
  if (num_speakers < 1 || utterances_per_speaker < 1 || sessions_per_speaker < 1 ||
      topic_keywords_per_speaker < 1 || shared_vocab_size < 1 || min_words < 1 || max_words < min_words) {
    throw Error(ErrorKind::kInvalidConfig, "synthetic corpus counts must be >= 1 and min_words <= max_words");
  }
  if (!(topical_word_rate >= 0.0 && topical_word_rate <= 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "topical_word_rate must lie in [0, 1]");
  }
  if (shared_vocab_size > kWordSpace) throw Error(ErrorKind::kVocabTooSmall, "shared vocabulary exceeds word space");
  if (num_speakers * topic_keywords_per_speaker > shared_vocab_size) {
    throw Error(ErrorKind::kVocabTooSmall, std::to_string(num_speakers) + " speakers x " +
                                               std::to_string(topic_keywords_per_speaker) + " keywords > " +
                                               std::to_string(shared_vocab_size) + " distinct words");
  }
}

std::string PseudoWord(size_t index) {
  size_t code = (index % kWordSpace) * kStride % kWordSpace;
  std::string word;
  for (int s = 0; s < 3; ++s) {
    const size_t syl = code % kNumSyllables;
    code /= kNumSyllables;
    word.push_back(kConsonants[syl / 5]);
    word.push_back(kVowels[syl % 5]);
  }
  return word;
}

SyntheticCorpora GenerateSyntheticCorpus(const SyntheticCorpusSpec& spec) {
  spec.Validate();
  std::vector<std::string> shared(spec.shared_vocab_size);
  for (size_t i = 0; i < shared.size(); ++i) shared[i] = PseudoWord(i);

  Rng keyword_rng(MixSeed(spec.seed, 0));
  std::vector<size_t> perm(shared.size());
  std::iota(perm.begin(), perm.end(), 0);
  keyword_rng.Shuffle(perm);

  SyntheticCorpora out;
  out.topical.name = "synthetic-topical";
  out.control.name = "synthetic-control";
  const size_t k = spec.topic_keywords_per_speaker;
  for (size_t s = 0; s < spec.num_speakers; ++s) {
    std::vector<std::string> kw;
    for (size_t j = 0; j < k; ++j) kw.push_back(shared[perm[s * k + j]]);
    out.keywords.push_back(std::move(kw));
  }

  Rng text_rng(MixSeed(spec.seed, 1));
  for (size_t s = 0; s < spec.num_speakers; ++s) {
    const std::string speaker = "spk" + Pad(s + 1, 2);
    const Sex sex = s % 2 == 0 ? Sex::kFemale : Sex::kMale;
    for (size_t u = 0; u < spec.utterances_per_speaker; ++u) {
      const size_t session = u * spec.sessions_per_speaker / spec.utterances_per_speaker;
      const auto length = static_cast<size_t>(text_rng.Between(static_cast<int64_t>(spec.min_words),
                                                               static_cast<int64_t>(spec.max_words)));
      std::string topical_text;
      std::string control_text;
      for (size_t w = 0; w < length; ++w) {
        const double draw = text_rng.Uniform();
        const auto shared_idx = static_cast<size_t>(text_rng.Index(shared.size()));
        const auto keyword_idx = static_cast<size_t>(text_rng.Index(k));
        const std::string& background = shared[shared_idx];
        const std::string& word = draw < spec.topical_word_rate ? out.keywords[s][keyword_idx] : background;
        if (w > 0) {
          topical_text.push_back(' ');
          control_text.push_back(' ');
        }
        topical_text += word;
        control_text += background;
      }
      Utterance base{speaker + "-" + Pad(session, 1) + "-" + Pad(u, 3), speaker, speaker + "-s" + Pad(session, 1),
                     sex, ""};
      Utterance topical = base;
      topical.text = std::move(topical_text);
      base.text = std::move(control_text);
      out.topical.utterances.push_back(std::move(topical));
      out.control.utterances.push_back(std::move(base));
    }
  }
  return out;
}

}  // namespace textasv
