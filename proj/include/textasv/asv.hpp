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

#ifndef TEXTASV_ASV_HPP_
#define TEXTASV_ASV_HPP_

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "textasv/corpus.hpp"
#include "textasv/matrix.hpp"
#include "textasv/parallel.hpp"

namespace textasv {

struct EmbeddingRecord {
  std::string utt_id;
  std::string speaker_id;
  Sex sex = Sex::kUnknown;
  Vector vector;

  friend bool operator==(const EmbeddingRecord&, const EmbeddingRecord&) = default;
};

// NDJSON {"utt_id", "speaker_id", "sex": "F"|"M"|null, "vector": [...]}.
// Parsing rejects non-finite values and mixed dimensions.
std::string SerializeEmbeddings(std::span<const EmbeddingRecord> records);
std::vector<EmbeddingRecord> ParseEmbeddings(std::string_view content);

struct EnrollmentModel {
  std::string speaker_id;
  Sex sex = Sex::kUnknown;
  Vector vector;
  size_t num_utterances = 0;

  friend bool operator==(const EnrollmentModel&, const EnrollmentModel&) = default;
};

std::string SerializeEnrollments(std::span<const EnrollmentModel> models);
std::vector<EnrollmentModel> ParseEnrollments(std::string_view content);

enum class TrialLabel { kPositive, kNegative };

struct TrialScore {
  std::string enroll_speaker_id;
  std::string trial_utt_id;
  std::string trial_speaker_id;
  double score = 0.0;
  TrialLabel label = TrialLabel::kNegative;

  friend bool operator==(const TrialScore&, const TrialScore&) = default;
};

// CSV with header enroll_speaker,trial_utt,trial_speaker,label,score.
std::string ScoresCsv(std::span<const TrialScore> scores);
std::vector<TrialScore> ParseScoresCsv(std::string_view content);

struct SpeakerEER {
  std::string speaker_id;
  double threshold = 0.0;
  double eer_percent = 0.0;
  size_t num_pos = 0;
  size_t num_neg = 0;

  friend bool operator==(const SpeakerEER&, const SpeakerEER&) = default;
};

std::string SpeakerEerCsv(std::span<const SpeakerEER> eers);
std::vector<SpeakerEER> ParseSpeakerEerCsv(std::string_view content);

struct EvalSummary {
  std::map<Sex, double> mean_clipped_eer;  // only non-empty groups
  std::map<Sex, size_t> group_sizes;
  std::vector<SpeakerEER> per_speaker;  // sorted by speaker id
  bool normalize_enrollment = true;
  std::vector<std::string> warnings;
};

std::string SummaryJson(const EvalSummary& summary);

// Throws Error{kZeroVector}.
Vector L2Normalize(std::span<const double> v);

// Mean of the (optionally unit-normalised) utterance vectors of one speaker.
// Throws Error{kEmptyEnrollment, kMixedSpeakers, kZeroVector,
// kDimensionMismatch}.
EnrollmentModel Enroll(std::span<const EmbeddingRecord> records, bool normalize_utterances);

// One model per speaker, ordered by speaker id.
std::vector<EnrollmentModel> EnrollAll(std::span<const EmbeddingRecord> records, bool normalize_utterances);

// Cosine similarity. Throws Error{kZeroVector, kDimensionMismatch}.
TrialScore Score(const EnrollmentModel& enrollment, const EmbeddingRecord& trial);

// Enrollments x trials, enrollment-major, optionally restricted to pairs with
// matching sex labels.
std::vector<TrialScore> MakeTrials(std::span<const EnrollmentModel> enrollments,
                                   std::span<const EmbeddingRecord> trials, bool same_sex_only,
                                   Exec exec = Exec::kParallel);

struct EerPoint {
  double threshold = 0.0;
  double eer_percent = 0.0;
  double frr = 0.0;
  double far = 0.0;
};

// Threshold sweep over the midpoints of consecutive distinct scores plus one
// point below the minimum and one above the maximum. Accept iff
// score >= threshold. Picks the candidate minimising |FRR - FAR| (smallest
// threshold on ties) and reports 100 * (FRR + FAR) / 2 there.
// Throws Error{kNoPositivePairs, kNoNegativePairs}.
EerPoint ComputeEer(std::span<const double> positives, std::span<const double> negatives);

// All scores must share one enrollment speaker.
SpeakerEER ComputeSpeakerEer(std::span<const TrialScore> scores);

// Per enrollment speaker, ordered by speaker id.
std::vector<SpeakerEER> ComputeSpeakerEers(std::span<const TrialScore> scores, Exec exec = Exec::kParallel);

// min(50, x). Throws Error{kOutOfRange} outside [0, 100].
double ClipEer(double eer_percent);

// Mean clipped EER per sex group. Speakers absent from the partition count as
// Unknown; groups without any evaluated speaker are omitted with a warning.
EvalSummary Summarize(std::span<const SpeakerEER> per_speaker,
                      const std::map<Sex, std::vector<std::string>>& partition,
                      bool normalize_enrollment);

// Full protocol from embeddings: enroll, score, per-speaker EER, summary.
struct EvalRun {
  std::vector<EnrollmentModel> enrollments;
  std::vector<TrialScore> scores;
  EvalSummary summary;
};

EvalRun Evaluate(std::span<const EmbeddingRecord> enroll_records,
                 std::span<const EmbeddingRecord> trial_records, bool normalize_enrollment,
                 bool same_sex_only, Exec exec = Exec::kParallel);

// Sex partition recovered from embedding records.
std::map<Sex, std::vector<std::string>> PartitionBySex(std::span<const EmbeddingRecord> records);

}  // namespace textasv

#endif  // TEXTASV_ASV_HPP_
