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

#include "textasv/asv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <unordered_map>

#include "json.hpp"
#include "textasv/error.hpp"
#include "textasv/io.hpp"

namespace textasv {

using nlohmann::json;

namespace {

json SexJson(Sex sex) { return sex == Sex::kUnknown ? json(nullptr) : json(std::string(SexLabel(sex))); }

Sex SexFromJson(const json& obj, size_t line_no) {
  auto it = obj.find("sex");
  if (it == obj.end() || it->is_null()) return Sex::kUnknown;
  if (it->is_string()) {
    if (auto s = ParseSex(it->get<std::string>())) return *s;
  }
  throw Error(ErrorKind::kMalformedRecord, "line " + std::to_string(line_no) + ": bad sex label");
}

Vector VectorFromJson(const json& obj, size_t line_no) {
  auto it = obj.find("vector");
  if (it == obj.end() || !it->is_array()) {
    throw Error(ErrorKind::kMalformedRecord, "line " + std::to_string(line_no) + ": missing vector");
  }
  Vector v;
  v.reserve(it->size());
  for (const auto& x : *it) {
    if (!x.is_number()) throw Error(ErrorKind::kMalformedRecord, "line " + std::to_string(line_no) + ": non-numeric vector entry");
    v.push_back(x.get<double>());
  }
  if (v.empty() || !AllFinite(v)) {
    throw Error(ErrorKind::kMalformedRecord, "line " + std::to_string(line_no) + ": vector must be non-empty and finite");
  }
  return v;
}

std::string StringField(const json& obj, const char* key, size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw Error(ErrorKind::kMalformedRecord, "line " + std::to_string(line_no) + ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

json ParseObjectLine(std::string_view line, size_t line_no) {
  json obj = json::parse(line, nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) {
    throw Error(ErrorKind::kMalformedRecord, "line " + std::to_string(line_no) + ": not a JSON object");
  }
  return obj;
}

}  // namespace

std::string SerializeEmbeddings(std::span<const EmbeddingRecord> records) {
  std::string out;
  for (const auto& r : records) {
    json obj = {{"utt_id", r.utt_id}, {"speaker_id", r.speaker_id}, {"sex", SexJson(r.sex)}, {"vector", r.vector}};
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::vector<EmbeddingRecord> ParseEmbeddings(std::string_view content) {
  std::vector<EmbeddingRecord> records;
  for (auto [line_no, line] : Lines(content)) {
    const json obj = ParseObjectLine(line, line_no);
    EmbeddingRecord r;
    r.utt_id = StringField(obj, "utt_id", line_no);
    r.speaker_id = StringField(obj, "speaker_id", line_no);
    r.sex = SexFromJson(obj, line_no);
    r.vector = VectorFromJson(obj, line_no);
    if (!records.empty() && records.front().vector.size() != r.vector.size()) {
      throw Error(ErrorKind::kDimensionMismatch, "line " + std::to_string(line_no) + ": vector dimension " +
                                                     std::to_string(r.vector.size()) + ", expected " +
                                                     std::to_string(records.front().vector.size()));
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::string SerializeEnrollments(std::span<const EnrollmentModel> models) {
  std::string out;
  for (const auto& m : models) {
    json obj = {{"speaker_id", m.speaker_id},
                {"sex", SexJson(m.sex)},
                {"num_utterances", m.num_utterances},
                {"vector", m.vector}};
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::vector<EnrollmentModel> ParseEnrollments(std::string_view content) {
  std::vector<EnrollmentModel> models;
  for (auto [line_no, line] : Lines(content)) {
    const json obj = ParseObjectLine(line, line_no);
    EnrollmentModel m;
    m.speaker_id = StringField(obj, "speaker_id", line_no);
    m.sex = SexFromJson(obj, line_no);
    m.vector = VectorFromJson(obj, line_no);
    m.num_utterances = obj.value("num_utterances", size_t{1});
    models.push_back(std::move(m));
  }
  return models;
}

std::string ScoresCsv(std::span<const TrialScore> scores) {
  std::string out = "enroll_speaker,trial_utt,trial_speaker,label,score\n";
  for (const auto& s : scores) {
    out += CsvField(s.enroll_speaker_id) + "," + CsvField(s.trial_utt_id) + "," + CsvField(s.trial_speaker_id) + "," +
           (s.label == TrialLabel::kPositive ? "positive" : "negative") + "," + FormatDouble(s.score) + "\n";
  }
  return out;
}

std::vector<TrialScore> ParseScoresCsv(std::string_view content) {
  std::vector<TrialScore> scores;
  bool header = true;
  for (auto [line_no, line] : Lines(content)) {
    auto f = SplitCsvLine(line);
    if (header) {
      header = false;
      if (!f.empty() && f[0] == "enroll_speaker") continue;
    }
    if (f.size() != 5) throw Error(ErrorKind::kMalformedRecord, "scores line " + std::to_string(line_no));
    TrialScore s;
    s.enroll_speaker_id = f[0];
    s.trial_utt_id = f[1];
    s.trial_speaker_id = f[2];
    if (f[3] == "positive" || f[3] == "1" || f[3] == "target") {
      s.label = TrialLabel::kPositive;
    } else if (f[3] == "negative" || f[3] == "0" || f[3] == "nontarget") {
      s.label = TrialLabel::kNegative;
    } else {
      throw Error(ErrorKind::kMalformedRecord, "scores line " + std::to_string(line_no) + ": bad label");
    }
    char* end = nullptr;
    s.score = std::strtod(f[4].c_str(), &end);
    if (end == f[4].c_str() || !std::isfinite(s.score)) {
      throw Error(ErrorKind::kMalformedRecord, "scores line " + std::to_string(line_no) + ": bad score");
    }
    scores.push_back(std::move(s));
  }
  return scores;
}

std::string SpeakerEerCsv(std::span<const SpeakerEER> eers) {
  std::string out = "speaker_id,threshold,eer_percent,clipped_eer_percent,num_pos,num_neg\n";
  for (const auto& e : eers) {
    out += CsvField(e.speaker_id) + "," + FormatDouble(e.threshold) + "," + FormatDouble(e.eer_percent) + "," +
           FormatDouble(ClipEer(e.eer_percent)) + "," + std::to_string(e.num_pos) + "," +
           std::to_string(e.num_neg) + "\n";
  }
  return out;
}

std::vector<SpeakerEER> ParseSpeakerEerCsv(std::string_view content) {
  std::vector<SpeakerEER> out;
  bool header = true;
  for (auto [line_no, line] : Lines(content)) {
    auto f = SplitCsvLine(line);
    if (header) {
      header = false;
      if (!f.empty() && f[0] == "speaker_id") continue;
    }
    if (f.size() < 3) throw Error(ErrorKind::kMalformedRecord, "speaker EER line " + std::to_string(line_no));
    SpeakerEER e;
    e.speaker_id = f[0];
    try {
      e.threshold = std::stod(f[1]);
      e.eer_percent = std::stod(f[2]);
      if (f.size() >= 6) {
        e.num_pos = std::stoul(f[4]);
        e.num_neg = std::stoul(f[5]);
      }
    } catch (const std::exception&) {
      throw Error(ErrorKind::kMalformedRecord, "speaker EER line " + std::to_string(line_no));
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::string SummaryJson(const EvalSummary& summary) {
  json means = json::object();
  json sizes = json::object();
  for (const auto& [sex, mean] : summary.mean_clipped_eer) means[std::string(SexLabel(sex))] = mean;
  for (const auto& [sex, n] : summary.group_sizes) sizes[std::string(SexLabel(sex))] = n;
  json speakers = json::array();
  for (const auto& e : summary.per_speaker) {
    speakers.push_back({{"speaker_id", e.speaker_id},
                        {"threshold", e.threshold},
                        {"eer_percent", e.eer_percent},
                        {"clipped_eer_percent", ClipEer(e.eer_percent)},
                        {"num_pos", e.num_pos},
                        {"num_neg", e.num_neg}});
  }
  json obj = {{"normalize_enrollment", summary.normalize_enrollment},
              {"mean_clipped_eer", means},
              {"num_speakers", sizes},
              {"per_speaker", speakers},
              {"warnings", summary.warnings}};
  return obj.dump(2) + "\n";
}

Vector L2Normalize(std::span<const double> v) {
  const double n = Norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) throw Error(ErrorKind::kZeroVector, "cannot normalise a zero vector");
  Vector out(v.begin(), v.end());
  for (auto& x : out) x /= n;
  return out;
}

EnrollmentModel Enroll(std::span<const EmbeddingRecord> records, bool normalize_utterances) {
  if (records.empty()) throw Error(ErrorKind::kEmptyEnrollment, "no enrollment utterances");
  EnrollmentModel m;
  m.speaker_id = records.front().speaker_id;
  m.sex = records.front().sex;
  m.vector.assign(records.front().vector.size(), 0.0);
  for (const auto& r : records) {
    if (r.speaker_id != m.speaker_id) {
      throw Error(ErrorKind::kMixedSpeakers, m.speaker_id + " and " + r.speaker_id);
    }
    if (r.vector.size() != m.vector.size()) throw Error(ErrorKind::kDimensionMismatch, r.utt_id);
    if (normalize_utterances) {
      Axpy(1.0, L2Normalize(r.vector), m.vector);
    } else {
      Axpy(1.0, r.vector, m.vector);
    }
  }
  m.num_utterances = records.size();
  for (auto& x : m.vector) x /= static_cast<double>(records.size());
  return m;
}

std::vector<EnrollmentModel> EnrollAll(std::span<const EmbeddingRecord> records, bool normalize_utterances) {
  std::map<std::string, std::vector<EmbeddingRecord>> by_speaker;
  for (const auto& r : records) by_speaker[r.speaker_id].push_back(r);
  std::vector<EnrollmentModel> models;
  for (const auto& [speaker, recs] : by_speaker) models.push_back(Enroll(recs, normalize_utterances));
  return models;
}

TrialScore Score(const EnrollmentModel& enrollment, const EmbeddingRecord& trial) {
  if (enrollment.vector.size() != trial.vector.size()) {
    throw Error(ErrorKind::kDimensionMismatch, enrollment.speaker_id + " vs " + trial.utt_id);
  }
  const double ne = Norm(enrollment.vector);
  const double nt = Norm(trial.vector);
  if (!(ne > 0.0)) throw Error(ErrorKind::kZeroVector, "enrollment " + enrollment.speaker_id);
  if (!(nt > 0.0)) throw Error(ErrorKind::kZeroVector, "trial " + trial.utt_id);
  TrialScore s;
  s.enroll_speaker_id = enrollment.speaker_id;
  s.trial_utt_id = trial.utt_id;
  s.trial_speaker_id = trial.speaker_id;
  s.score = std::clamp(Dot(enrollment.vector, trial.vector) / (ne * nt), -1.0, 1.0);
  s.label = enrollment.speaker_id == trial.speaker_id ? TrialLabel::kPositive : TrialLabel::kNegative;
  return s;
}

std::vector<TrialScore> MakeTrials(std::span<const EnrollmentModel> enrollments,
                                   std::span<const EmbeddingRecord> trials, bool same_sex_only, Exec exec) {
  // Output slots are fixed up front, so parallel scoring keeps serial order.
  std::vector<size_t> offset(enrollments.size() + 1, 0);
  for (size_t e = 0; e < enrollments.size(); ++e) {
    size_t count = 0;
    for (const auto& t : trials) count += !same_sex_only || t.sex == enrollments[e].sex;
    offset[e + 1] = offset[e] + count;
  }
  std::vector<TrialScore> scores(offset.back());
  ParallelFor(exec, enrollments.size(), [&](size_t e) {
    size_t k = offset[e];
    for (const auto& t : trials) {
      if (same_sex_only && t.sex != enrollments[e].sex) continue;
      scores[k++] = Score(enrollments[e], t);
    }
  });
  return scores;
}

EerPoint ComputeEer(std::span<const double> positives, std::span<const double> negatives) {
  if (positives.empty()) throw Error(ErrorKind::kNoPositivePairs, "no positive trials");
  if (negatives.empty()) throw Error(ErrorKind::kNoNegativePairs, "no negative trials");
  std::vector<double> pos(positives.begin(), positives.end());
  std::vector<double> neg(negatives.begin(), negatives.end());
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  std::vector<double> values;
  values.reserve(pos.size() + neg.size());
  std::merge(pos.begin(), pos.end(), neg.begin(), neg.end(), std::back_inserter(values));
  values.erase(std::unique(values.begin(), values.end()), values.end());

  const auto num_pos = static_cast<int64_t>(pos.size());
  const auto num_neg = static_cast<int64_t>(neg.size());
  auto edge = [](double v) { return 1e-6 * std::max(1.0, std::abs(v)); };

  // Candidate c sits just below values[c] (c == size: above the maximum).
  // Rejected positives and accepted negatives are compared exactly as
  // integers: |rej/P - acc/N| ordered like |rej*N - acc*P|.
  int64_t best_gap = -1;
  EerPoint best;
  size_t ip = 0;  // positives strictly below the candidate
  size_t in = 0;  // negatives strictly below the candidate
  for (size_t c = 0; c <= values.size(); ++c) {
    if (c > 0) {
      while (ip < pos.size() && pos[ip] <= values[c - 1]) ++ip;
      while (in < neg.size() && neg[in] <= values[c - 1]) ++in;
    }
    const auto rejected = static_cast<int64_t>(ip);
    const auto accepted = num_neg - static_cast<int64_t>(in);
    const int64_t gap = std::llabs(rejected * num_neg - accepted * num_pos);
    if (best_gap < 0 || gap < best_gap) {
      best_gap = gap;
      if (c == 0) {
        best.threshold = values.front() - edge(values.front());
      } else if (c == values.size()) {
        best.threshold = values.back() + edge(values.back());
      } else {
        best.threshold = 0.5 * (values[c - 1] + values[c]);
      }
      best.frr = static_cast<double>(rejected) / static_cast<double>(num_pos);
      best.far = static_cast<double>(accepted) / static_cast<double>(num_neg);
    }
  }
  best.eer_percent = 100.0 * (best.frr + best.far) / 2.0;
  return best;
}

SpeakerEER ComputeSpeakerEer(std::span<const TrialScore> scores) {
  if (scores.empty()) throw Error(ErrorKind::kNoPositivePairs, "no trials");
  std::vector<double> pos;
  std::vector<double> neg;
  const std::string& speaker = scores.front().enroll_speaker_id;
  for (const auto& s : scores) {
    if (s.enroll_speaker_id != speaker) throw Error(ErrorKind::kMixedSpeakers, speaker + " and " + s.enroll_speaker_id);
    (s.label == TrialLabel::kPositive ? pos : neg).push_back(s.score);
  }
  if (pos.empty()) throw Error(ErrorKind::kNoPositivePairs, speaker);
  if (neg.empty()) throw Error(ErrorKind::kNoNegativePairs, speaker);
  const EerPoint p = ComputeEer(pos, neg);
  return {speaker, p.threshold, p.eer_percent, pos.size(), neg.size()};
}

std::vector<SpeakerEER> ComputeSpeakerEers(std::span<const TrialScore> scores, Exec exec) {
  std::map<std::string, std::vector<TrialScore>> by_speaker;
  for (const auto& s : scores) by_speaker[s.enroll_speaker_id].push_back(s);
  std::vector<const std::vector<TrialScore>*> groups;
  for (const auto& [speaker, group] : by_speaker) groups.push_back(&group);
  std::vector<SpeakerEER> out(groups.size());
  ParallelFor(exec, groups.size(), [&](size_t i) { out[i] = ComputeSpeakerEer(*groups[i]); });
  return out;
}

double ClipEer(double eer_percent) {
  if (!(eer_percent >= 0.0 && eer_percent <= 100.0)) {
    throw Error(ErrorKind::kOutOfRange, "EER " + FormatDouble(eer_percent) + " outside [0, 100]");
  }
  return std::min(50.0, eer_percent);
}

EvalSummary Summarize(std::span<const SpeakerEER> per_speaker,
                      const std::map<Sex, std::vector<std::string>>& partition, bool normalize_enrollment) {
  EvalSummary summary;
  summary.normalize_enrollment = normalize_enrollment;
  summary.per_speaker.assign(per_speaker.begin(), per_speaker.end());
  std::sort(summary.per_speaker.begin(), summary.per_speaker.end(),
            [](const SpeakerEER& a, const SpeakerEER& b) { return a.speaker_id < b.speaker_id; });

  std::unordered_map<std::string, Sex> sex_of;
  for (const auto& [sex, speakers] : partition) {
    for (const auto& s : speakers) sex_of.emplace(s, sex);
  }
  std::map<Sex, std::pair<double, size_t>> acc;
  for (const auto& e : summary.per_speaker) {
    auto it = sex_of.find(e.speaker_id);
    const Sex sex = it == sex_of.end() ? Sex::kUnknown : it->second;
    auto& [sum, count] = acc[sex];
    sum += ClipEer(e.eer_percent);
    ++count;
  }
  for (const auto& [sex, speakers] : partition) {
    if (!acc.count(sex)) {
      summary.warnings.push_back("EmptyGroup(" + std::string(SexLabel(sex)) + "): no evaluated speakers");
    }
  }
  for (const auto& [sex, sc] : acc) {
    summary.mean_clipped_eer[sex] = sc.first / static_cast<double>(sc.second);
    summary.group_sizes[sex] = sc.second;
  }
  return summary;
}

std::map<Sex, std::vector<std::string>> PartitionBySex(std::span<const EmbeddingRecord> records) {
  std::map<Sex, std::vector<std::string>> out;
  std::set<std::string> seen;
  for (const auto& r : records) {
    if (seen.insert(r.speaker_id).second) out[r.sex].push_back(r.speaker_id);
  }
  return out;
}

EvalRun Evaluate(std::span<const EmbeddingRecord> enroll_records, std::span<const EmbeddingRecord> trial_records,
                 bool normalize_enrollment, bool same_sex_only, Exec exec) {
  EvalRun run;
  run.enrollments = EnrollAll(enroll_records, normalize_enrollment);
  run.scores = MakeTrials(run.enrollments, trial_records, same_sex_only, exec);
  const auto eers = ComputeSpeakerEers(run.scores, exec);
  run.summary = Summarize(eers, PartitionBySex(enroll_records), normalize_enrollment);
  return run;
}

}  // namespace textasv
