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

#include "textasv/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "json.hpp"
#include "textasv/error.hpp"
#include "textasv/io.hpp"
#include "textasv/random.hpp"
#include "textasv/reports.hpp"

namespace textasv {

using nlohmann::json;

std::vector<EmbeddingRecord> EmbedCorpus(const Checkpoint& model, const Vocab& vocab, const Corpus& corpus,
                                         Exec exec) {
  if (vocab.size() != model.config.vocab_size) {
    throw Error(ErrorKind::kShapeMismatch, "vocab size " + std::to_string(vocab.size()) + " but checkpoint expects " +
                                               std::to_string(model.config.vocab_size));
  }
  std::vector<EmbeddingRecord> records(corpus.utterances.size());
  ParallelFor(exec, records.size(), [&](size_t i) {
    const auto& u = corpus.utterances[i];
    const auto ids = Tokenize(u.text, vocab, model.config.max_seq_len);
    records[i] = {u.utt_id, u.speaker_id, u.sex, Encode(model.encoder, model.config, ids, EncodeMode::Eval()).embedding};
  });
  return records;
}

HoldoutSplit SplitHoldout(const Corpus& corpus, double eval_fraction, double enroll_fraction) {
  if (!(eval_fraction > 0.0 && eval_fraction < 1.0) || !(enroll_fraction > 0.0 && enroll_fraction < 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "holdout fractions must lie in (0, 1)");
  }
  std::map<std::string, std::vector<size_t>> members;
  for (size_t i = 0; i < corpus.utterances.size(); ++i) members[corpus.utterances[i].speaker_id].push_back(i);

  enum Role { kTrain, kEnroll, kTrial };
  std::vector<Role> role(corpus.utterances.size(), kTrain);
  for (const auto& [speaker, idx] : members) {
    const size_t n = idx.size();
    if (n < 3) continue;
    const auto wanted = static_cast<size_t>(std::ceil(eval_fraction * static_cast<double>(n) - 1e-9));
    const size_t held = std::clamp<size_t>(wanted, 2, n - 1);
    const auto enroll_wanted = static_cast<size_t>(std::ceil(enroll_fraction * static_cast<double>(held) - 1e-9));
    const size_t enroll = std::clamp<size_t>(enroll_wanted, 1, held - 1);
    for (size_t k = n - held; k < n; ++k) role[idx[k]] = k < n - held + enroll ? kEnroll : kTrial;
  }
  HoldoutSplit out;
  out.train.name = corpus.name + "-train";
  out.enroll.name = corpus.name + "-enroll";
  out.trial.name = corpus.name + "-trial";
  for (size_t i = 0; i < corpus.utterances.size(); ++i) {
    Corpus& dst = role[i] == kTrain ? out.train : role[i] == kEnroll ? out.enroll : out.trial;
    dst.utterances.push_back(corpus.utterances[i]);
  }
  return out;
}

namespace {

template <typename T>
void Read(const json& obj, const char* key, T& field) {
  if (obj.is_object() && obj.contains(key) && !obj[key].is_null()) field = obj[key].get<T>();
}

Baseline ParseBaseline(const std::string& s) {
  if (s == "pad" || s == "pad_embedding") return Baseline::kPadEmbedding;
  if (s == "zero" || s == "zero_embedding") return Baseline::kZeroEmbedding;
  throw Error(ErrorKind::kInvalidConfig, "unknown baseline '" + s + "'");
}

}  // namespace

PipelineConfig ParsePipelineConfig(std::string_view json_text) {
  json root = json::parse(json_text, nullptr, false);
  if (root.is_discarded() || !root.is_object()) throw Error(ErrorKind::kMalformedRecord, "pipeline config is not a JSON object");
  PipelineConfig c;
  try {
    if (root.contains("corpus")) {
      const auto& corpus = root["corpus"];
      std::string path;
      Read(corpus, "path", path);
      if (!path.empty()) c.corpus_path = path;
      std::string format = "ndjson";
      Read(corpus, "format", format);
      c.corpus_format = format == "tsv" ? CorpusFormat::kTsv : CorpusFormat::kNdjson;
    }
    if (root.contains("synthetic")) {
      const auto& s = root["synthetic"];
      Read(s, "num_speakers", c.synthetic.num_speakers);
      Read(s, "utterances_per_speaker", c.synthetic.utterances_per_speaker);
      Read(s, "sessions_per_speaker", c.synthetic.sessions_per_speaker);
      Read(s, "topic_keywords_per_speaker", c.synthetic.topic_keywords_per_speaker);
      Read(s, "shared_vocab_size", c.synthetic.shared_vocab_size);
      Read(s, "topical_word_rate", c.synthetic.topical_word_rate);
      Read(s, "min_words", c.synthetic.min_words);
      Read(s, "max_words", c.synthetic.max_words);
      Read(s, "seed", c.synthetic.seed);
    }
    Read(root, "run_control", c.run_control);
    if (root.contains("holdout")) {
      Read(root["holdout"], "eval_fraction", c.eval_fraction);
      Read(root["holdout"], "enroll_fraction", c.enroll_fraction);
    }
    if (root.contains("split")) {
      Read(root["split"], "validation_fraction", c.validation_fraction);
      Read(root["split"], "seed", c.split_seed);
    }
    if (root.contains("vocab")) Read(root["vocab"], "max_size", c.vocab_max_size);
    if (root.contains("encoder")) {
      const auto& e = root["encoder"];
      Read(e, "embed_dim", c.encoder.embed_dim);
      Read(e, "hidden_dim", c.encoder.hidden_dim);
      Read(e, "penult_dim", c.encoder.penult_dim);
      Read(e, "dropout_p", c.encoder.dropout_p);
      Read(e, "max_seq_len", c.encoder.max_seq_len);
    }
    if (root.contains("train")) {
      const auto& t = root["train"];
      Read(t, "epochs", c.train.epochs);
      Read(t, "batch_size", c.train.batch_size);
      Read(t, "base_lr", c.train.base_lr);
      Read(t, "warmup_fraction", c.train.warmup_fraction);
      Read(t, "weight_decay", c.train.weight_decay);
      Read(t, "beta1", c.train.beta1);
      Read(t, "beta2", c.train.beta2);
      Read(t, "eps", c.train.eps);
      Read(t, "shuffle_seed", c.train.shuffle_seed);
      Read(t, "dropout_seed", c.train.dropout_seed);
      Read(t, "init_seed", c.train.init_seed);
      Read(t, "margin", c.train.aam.margin);
      Read(t, "scale", c.train.aam.scale);
    }
    if (root.contains("eval")) {
      Read(root["eval"], "normalize_enrollment", c.normalize_enrollment);
      Read(root["eval"], "same_sex_only", c.same_sex_only);
      Read(root["eval"], "bin_width", c.bin_width);
    }
    if (root.contains("attribution")) {
      const auto& a = root["attribution"];
      Read(a, "steps", c.attribution.steps);
      std::string baseline;
      Read(a, "baseline", baseline);
      if (!baseline.empty()) c.attribution.baseline = ParseBaseline(baseline);
      Read(a, "speakers", c.attribution_speakers);
      Read(a, "utterances_per_speaker", c.attribution_utterances);
      Read(a, "seed", c.attribution_seed);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kMalformedRecord, std::string("pipeline config: ") + e.what());
  }
  return c;
}

std::string PipelineConfigJson(const PipelineConfig& c) {
  json root;
  root["corpus"] = {{"path", c.corpus_path ? json(*c.corpus_path) : json(nullptr)},
                    {"format", c.corpus_format == CorpusFormat::kTsv ? "tsv" : "ndjson"}};
  root["synthetic"] = {{"num_speakers", c.synthetic.num_speakers},
                       {"utterances_per_speaker", c.synthetic.utterances_per_speaker},
                       {"sessions_per_speaker", c.synthetic.sessions_per_speaker},
                       {"topic_keywords_per_speaker", c.synthetic.topic_keywords_per_speaker},
                       {"shared_vocab_size", c.synthetic.shared_vocab_size},
                       {"topical_word_rate", c.synthetic.topical_word_rate},
                       {"min_words", c.synthetic.min_words},
                       {"max_words", c.synthetic.max_words},
                       {"seed", c.synthetic.seed}};
  root["run_control"] = c.run_control;
  root["holdout"] = {{"eval_fraction", c.eval_fraction}, {"enroll_fraction", c.enroll_fraction}};
  root["split"] = {{"validation_fraction", c.validation_fraction}, {"seed", c.split_seed}};
  root["vocab"] = {{"max_size", c.vocab_max_size}};
  root["encoder"] = {{"embed_dim", c.encoder.embed_dim},
                     {"hidden_dim", c.encoder.hidden_dim},
                     {"penult_dim", c.encoder.penult_dim},
                     {"dropout_p", c.encoder.dropout_p},
                     {"max_seq_len", c.encoder.max_seq_len}};
  root["train"] = {{"epochs", c.train.epochs},
                   {"batch_size", c.train.batch_size},
                   {"base_lr", c.train.base_lr},
                   {"warmup_fraction", c.train.warmup_fraction},
                   {"weight_decay", c.train.weight_decay},
                   {"beta1", c.train.beta1},
                   {"beta2", c.train.beta2},
                   {"eps", c.train.eps},
                   {"shuffle_seed", c.train.shuffle_seed},
                   {"dropout_seed", c.train.dropout_seed},
                   {"init_seed", c.train.init_seed},
                   {"margin", c.train.aam.margin},
                   {"scale", c.train.aam.scale}};
  root["eval"] = {{"normalize_enrollment", c.normalize_enrollment},
                  {"same_sex_only", c.same_sex_only},
                  {"bin_width", c.bin_width}};
  root["attribution"] = {{"steps", c.attribution.steps},
                         {"baseline", c.attribution.baseline == Baseline::kPadEmbedding ? "pad" : "zero"},
                         {"speakers", c.attribution_speakers},
                         {"utterances_per_speaker", c.attribution_utterances},
                         {"seed", c.attribution_seed}};
  return root.dump(2) + "\n";
}

std::vector<Utterance> SampleAttributionUtterances(const Corpus& trial, std::span<const SpeakerEER> eers,
                                                   size_t speakers, size_t per_speaker, uint64_t seed) {
  std::vector<std::string> ids;
  for (const auto& e : eers) ids.push_back(e.speaker_id);
  std::sort(ids.begin(), ids.end());
  Rng rng(seed);
  rng.Shuffle(ids);
  if (ids.size() > speakers) ids.resize(speakers);
  std::sort(ids.begin(), ids.end());

  std::vector<Utterance> picked;
  for (const auto& speaker : ids) {
    std::vector<const Utterance*> own;
    for (const auto& u : trial.utterances) {
      if (u.speaker_id == speaker) own.push_back(&u);
    }
    rng.Shuffle(own);
    if (own.size() > per_speaker) own.resize(per_speaker);
    for (const auto* u : own) picked.push_back(*u);
  }
  return picked;
}

namespace {

ExperimentResult RunExperiment(const std::string& name, const Corpus& corpus, const PipelineConfig& c,
                               const std::filesystem::path& dir, Exec exec) {
  ExperimentResult result;
  result.name = name;
  std::filesystem::create_directories(dir);
  SaveCorpus(corpus, dir / "corpus.ndjson");

  const HoldoutSplit holdout = SplitHoldout(corpus, c.eval_fraction, c.enroll_fraction);
  const SplitResult split = SplitSpkDiverseSess(holdout.train, c.validation_fraction, c.split_seed);
  WriteFile(dir / "split.json", SerializeSplit(split));

  const Corpus train_part = Subset(holdout.train, split.train);
  const Vocab vocab = BuildVocab(train_part.utterances, c.vocab_max_size);
  WriteFile(dir / "vocab.ndjson", SerializeVocab(vocab));

  TrainResult trained = Train(holdout.train, split, vocab, c.encoder, c.train, exec);
  result.log = trained.log;
  WriteFile(dir / "train_log.csv", TrainLogCsv(trained.log));
  const size_t best = SelectEpoch(trained.log);
  result.selected_epoch = best + 1;
  const Checkpoint& model = trained.checkpoints[best];
  SaveCheckpoint(model, dir / "checkpoint.ckpt");

  const auto enroll_records = EmbedCorpus(model, vocab, holdout.enroll, exec);
  const auto trial_records = EmbedCorpus(model, vocab, holdout.trial, exec);
  WriteFile(dir / "enroll_embeddings.ndjson", SerializeEmbeddings(enroll_records));
  WriteFile(dir / "trial_embeddings.ndjson", SerializeEmbeddings(trial_records));

  result.eval = Evaluate(enroll_records, trial_records, c.normalize_enrollment, c.same_sex_only, exec);
  WriteFile(dir / "enrollments.ndjson", SerializeEnrollments(result.eval.enrollments));
  WriteFile(dir / "scores.csv", ScoresCsv(result.eval.scores));
  WriteFile(dir / "speaker_eer.csv", SpeakerEerCsv(result.eval.summary.per_speaker));
  WriteFile(dir / "summary.json", SummaryJson(result.eval.summary));
  WriteFile(dir / "hist.json",
            HistogramsJson(BuildHistograms(result.eval.scores, result.eval.summary.per_speaker, c.bin_width)));

  std::map<std::string, double> thresholds;
  for (const auto& e : result.eval.summary.per_speaker) thresholds[e.speaker_id] = e.threshold;
  const auto sample = SampleAttributionUtterances(holdout.trial, result.eval.summary.per_speaker,
                                                  c.attribution_speakers, c.attribution_utterances,
                                                  c.attribution_seed);
  result.attributions = AttributeBatch(model.encoder, model.config, vocab, sample, result.eval.enrollments,
                                       thresholds, c.attribution, exec);
  WriteFile(dir / "attributions.ndjson", SerializeReports(result.attributions));
  WriteFile(dir / "attributions.html", RenderWordImportance(result.attributions, DocumentFormat::kHtml));
  return result;
}

}  // namespace

PipelineResult RunPipeline(const PipelineConfig& config, const std::filesystem::path& out_dir, Exec exec) {
  std::filesystem::create_directories(out_dir);
  WriteFile(out_dir / "pipeline_config.json", PipelineConfigJson(config));

  PipelineResult result;
  std::vector<NamedEers> systems;
  if (config.corpus_path) {
    const Corpus corpus = LoadCorpus(*config.corpus_path, config.corpus_format);
    result.main = RunExperiment("text-attack", corpus, config, out_dir, exec);
  } else {
    const SyntheticCorpora synth = GenerateSyntheticCorpus(config.synthetic);
    result.main = RunExperiment("text-attack", synth.topical, config, out_dir, exec);
    if (config.run_control) {
      result.control = RunExperiment("text-attack-control", synth.control, config, out_dir / "control", exec);
    }
  }
  systems.push_back({result.main.name, result.main.eval.summary.per_speaker});
  if (result.control) systems.push_back({result.control->name, result.control->eval.summary.per_speaker});
  WriteFile(out_dir / "radar.json", RadarJson(BuildRadar(systems)));
  return result;
}

}  // namespace textasv
