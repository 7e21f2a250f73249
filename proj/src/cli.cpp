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


#include "textasv/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "textasv/asv.hpp"
#include "textasv/attrib.hpp"
#include "textasv/checkpoint.hpp"
#include "textasv/corpus.hpp"
#include "textasv/error.hpp"
#include "textasv/io.hpp"
#include "textasv/pipeline.hpp"
#include "textasv/reports.hpp"
#include "textasv/synthetic.hpp"
#include "textasv/tokenizer.hpp"
#include "textasv/trainer.hpp"

namespace textasv {
namespace {

namespace fs = std::filesystem;

// Raised for argument combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  Exec exec = Exec::kParallel;
};

CorpusFormat FormatFor(const std::string& flag, const fs::path& path) {
  if (flag == "tsv") return CorpusFormat::kTsv;
  if (flag == "ndjson") return CorpusFormat::kNdjson;
  return path.extension() == ".tsv" ? CorpusFormat::kTsv : CorpusFormat::kNdjson;
}

CLI::Option* AddOnOff(CLI::App* app, const std::string& name, std::string& value, const std::string& help) {
  return app->add_option(name, value, help)->check(CLI::IsMember({"on", "off"}))->capture_default_str();
}

void PrintSummary(std::ostream& out, const std::string& label, const EvalSummary& summary) {
  for (const auto& [sex, mean] : summary.mean_clipped_eer) {
    out << label << "mean clipped EER " << SexLabel(sex) << ": " << FormatDouble(mean) << "% ("
        << summary.group_sizes.at(sex) << " speakers)\n";
  }
}

void WriteEvalOutputs(const fs::path& dir, const EvalSummary& summary) {
  WriteFile(dir / "speaker_eer.csv", SpeakerEerCsv(summary.per_speaker));
  WriteFile(dir / "summary.json", SummaryJson(summary));
}

std::vector<EmbeddingRecord> LoadEmbeddings(const fs::path& path) { return ParseEmbeddings(ReadFile(path)); }

// Per speaker, in file order: the first ceil(n/2) records enroll, the rest
// are trials. Speakers with a single record cannot be scored and are dropped.
std::pair<std::vector<EmbeddingRecord>, std::vector<EmbeddingRecord>> HalveBySpeaker(
    const std::vector<EmbeddingRecord>& records, std::ostream& err) {
  std::map<std::string, size_t> total;
  for (const auto& r : records) ++total[r.speaker_id];
  std::map<std::string, size_t> seen;
  std::pair<std::vector<EmbeddingRecord>, std::vector<EmbeddingRecord>> out;
  for (const auto& r : records) {
    const size_t n = total[r.speaker_id];
    if (n < 2) continue;
    const size_t k = seen[r.speaker_id]++;
    (k < (n + 1) / 2 ? out.first : out.second).push_back(r);
  }
  for (const auto& [speaker, n] : total) {
    if (n < 2) err << "warning: speaker " << speaker << " has one embedding; skipped\n";
  }
  return out;
}

std::map<std::string, double> Thresholds(const std::vector<SpeakerEER>& eers) {
  std::map<std::string, double> t;
  for (const auto& e : eers) t[e.speaker_id] = e.threshold;
  return t;
}

// ---------------------------------------------------------------------------

void SetupIngest(CLI::App& app, Context& ctx, std::vector<std::pair<CLI::App*, std::function<void()>>>& cmds) {
  struct Opts {
    std::string corpus, format = "auto", out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("ingest", "Validate a corpus and write it as canonical NDJSON");
  sub->add_option("--corpus", o->corpus, "Input corpus (.ndjson or .tsv)")->required()->check(CLI::ExistingFile);
  sub->add_option("--format", o->format, "ndjson, tsv or auto (by extension)")
      ->check(CLI::IsMember({"auto", "ndjson", "tsv"}))
      ->capture_default_str();
  sub->add_option("--out", o->out, "Output directory")->required();
  cmds.emplace_back(sub, [o, &ctx] {
    const Corpus corpus = LoadCorpus(o->corpus, FormatFor(o->format, o->corpus));
    SaveCorpus(corpus, fs::path(o->out) / "corpus.ndjson");
    ctx.out << corpus.utterances.size() << " utterances, " << corpus.SpeakerIds().size() << " speakers\n";
  });
}

void SetupSplit(CLI::App& app, Context& ctx, std::vector<std::pair<CLI::App*, std::function<void()>>>& cmds) {
  struct Opts {
    std::string corpus, out;
    double fraction = 0.1;
    uint64_t seed = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("split", "Speaker/session-diverse train/validation split");
  sub->add_option("--corpus", o->corpus, "Corpus NDJSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--validation-fraction", o->fraction, "Share of each session held out")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  sub->add_option("--seed", o->seed, "Shuffle seed")->capture_default_str();
  sub->add_option("--out", o->out, "Output directory")->required();
  cmds.emplace_back(sub, [o, &ctx] {
    const Corpus corpus = LoadCorpus(o->corpus, FormatFor("auto", o->corpus));
    const SplitResult split = SplitSpkDiverseSess(corpus, o->fraction, o->seed);
    WriteFile(fs::path(o->out) / "split.json", SerializeSplit(split));
    ctx.out << split.train.size() << " train, " << split.validation.size() << " validation\n";
  });
}

void SetupVocab(CLI::App& app, Context& ctx, std::vector<std::pair<CLI::App*, std::function<void()>>>& cmds) {
  struct Opts {
    std::string corpus, split, out;
    size_t max_size = 5000;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("vocab", "Build the word vocabulary from training utterances");
  sub->add_option("--corpus", o->corpus, "Corpus NDJSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--split", o->split, "split.json; only its train ids are counted")->check(CLI::ExistingFile);
  sub->add_option("--max-size", o->max_size, "Vocabulary size including reserved tokens")->capture_default_str();
  sub->add_option("--out", o->out, "Output directory")->required();
  cmds.emplace_back(sub, [o, &ctx] {
    Corpus corpus = LoadCorpus(o->corpus, FormatFor("auto", o->corpus));
    if (!o->split.empty()) corpus = Subset(corpus, ParseSplit(ReadFile(o->split)).train);
    const Vocab vocab = BuildVocab(corpus.utterances, o->max_size);
    WriteFile(fs::path(o->out) / "vocab.ndjson", SerializeVocab(vocab));
    ctx.out << vocab.size() << " tokens\n";
  });
}

void SetupTrain(CLI::App& app, Context& ctx, std::vector<std::pair<CLI::App*, std::function<void()>>>& cmds) {
  struct Opts {
    std::string corpus, split, vocab, out;
    EncoderConfig encoder;
    TrainConfig train;
    uint64_t seed = 0;
    bool keep_epochs = false;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("train", "Train the encoder with the AAM head; keep the min-val-loss epoch");
  sub->add_option("--corpus", o->corpus, "Corpus NDJSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--split", o->split, "split.json")->required()->check(CLI::ExistingFile);
  sub->add_option("--vocab", o->vocab, "vocab.ndjson")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", o->out, "Output directory")->required();

  auto& e = o->encoder;
  sub->add_option("--embed-dim", e.embed_dim)->capture_default_str();
  sub->add_option("--hidden-dim", e.hidden_dim)->capture_default_str();
  sub->add_option("--penult-dim", e.penult_dim)->capture_default_str();
  sub->add_option("--dropout-p", e.dropout_p)->capture_default_str();
  sub->add_option("--max-seq-len", e.max_seq_len)->capture_default_str();

  auto& t = o->train;
  sub->add_option("--epochs", t.epochs)->capture_default_str();
  sub->add_option("--batch-size", t.batch_size)->capture_default_str();
  sub->add_option("--base-lr", t.base_lr)->capture_default_str();
  sub->add_option("--warmup-fraction", t.warmup_fraction)->capture_default_str();
  sub->add_option("--weight-decay", t.weight_decay)->capture_default_str();
  sub->add_option("--beta1", t.beta1)->capture_default_str();
  sub->add_option("--beta2", t.beta2)->capture_default_str();
  sub->add_option("--eps", t.eps)->capture_default_str();
  auto* shuffle = sub->add_option("--shuffle-seed", t.shuffle_seed)->capture_default_str();
  auto* dropout = sub->add_option("--dropout-seed", t.dropout_seed)->capture_default_str();
  auto* init = sub->add_option("--init-seed", t.init_seed)->capture_default_str();
  sub->add_option("--margin", t.aam.margin, "AAM margin (radians)")->capture_default_str();
  sub->add_option("--scale", t.aam.scale, "AAM scale")->capture_default_str();
  auto* seed = sub->add_option("--seed", o->seed, "Sets every seed not given explicitly");
  sub->add_flag("--keep-epochs", o->keep_epochs, "Also write epoch_NNN.ckpt for every epoch");

  cmds.emplace_back(sub, [o, &ctx, shuffle, dropout, init, seed] {
    if (seed->count()) {
      if (!shuffle->count()) o->train.shuffle_seed = o->seed;
      if (!dropout->count()) o->train.dropout_seed = o->seed;
      if (!init->count()) o->train.init_seed = o->seed;
    }
    const Corpus corpus = LoadCorpus(o->corpus, FormatFor("auto", o->corpus));
    const SplitResult split = ParseSplit(ReadFile(o->split));
    const Vocab vocab = ParseVocab(ReadFile(o->vocab));
    const TrainResult result = Train(corpus, split, vocab, o->encoder, o->train, ctx.exec);

    const fs::path dir(o->out);
    WriteFile(dir / "train_log.csv", TrainLogCsv(result.log));
    const size_t best = SelectEpoch(result.log);
    SaveCheckpoint(result.checkpoints[best], dir / "checkpoint.ckpt");
    if (o->keep_epochs) {
      for (size_t i = 0; i < result.checkpoints.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "epoch_%03zu.ckpt", i + 1);
        SaveCheckpoint(result.checkpoints[i], dir / name);
      }
    }
    const auto& log = result.log.epochs[best];
    ctx.out << "selected epoch " << log.epoch << " (val_loss " << FormatDouble(log.val_loss) << ", val_acc "
            << FormatDouble(log.val_acc) << ")\n";
  });
}

void SetupEmbed(CLI::App& app, Context& ctx, std::vector<std::pair<CLI::App*, std::function<void()>>>& cmds) {
  struct Opts {
    std::string checkpoint, vocab, corpus, out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("embed", "Eval-mode utterance embeddings as NDJSON");
  sub->add_option("--checkpoint", o->checkpoint, "Trained checkpoint")->required()->check(CLI::ExistingFile);
  sub->add_option("--vocab", o->vocab, "vocab.ndjson")->required()->check(CLI::ExistingFile);
  sub->add_option("--corpus", o->corpus, "Corpus NDJSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", o->out, "Output directory")->required();
  cmds.emplace_back(sub, [o, &ctx] {
    const Checkpoint model = LoadCheckpoint(o->checkpoint);
    const Vocab vocab = ParseVocab(ReadFile(o->vocab));
    const Corpus corpus = LoadCorpus(o->corpus, FormatFor("auto", o->corpus));
    const auto records = EmbedCorpus(model, vocab, corpus, ctx.exec);
    WriteFile(fs::path(o->out) / "embeddings.ndjson", SerializeEmbeddings(records));
    ctx.out << records.size() << " embeddings of dimension " << model.config.penult_dim << "\n";
  });
}

void SetupEnroll(CLI::App& app, Context& ctx, std::vector<std::pair<CLI::App*, std::function<void()>>>& cmds) {
  struct Opts {
    std::string embeddings, out, normalize = "on";
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("enroll", "Average enrollment embeddings into one model per speaker");
  sub->add_option("--embeddings", o->embeddings, "Enrollment EmbeddingRecord NDJSON")
      ->required()
      ->check(CLI::ExistingFile);
  AddOnOff(sub, "--normalize-enrollment", o->normalize, "Unit-normalize each utterance before averaging");
  sub->add_option("--out", o->out, "Output directory")->required();
  cmds.emplace_back(sub, [o, &ctx] {
    const auto models = EnrollAll(LoadEmbeddings(o->embeddings), o->normalize == "on");
    WriteFile(fs::path(o->out) / "enrollments.ndjson", SerializeEnrollments(models));
    ctx.out << models.size() << " enrollment models\n";
  });
}

void SetupTrial(CLI::App& app, Context& ctx, std::vector<std::pair<CLI::App*, std::function<void()>>>& cmds) {
  struct Opts {
    std::string enrollments, embeddings, out, same_sex = "on";
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("trial", "Cosine-score trial embeddings against enrollment models");
  sub->add_option("--enrollments", o->enrollments, "enrollments.ndjson")->required()->check(CLI::ExistingFile);
  sub->add_option("--embeddings", o->embeddings, "Trial EmbeddingRecord NDJSON")
      ->required()
      ->check(CLI::ExistingFile);
  AddOnOff(sub, "--same-sex-only", o->same_sex, "Pair trials only with enrollments of the same sex");
  sub->add_option("--out", o->out, "Output directory")->required();
  cmds.emplace_back(sub, [o, &ctx] {
    const auto models = ParseEnrollments(ReadFile(o->enrollments));
    const auto scores = MakeTrials(models, LoadEmbeddings(o->embeddings), o->same_sex == "on", ctx.exec);
    WriteFile(fs::path(o->out) / "scores.csv", ScoresCsv(scores));
    ctx.out << scores.size() << " trials\n";
  });
}

void SetupEval(CLI::App& app, Context& ctx, std::vector<std::pair<CLI::App*, std::function<void()>>>& cmds) {
  struct Opts {
    std::string scores, corpus, embeddings, enroll, trial, out;
    std::string normalize = "on", same_sex = "on";
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("eval", "Per-speaker EERs and clipped mean EER per sex group");
  auto* scores = sub->add_option("--scores", o->scores, "Existing scores.csv")->check(CLI::ExistingFile);
  auto* corpus = sub->add_option("--corpus", o->corpus, "Corpus giving speaker sex for --scores")
                     ->check(CLI::ExistingFile);
  auto* emb = sub->add_option("--embeddings", o->embeddings, "One embedding set, halved per speaker")
                  ->check(CLI::ExistingFile);
  auto* enroll = sub->add_option("--enroll-embeddings", o->enroll, "Enrollment embeddings")
                     ->check(CLI::ExistingFile);
  auto* trial = sub->add_option("--trial-embeddings", o->trial, "Trial embeddings")->check(CLI::ExistingFile);
  AddOnOff(sub, "--normalize-enrollment", o->normalize, "Unit-normalize each utterance before averaging");
  AddOnOff(sub, "--same-sex-only", o->same_sex, "Pair trials only with enrollments of the same sex");
  sub->add_option("--out", o->out, "Output directory")->required();
  scores->excludes(emb)->excludes(enroll)->excludes(trial);
  emb->excludes(enroll)->excludes(trial);
  corpus->needs(scores);
  enroll->needs(trial);
  trial->needs(enroll);

  cmds.emplace_back(sub, [o, &ctx] {
    const fs::path dir(o->out);
    const bool normalize = o->normalize == "on";
    EvalSummary summary;
    if (!o->scores.empty()) {
      const auto parsed = ParseScoresCsv(ReadFile(o->scores));
      std::map<Sex, std::vector<std::string>> partition;
      if (!o->corpus.empty()) partition = PartitionBySex(LoadCorpus(o->corpus, FormatFor("auto", o->corpus)));
      summary = Summarize(ComputeSpeakerEers(parsed, ctx.exec), partition, normalize);
    } else {
      std::vector<EmbeddingRecord> enroll_records, trial_records;
      if (!o->embeddings.empty()) {
        std::tie(enroll_records, trial_records) = HalveBySpeaker(LoadEmbeddings(o->embeddings), ctx.err);
      } else if (!o->enroll.empty()) {
        enroll_records = LoadEmbeddings(o->enroll);
        trial_records = LoadEmbeddings(o->trial);
      } else {
        throw UsageError("eval needs --scores, --embeddings, or --enroll-embeddings with --trial-embeddings");
      }
      EvalRun run = Evaluate(enroll_records, trial_records, normalize, o->same_sex == "on", ctx.exec);
      WriteFile(dir / "enrollments.ndjson", SerializeEnrollments(run.enrollments));
      WriteFile(dir / "scores.csv", ScoresCsv(run.scores));
      summary = std::move(run.summary);
    }
    WriteEvalOutputs(dir, summary);
    for (const auto& w : summary.warnings) ctx.err << "warning: " << w << "\n";
    PrintSummary(ctx.out, "", summary);
  });
}

void SetupAttribute(CLI::App& app, Context& ctx, std::vector<std::pair<CLI::App*, std::function<void()>>>& cmds) {
  struct Opts {
    std::string checkpoint, vocab, corpus, enrollments, speaker_eer, out, baseline = "pad";
    std::vector<std::string> utts;
    size_t steps = 50, speakers = 3, per_speaker = 5;
    uint64_t seed = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("attribute", "Integrated-gradients word importance for genuine trials");
  sub->add_option("--checkpoint", o->checkpoint, "Trained checkpoint")->required()->check(CLI::ExistingFile);
  sub->add_option("--vocab", o->vocab, "vocab.ndjson")->required()->check(CLI::ExistingFile);
  sub->add_option("--corpus", o->corpus, "Trial utterances")->required()->check(CLI::ExistingFile);
  sub->add_option("--enrollments", o->enrollments, "enrollments.ndjson")->required()->check(CLI::ExistingFile);
  sub->add_option("--speaker-eer", o->speaker_eer, "speaker_eer.csv (decision thresholds)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--steps", o->steps, "Riemann steps")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--baseline", o->baseline, "pad or zero")
      ->check(CLI::IsMember({"pad", "zero"}))
      ->capture_default_str();
  sub->add_option("--utt", o->utts, "Utterance ids to explain (default: a seeded sample)");
  sub->add_option("--speakers", o->speakers, "Sampled speakers")->capture_default_str();
  sub->add_option("--per-speaker", o->per_speaker, "Sampled utterances per speaker")->capture_default_str();
  sub->add_option("--seed", o->seed, "Sampling seed")->capture_default_str();
  sub->add_option("--out", o->out, "Output directory")->required();
  cmds.emplace_back(sub, [o, &ctx] {
    const Checkpoint model = LoadCheckpoint(o->checkpoint);
    const Vocab vocab = ParseVocab(ReadFile(o->vocab));
    const Corpus corpus = LoadCorpus(o->corpus, FormatFor("auto", o->corpus));
    const auto models = ParseEnrollments(ReadFile(o->enrollments));
    const auto eers = ParseSpeakerEerCsv(ReadFile(o->speaker_eer));

    std::vector<Utterance> picked;
    if (o->utts.empty()) {
      picked = SampleAttributionUtterances(corpus, eers, o->speakers, o->per_speaker, o->seed);
    } else {
      for (const auto& id : o->utts) {
        const Utterance* u = corpus.Find(id);
        if (!u) throw Error(ErrorKind::kMalformedRecord, "utterance " + id + " not in corpus");
        picked.push_back(*u);
      }
    }
    AttributionConfig config;
    config.steps = o->steps;
    config.baseline = o->baseline == "zero" ? Baseline::kZeroEmbedding : Baseline::kPadEmbedding;
    const auto reports =
        AttributeBatch(model.encoder, model.config, vocab, picked, models, Thresholds(eers), config, ctx.exec);
    const fs::path dir(o->out);
    WriteFile(dir / "attributions.ndjson", SerializeReports(reports));
    if (!reports.empty()) {
      WriteFile(dir / "attributions.html", RenderWordImportance(reports, DocumentFormat::kHtml));
    }
    const auto incomplete =
        std::count_if(reports.begin(), reports.end(), [](const AttributionReport& r) { return !r.completeness_ok; });
    if (incomplete) ctx.err << "warning: " << incomplete << " reports miss the completeness tolerance\n";
    ctx.out << reports.size() << " attribution reports\n";
  });
}

void SetupReport(CLI::App& app, Context& ctx, std::vector<std::pair<CLI::App*, std::function<void()>>>& cmds) {
  struct Opts {
    std::string scores, speaker_eer, attributions, format = "html", out;
    std::vector<std::string> radar;
    double bin_width = 0.05;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("report", "Score histograms, EER radar data and word-importance documents");
  auto* scores = sub->add_option("--scores", o->scores, "scores.csv (for hist.json)")->check(CLI::ExistingFile);
  auto* eer = sub->add_option("--speaker-eer", o->speaker_eer, "speaker_eer.csv (for hist.json)")
                  ->check(CLI::ExistingFile);
  sub->add_option("--bin-width", o->bin_width, "Histogram bin width in cosine units")
      ->check(CLI::Range(1e-6, 2.0))
      ->capture_default_str();
  sub->add_option("--radar", o->radar, "NAME=speaker_eer.csv, one per system (for radar.json)");
  sub->add_option("--attributions", o->attributions, "attributions.ndjson")->check(CLI::ExistingFile);
  sub->add_option("--format", o->format, "Word-importance document: html or markdown")
      ->check(CLI::IsMember({"html", "markdown"}))
      ->capture_default_str();
  sub->add_option("--out", o->out, "Output directory")->required();
  scores->needs(eer);
  eer->needs(scores);

  cmds.emplace_back(sub, [o, &ctx] {
    if (o->scores.empty() && o->radar.empty() && o->attributions.empty()) {
      throw UsageError("report needs --scores/--speaker-eer, --radar or --attributions");
    }
    const fs::path dir(o->out);
    if (!o->scores.empty()) {
      const auto scores = ParseScoresCsv(ReadFile(o->scores));
      const auto eers = ParseSpeakerEerCsv(ReadFile(o->speaker_eer));
      WriteFile(dir / "hist.json", HistogramsJson(BuildHistograms(scores, eers, o->bin_width)));
      ctx.out << "wrote hist.json\n";
    }
    if (!o->radar.empty()) {
      std::vector<NamedEers> systems;
      for (const auto& spec : o->radar) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--radar expects NAME=PATH, got " + spec);
        systems.push_back({spec.substr(0, eq), ParseSpeakerEerCsv(ReadFile(spec.substr(eq + 1)))});
      }
      WriteFile(dir / "radar.json", RadarJson(BuildRadar(systems)));
      ctx.out << "wrote radar.json\n";
    }
    if (!o->attributions.empty()) {
      const auto reports = ParseReports(ReadFile(o->attributions));
      if (reports.empty()) throw Error(ErrorKind::kMalformedRecord, "no attribution reports in " + o->attributions);
      const bool html = o->format == "html";
      const char* name = html ? "attributions.html" : "attributions.md";
      WriteFile(dir / name, RenderWordImportance(reports, html ? DocumentFormat::kHtml : DocumentFormat::kMarkdown));
      ctx.out << "wrote " << name << "\n";
    }
  });
}

void SetupSynth(CLI::App& app, Context& ctx, std::vector<std::pair<CLI::App*, std::function<void()>>>& cmds) {
  struct Opts {
    SyntheticCorpusSpec spec;
    std::string out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("synth", "Generate the topical synthetic corpus and its topic-free control");
  auto& s = o->spec;
  sub->add_option("--num-speakers", s.num_speakers)->capture_default_str();
  sub->add_option("--utterances-per-speaker", s.utterances_per_speaker)->capture_default_str();
  sub->add_option("--sessions-per-speaker", s.sessions_per_speaker)->capture_default_str();
  sub->add_option("--topic-keywords-per-speaker", s.topic_keywords_per_speaker)->capture_default_str();
  sub->add_option("--shared-vocab-size", s.shared_vocab_size)->capture_default_str();
  sub->add_option("--topical-word-rate", s.topical_word_rate)->capture_default_str();
  sub->add_option("--min-words", s.min_words)->capture_default_str();
  sub->add_option("--max-words", s.max_words)->capture_default_str();
  sub->add_option("--seed", s.seed)->capture_default_str();
  sub->add_option("--out", o->out, "Output directory")->required();
  cmds.emplace_back(sub, [o, &ctx] {
    const SyntheticCorpora synth = GenerateSyntheticCorpus(o->spec);
    const fs::path dir(o->out);
    SaveCorpus(synth.topical, dir / "corpus.ndjson");
    SaveCorpus(synth.control, dir / "control.ndjson");
    nlohmann::json keywords = nlohmann::json::object();
    const auto speakers = synth.topical.SpeakerIds();
    for (size_t i = 0; i < speakers.size(); ++i) keywords[speakers[i]] = synth.keywords[i];
    WriteFile(dir / "keywords.json", keywords.dump(2) + "\n");
    ctx.out << synth.topical.utterances.size() << " utterances, " << speakers.size() << " speakers\n";
  });
}

void SetupPipeline(CLI::App& app, Context& ctx, std::vector<std::pair<CLI::App*, std::function<void()>>>& cmds) {
  struct Opts {
    std::string config, out;
    std::optional<uint64_t> seed;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("pipeline", "End-to-end experiment from one JSON config");
  sub->add_option("--config", o->config, "Pipeline JSON (defaults: synthetic corpus)")->check(CLI::ExistingFile);
  sub->add_option("--seed", o->seed, "Overrides every seed in the config");
  sub->add_option("--out", o->out, "Output directory")->required();
  cmds.emplace_back(sub, [o, &ctx] {
    PipelineConfig config = o->config.empty() ? PipelineConfig{} : ParsePipelineConfig(ReadFile(o->config));
    if (o->seed) {
      const uint64_t s = *o->seed;
      config.synthetic.seed = config.split_seed = config.attribution_seed = s;
      config.train.shuffle_seed = config.train.dropout_seed = config.train.init_seed = s;
    }
    const PipelineResult result = RunPipeline(config, o->out, ctx.exec);
    const auto report = [&](const ExperimentResult& r) {
      ctx.out << r.name << ": selected epoch " << r.selected_epoch << "\n";
      for (const auto& w : r.eval.summary.warnings) ctx.err << "warning: " << r.name << ": " << w << "\n";
      PrintSummary(ctx.out, r.name + " ", r.eval.summary);
    };
    report(result.main);
    if (result.control) report(*result.control);
  });
}

}  // namespace

int CliMain(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Text-based speaker verification attack and privacy evaluation toolkit", "textasv"};
  app.require_subcommand(1);
  bool serial = false;
  app.add_flag("--serial", serial, "Use the serial reference kernels instead of OpenMP");

  Context ctx{out, err};
  std::vector<std::pair<CLI::App*, std::function<void()>>> cmds;
  SetupIngest(app, ctx, cmds);
  SetupSplit(app, ctx, cmds);
  SetupVocab(app, ctx, cmds);
  SetupTrain(app, ctx, cmds);
  SetupEmbed(app, ctx, cmds);
  SetupEnroll(app, ctx, cmds);
  SetupTrial(app, ctx, cmds);
  SetupEval(app, ctx, cmds);
  SetupAttribute(app, ctx, cmds);
  SetupReport(app, ctx, cmds);
  SetupSynth(app, ctx, cmds);
  SetupPipeline(app, ctx, cmds);

  // Named up front: CLI11 would only report that a subcommand is missing.
  const auto first = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a.empty() || a[0] != '-'; });
  if (first != args.end() && !app.get_subcommand_no_throw(*first)) {
    err << "unknown subcommand: " << *first << "\n" << app.help();
    return kExitUsage;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());  // CLI11 consumes from the back
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kExitUsage;
  }
  ctx.exec = serial ? Exec::kSerial : Exec::kParallel;

  try {
    for (const auto& [sub, run] : cmds) {
      if (sub->parsed()) run();
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return IsNumericError(e.kind()) ? kExitNumeric : kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace textasv
