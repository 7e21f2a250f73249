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

#include "textasv/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "textasv/error.hpp"
#include "textasv/io.hpp"
#include "textasv/random.hpp"

namespace textasv {

void TrainConfig::Validate() const {
  if (epochs < 1) throw Error(ErrorKind::kInvalidConfig, "epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorKind::kInvalidConfig, "batch_size must be >= 1");
  if (!(base_lr >= 0.0)) throw Error(ErrorKind::kInvalidConfig, "base_lr must be non-negative");
  if (!(warmup_fraction >= 0.0 && warmup_fraction <= 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "warmup_fraction must lie in [0, 1]");
  }
  aam.Validate();
}

double LrAt(size_t step, size_t total_steps, const TrainConfig& config) {
  const auto warmup = static_cast<size_t>(std::llround(config.warmup_fraction * static_cast<double>(total_steps)));
  if (step <= warmup) {
    if (warmup == 0) return config.base_lr;
    return config.base_lr * static_cast<double>(step) / static_cast<double>(warmup);
  }
  if (step >= total_steps) return 0.0;
  return config.base_lr * static_cast<double>(total_steps - step) / static_cast<double>(total_steps - warmup);
}

OptimizerState OptimizerState::ForShapes(const std::vector<std::span<const double>>& params) {
  OptimizerState s;
  for (auto p : params) {
    s.first_moment.emplace_back(p.size(), 0.0);
    s.second_moment.emplace_back(p.size(), 0.0);
  }
  return s;
}

void AdamWStep(const std::vector<std::span<double>>& params,
               const std::vector<std::span<const double>>& grads, OptimizerState& state,
               double lr, const TrainConfig& config) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
      params.size() != state.second_moment.size()) {
    throw Error(ErrorKind::kShapeMismatch, "AdamW tensor count");
  }
  for (size_t t = 0; t < params.size(); ++t) {
    if (params[t].size() != grads[t].size() || params[t].size() != state.first_moment[t].size() ||
        params[t].size() != state.second_moment[t].size()) {
      throw Error(ErrorKind::kShapeMismatch, "AdamW tensor " + std::to_string(t));
    }
  }
  ++state.step;
  const double correction1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (size_t t = 0; t < params.size(); ++t) {
    auto p = params[t];
    auto g = grads[t];
    auto& m = state.first_moment[t];
    auto& v = state.second_moment[t];
    for (size_t i = 0; i < p.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= lr * (m_hat / (std::sqrt(v_hat) + config.eps) + config.weight_decay * p[i]);
    }
  }
}

std::string TrainLogCsv(const TrainLog& log) {
  std::string out = "epoch,train_loss,val_loss,val_acc\n";
  for (const auto& e : log.epochs) {
    out += std::to_string(e.epoch) + "," + FormatDouble(e.train_loss) + "," + FormatDouble(e.val_loss) +
           "," + FormatDouble(e.val_acc) + "\n";
  }
  return out;
}

namespace {

// Fixed chunk count for the parallel batch reduction.
constexpr size_t kGradientChunks = 8;

BatchGradient ZeroGradient(const Checkpoint& model) {
  BatchGradient g;
  g.encoder = EncoderParams::Zeros(model.config);
  g.classifier = Matrix(model.classifier.weight.rows(), model.classifier.weight.cols());
  return g;
}

void AccumulateItems(const Checkpoint& model, std::span<const LabeledSequence> batch, size_t begin,
                     size_t end, double scale, const AAMConfig& aam, uint64_t dropout_seed,
                     BatchGradient& acc) {
  Vector grad_embedding(model.config.penult_dim);
  for (size_t i = begin; i < end; ++i) {
    const auto fwd = Encode(model.encoder, model.config, batch[i].token_ids,
                            EncodeMode::Train(MixSeed(dropout_seed, i)));
    acc.loss_sum += AccumulateAamLossAndGrad(fwd.embedding, model.classifier, batch[i].target, aam, scale,
                                             grad_embedding, acc.classifier);
    AccumulateBackward(fwd.trace, model.encoder, model.config, grad_embedding, &acc.encoder, nullptr);
  }
}

void AddInto(BatchGradient& dst, const BatchGradient& src) {
  dst.loss_sum += src.loss_sum;
  auto d = dst.encoder.Tensors();
  auto s = src.encoder.Tensors();
  for (size_t t = 0; t < d.size(); ++t) Axpy(1.0, s[t], d[t]);
  Axpy(1.0, src.classifier.data(), dst.classifier.data());
}

}  // namespace

BatchGradient ComputeBatchGradient(const Checkpoint& model, std::span<const LabeledSequence> batch,
                                   const AAMConfig& aam, uint64_t dropout_seed, Exec exec) {
  BatchGradient total = ZeroGradient(model);
  if (batch.empty()) return total;
  const double scale = 1.0 / static_cast<double>(batch.size());
  if (exec == Exec::kSerial) {
    AccumulateItems(model, batch, 0, batch.size(), scale, aam, dropout_seed, total);
    return total;
  }
  const size_t chunks = std::min(kGradientChunks, batch.size());
  std::vector<BatchGradient> partial(chunks);
  ParallelFor(Exec::kParallel, chunks, [&](size_t c) {
    partial[c] = ZeroGradient(model);
    const size_t begin = batch.size() * c / chunks;
    const size_t end = batch.size() * (c + 1) / chunks;
    AccumulateItems(model, batch, begin, end, scale, aam, dropout_seed, partial[c]);
  });
  for (const auto& p : partial) AddInto(total, p);
  return total;
}

namespace {

struct EvalMetrics {
  double loss = std::numeric_limits<double>::quiet_NaN();
  double accuracy = std::numeric_limits<double>::quiet_NaN();
};

EvalMetrics Evaluate(const Checkpoint& model, const std::vector<LabeledSequence>& items,
                     const AAMConfig& aam, Exec exec) {
  if (items.empty()) return {};
  std::vector<double> losses(items.size());
  std::vector<int> correct(items.size());
  ParallelFor(exec, items.size(), [&](size_t i) {
    const auto fwd = Encode(model.encoder, model.config, items[i].token_ids, EncodeMode::Eval());
    const auto cos = CosineLogits(fwd.embedding, model.classifier);
    const auto logits = AamLogits(cos, items[i].target, aam);
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (double l : logits) denom += std::exp(l - max_logit);
    losses[i] = max_logit + std::log(denom) - logits[items[i].target];
    correct[i] = static_cast<size_t>(std::max_element(cos.begin(), cos.end()) - cos.begin()) == items[i].target;
  });
  EvalMetrics m;
  double loss_sum = 0.0;
  size_t hits = 0;
  for (size_t i = 0; i < items.size(); ++i) {
    loss_sum += losses[i];
    hits += static_cast<size_t>(correct[i]);
  }
  m.loss = loss_sum / static_cast<double>(items.size());
  m.accuracy = static_cast<double>(hits) / static_cast<double>(items.size());
  return m;
}

}  // namespace

TrainResult Train(const Corpus& corpus, const SplitResult& split, const Vocab& vocab,
                  EncoderConfig encoder_config, const TrainConfig& config, Exec exec) {
  config.Validate();
  encoder_config.vocab_size = vocab.size();
  encoder_config.Validate();

  std::unordered_map<std::string, const Utterance*> by_id;
  for (const auto& u : corpus.utterances) by_id.emplace(u.utt_id, &u);
  auto lookup = [&](const std::string& id) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(ErrorKind::kMalformedRecord, "split names unknown utterance " + id);
    return it->second;
  };

  // Classes are training speakers in order of first appearance.
  std::vector<std::string> classes;
  std::unordered_map<std::string, size_t> class_of;
  for (const auto& id : split.train) {
    const auto* u = lookup(id);
    if (class_of.emplace(u->speaker_id, classes.size()).second) classes.push_back(u->speaker_id);
  }
  if (classes.size() < 2) {
    throw Error(ErrorKind::kTooFewSpeakers, std::to_string(classes.size()) + " training speaker(s)");
  }
  if (config.batch_size > split.train.size()) {
    throw Error(ErrorKind::kBatchTooLarge, "batch size " + std::to_string(config.batch_size) + " exceeds " +
                                               std::to_string(split.train.size()) + " training utterances");
  }

  auto make_items = [&](const std::vector<std::string>& ids) {
    std::vector<LabeledSequence> items;
    for (const auto& id : ids) {
      const auto* u = lookup(id);
      auto cls = class_of.find(u->speaker_id);
      if (cls == class_of.end()) continue;  // validation speaker never seen in training
      items.push_back({Tokenize(u->text, vocab, encoder_config.max_seq_len), cls->second});
    }
    return items;
  };
  const std::vector<LabeledSequence> train_items = make_items(split.train);
  const std::vector<LabeledSequence> val_items = make_items(split.validation);

  Checkpoint model;
  model.config = encoder_config;
  model.encoder = InitEncoderParams(encoder_config, config.init_seed);
  model.classifier = ClassifierWeights::Init(classes.size(), encoder_config.penult_dim,
                                             MixSeed(config.init_seed, 1));
  model.classes = classes;
  model.seed = config.init_seed;

  auto param_views = [&]() {
    auto views = model.encoder.Tensors();
    views.push_back(model.classifier.weight.data());
    return views;
  };
  std::vector<std::span<const double>> const_views;
  for (auto v : param_views()) const_views.emplace_back(v);
  OptimizerState state = OptimizerState::ForShapes(const_views);

  const size_t n = train_items.size();
  const size_t steps_per_epoch = (n + config.batch_size - 1) / config.batch_size;
  const size_t total_steps = steps_per_epoch * config.epochs;

  TrainResult result;
  Rng shuffle_rng(config.shuffle_seed);
  std::vector<size_t> order(n);
  std::vector<LabeledSequence> batch;
  size_t step = 0;
  for (size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (size_t i = 0; i < n; ++i) order[i] = i;
    shuffle_rng.Shuffle(order);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < n; start += config.batch_size) {
      const size_t end = std::min(n, start + config.batch_size);
      batch.clear();
      for (size_t k = start; k < end; ++k) batch.push_back(train_items[order[k]]);
      const BatchGradient grad =
          ComputeBatchGradient(model, batch, config.aam, MixSeed(config.dropout_seed, step), exec);
      epoch_loss += grad.loss_sum;

      std::vector<std::span<const double>> grad_views = grad.encoder.Tensors();
      grad_views.emplace_back(grad.classifier.data());
      const double lr = LrAt(step, total_steps, config);
      AdamWStep(param_views(), grad_views, state, lr, config);
      result.log.step_lr.push_back(lr);
      ++step;
    }
    const EvalMetrics val = Evaluate(model, val_items, config.aam, exec);
    result.log.epochs.push_back({epoch, epoch_loss / static_cast<double>(n), val.loss, val.accuracy});
    model.epoch = static_cast<int>(epoch);
    result.checkpoints.push_back(model);
  }
  return result;
}

size_t SelectEpoch(const TrainLog& log) {
  if (log.epochs.empty()) throw Error(ErrorKind::kEmptyLog, "no completed epochs");
  size_t best = log.epochs.size() - 1;
  double best_loss = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < log.epochs.size(); ++i) {
    const double l = log.epochs[i].val_loss;
    if (std::isfinite(l) && l < best_loss) {
      best_loss = l;
      best = i;
    }
  }
  return best;
}

const Checkpoint& SelectCheckpoint(const TrainLog& log, const std::vector<Checkpoint>& checkpoints) {
  const size_t i = SelectEpoch(log);
  if (i >= checkpoints.size()) throw Error(ErrorKind::kEmptyLog, "checkpoint list shorter than the log");
  return checkpoints[i];
}

}  // namespace textasv
