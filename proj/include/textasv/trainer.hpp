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

#ifndef TEXTASV_TRAINER_HPP_
#define TEXTASV_TRAINER_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "textasv/aam.hpp"
#include "textasv/checkpoint.hpp"
#include "textasv/corpus.hpp"
#include "textasv/encoder.hpp"
#include "textasv/parallel.hpp"
#include "textasv/tokenizer.hpp"

namespace textasv {

struct TrainConfig {
  size_t epochs = 20;
  size_t batch_size = 256;
  double base_lr = 1e-4;
  double warmup_fraction = 0.1;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  uint64_t shuffle_seed = 0;
  uint64_t dropout_seed = 0;
  uint64_t init_seed = 0;
  AAMConfig aam;

  void Validate() const;
};

// Linear warmup to base_lr over round(warmup_fraction * total_steps) steps,
// then linear decay to 0 at total_steps.
double LrAt(size_t step, size_t total_steps, const TrainConfig& config);

struct OptimizerState {
  std::vector<Vector> first_moment;
  std::vector<Vector> second_moment;
  uint64_t step = 0;

  static OptimizerState ForShapes(const std::vector<std::span<const double>>& params);
};

// One bias-corrected AdamW update with decoupled weight decay:
//   p <- p - lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * p)
// Throws Error{kShapeMismatch}.
void AdamWStep(const std::vector<std::span<double>>& params,
               const std::vector<std::span<const double>>& grads, OptimizerState& state,
               double lr, const TrainConfig& config);

struct EpochLog {
  size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;

  friend bool operator==(const EpochLog&, const EpochLog&) = default;
};

struct TrainLog {
  std::vector<EpochLog> epochs;
  std::vector<double> step_lr;

  friend bool operator==(const TrainLog&, const TrainLog&) = default;
};

std::string TrainLogCsv(const TrainLog& log);

// One tokenised training example.
struct LabeledSequence {
  std::vector<int32_t> token_ids;
  size_t target = 0;
};

struct BatchGradient {
  double loss_sum = 0.0;
  EncoderParams encoder;
  Matrix classifier;
};

// Mean-loss gradient of one mini-batch. Item i uses dropout seed
// MixSeed(dropout_seed, i). The parallel path sums fixed contiguous chunks in
// chunk order, so its result does not depend on the thread count; it may
// differ from the serial path by rounding only.
BatchGradient ComputeBatchGradient(const Checkpoint& model, std::span<const LabeledSequence> batch,
                                   const AAMConfig& aam, uint64_t dropout_seed, Exec exec);

struct TrainResult {
  TrainLog log;
  std::vector<Checkpoint> checkpoints;  // one per epoch
};

// Throws Error{kTooFewSpeakers, kBatchTooLarge}.
TrainResult Train(const Corpus& corpus, const SplitResult& split, const Vocab& vocab,
                  EncoderConfig encoder_config, const TrainConfig& config,
                  Exec exec = Exec::kParallel);

// Epoch (index into log.epochs) with minimum validation loss; ties go to the
// earliest. Without any finite validation loss the last epoch is chosen.
// Throws Error{kEmptyLog}.
size_t SelectEpoch(const TrainLog& log);
const Checkpoint& SelectCheckpoint(const TrainLog& log, const std::vector<Checkpoint>& checkpoints);

}  // namespace textasv

#endif  // TEXTASV_TRAINER_HPP_
