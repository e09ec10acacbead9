// Copyright 2026 The Spanfield Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Two-stage training: self-supervised pre-training (next-sentence plus
// masked-token prediction) and span fine-tuning.

#ifndef SPANFIELD_TRAINING_TRAINER_H_
#define SPANFIELD_TRAINING_TRAINER_H_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "spanfield/model/model.h"
#include "spanfield/text/corpus.h"
#include "spanfield/text/pretrain_data.h"
#include "spanfield/text/vocab.h"
#include "spanfield/training/checkpoint.h"

namespace spanfield {

enum class Stage { kPretrain, kFinetune };

std::string_view StageName(Stage stage);

struct TrainConfig {
  Stage stage = Stage::kFinetune;
  int64_t epochs = 20;
  int64_t batch_size = 16;
  double learning_rate = 5e-4;
  double warmup_fraction = 0.1;
  uint64_t seed = 0;
  bool mlm_enabled = true;
  double clip_norm = 1.0;
  // Per-class weights for the span loss (IRRELEVANT, START, END).
  std::optional<std::array<double, 3>> class_weights;
  // Stops after this many optimizer steps when >= 0.
  int64_t max_steps = -1;

  // Stage defaults: fine-tuning runs 20 epochs, pre-training 5.
  static TrainConfig Defaults(Stage stage);
  // Throws ConfigError.
  void Validate() const;
};

// Linear warmup over the first warmup_fraction of steps, then linear decay
// towards 0. `step` counts from 0.
double LearningRateAt(const TrainConfig& config, int64_t step, int64_t total_steps);

// Visiting order of `n` training items in the 0-based `epoch`: a permutation
// fixed by the run seed.
std::vector<int64_t> EpochOrder(uint64_t seed, int64_t epoch, int64_t n);

// Receives `epoch=<i> step=<j> loss=<f>` records. Every record goes to
// `file`; `console` gets epoch summaries and every console_every-th step.
struct TrainLog {
  std::ostream* console = nullptr;
  std::ostream* file = nullptr;
  int64_t console_every = 100;
};

struct TrainResult {
  std::vector<double> step_losses;
  std::vector<double> epoch_losses;
  // Pre-training only: next-sentence accuracy over each epoch's batches.
  std::vector<double> nsp_accuracy;
  int64_t steps = 0;
};

struct TrainHooks {
  TrainLog log;
  // Called after each epoch with the 1-based epoch number.
  std::function<void(int64_t epoch, const TrainResult& so_far)> on_epoch_end;
};

// Builds the vocabulary from the training documents (tokens seen at least
// min_count times) plus every token of the tag names.
Vocab BuildModelVocab(const std::vector<const AnnotatedDocument*>& docs,
                      const std::vector<TagSpec>& schema, int64_t min_count = 2);

// Token ids of every sentence of every document.
SentenceCorpus EncodeSentences(const std::vector<const AnnotatedDocument*>& docs,
                               const Vocab& vocab);

// Labeled windows of every (document, tag) pair, document-major then in
// schema order.
std::vector<PackedWindow> BuildSpanWindows(const std::vector<const AnnotatedDocument*>& docs,
                                           const std::vector<TagSpec>& schema, const Vocab& vocab,
                                           int64_t window_length);

// Seeded optimisation loops over an initialized model. Both throw
// NumericError naming the epoch and batch when the loss turns non-finite.
TrainResult Pretrain(const SentenceCorpus& sentences, const TrainConfig& config,
                     Model<float>* model, const TrainHooks& hooks = {});
// The next-sentence and masked-token heads are frozen for the duration.
TrainResult Finetune(const std::vector<PackedWindow>& windows, const TrainConfig& config,
                     Model<float>* model, const TrainHooks& hooks = {});

// Complete stages: vocabulary, initialization, training and the resulting
// checkpoint. `model_config.vocab_size` is filled in from the vocabulary.
Checkpoint RunPretraining(const std::vector<const AnnotatedDocument*>& docs,
                          const std::vector<TagSpec>& schema, ModelConfig model_config,
                          const TrainConfig& config, const TrainHooks& hooks = {},
                          TrainResult* result = nullptr);

// With `init`, the encoder, embeddings and pre-training heads come from the
// checkpoint and the span head is freshly initialized; the checkpoint's
// vocabulary must equal the one built from `docs` and its encoder fields
// must equal `model_config`'s (DataError naming the field otherwise).
// `on_checkpoint` receives a checkpoint after every epoch.
Checkpoint RunFinetune(const std::vector<const AnnotatedDocument*>& docs,
                       const std::vector<TagSpec>& schema, const Checkpoint* init,
                       ModelConfig model_config, const TrainConfig& config,
                       const TrainHooks& hooks = {},
                       const std::function<void(const Checkpoint&)>& on_checkpoint = {},
                       TrainResult* result = nullptr);

// Rebuilds a float model from a checkpoint.
Model<float> ModelFromCheckpoint(const Checkpoint& checkpoint);
// The vocabulary stored in a checkpoint's metadata.
Vocab CheckpointVocab(const Checkpoint& checkpoint);

}  // namespace spanfield

#endif  // SPANFIELD_TRAINING_TRAINER_H_
