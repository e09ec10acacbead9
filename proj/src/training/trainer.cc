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

#include "spanfield/training/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "spanfield/errors.h"
#include "spanfield/numeric/ops.h"
#include "spanfield/numeric/params.h"
#include "spanfield/random.h"
#include "spanfield/text/pretrain_data.h"
#include "spanfield/text/tokenizer.h"
#include "spanfield/text/windowing.h"

namespace spanfield {
namespace {

// Independent random streams derived from the run seed.
enum Stream : uint64_t {
  kInitStream = 1,
  kPairStream = 2,
  kShuffleStream = 3,
  kMaskStream = 4,
  kDropoutStream = 5,
};

uint64_t StreamSeed(uint64_t seed, Stream stream, uint64_t index) {
  return DeriveSeed(DeriveSeed(seed, stream), index);
}

std::string FormatRecord(int64_t epoch, int64_t step, double loss) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "epoch=%lld step=%lld loss=%.6f", static_cast<long long>(epoch),
                static_cast<long long>(step), loss);
  return buf;
}

class Logger {
 public:
  explicit Logger(const TrainLog& log) : log_(log) {}

  void Step(int64_t epoch, int64_t step, double loss) {
    const std::string line = FormatRecord(epoch, step, loss);
    if (log_.file != nullptr) *log_.file << line << '\n';
    if (log_.console != nullptr && log_.console_every > 0 && step % log_.console_every == 0) {
      *log_.console << line << '\n';
    }
  }

  void Epoch(int64_t epoch, int64_t steps, double mean_loss, const std::string& extra) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "epoch=%lld steps=%lld mean_loss=%.6f",
                  static_cast<long long>(epoch), static_cast<long long>(steps), mean_loss);
    const std::string line = std::string(buf) + extra;
    if (log_.file != nullptr) *log_.file << line << '\n' << std::flush;
    if (log_.console != nullptr) *log_.console << line << '\n' << std::flush;
  }

 private:
  TrainLog log_;
};

void CheckFinite(double loss, int64_t epoch, int64_t batch) {
  if (!std::isfinite(loss)) {
    throw NumericError("loss became non-finite at epoch " + std::to_string(epoch) + " batch " +
                       std::to_string(batch));
  }
}

// Marks tensors whose names start with any prefix as frozen for the lifetime
// of the guard.
class FreezeGuard {
 public:
  FreezeGuard(ParamStore<float>* params, std::initializer_list<const char*> prefixes)
      : params_(params) {
    for (auto& t : params_->tensors()) {
      for (const char* prefix : prefixes) {
        if (t.name.rfind(prefix, 0) == 0 && t.trainable) {
          t.trainable = false;
          frozen_.push_back(&t);
        }
      }
    }
  }
  ~FreezeGuard() {
    for (auto* t : frozen_) t->trainable = true;
  }
  FreezeGuard(const FreezeGuard&) = delete;
  FreezeGuard& operator=(const FreezeGuard&) = delete;

 private:
  ParamStore<float>* params_;
  std::vector<ParamTensor<float>*> frozen_;
};

// Gradients can overflow even when the loss is finite; the error then gains
// the same epoch and batch context as a non-finite loss.
void OptimizerStep(const TrainConfig& config, int64_t step, int64_t total_steps,
                   int64_t epoch, int64_t batch, Model<float>* model) {
  try {
    ClipGradNorm(&model->params(), config.clip_norm);
    AdamOptions adam;
    adam.learning_rate = LearningRateAt(config, step, total_steps);
    AdamUpdate(&model->params(), adam);
  } catch (const NumericError& e) {
    throw NumericError("non-finite update at epoch " + std::to_string(epoch) + " batch " +
                       std::to_string(batch) + ": " + e.what());
  }
}

int64_t CeilDiv(int64_t a, int64_t b) { return (a + b - 1) / b; }

int64_t TotalSteps(const TrainConfig& config, int64_t items) {
  const int64_t total = config.epochs * CeilDiv(items, config.batch_size);
  return config.max_steps >= 0 ? std::min(total, config.max_steps) : total;
}

}  // namespace

std::vector<int64_t> EpochOrder(uint64_t seed, int64_t epoch, int64_t n) {
  Rng shuffle(StreamSeed(seed, kShuffleStream, static_cast<uint64_t>(epoch)));
  return shuffle.Permutation(n);
}

std::string_view StageName(Stage stage) {
  return stage == Stage::kPretrain ? "pretrain" : "finetune";
}

TrainConfig TrainConfig::Defaults(Stage stage) {
  TrainConfig c;
  c.stage = stage;
  c.epochs = stage == Stage::kPretrain ? 5 : 20;
  return c;
}

void TrainConfig::Validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("train config: " + what);
  };
  require(epochs >= 1, "epochs must be >= 1");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(std::isfinite(learning_rate) && learning_rate >= 0.0, "learning_rate must be >= 0");
  require(warmup_fraction >= 0.0 && warmup_fraction <= 1.0, "warmup_fraction must lie in [0, 1]");
  require(clip_norm > 0.0, "clip_norm must be positive");
  if (class_weights) {
    for (double w : *class_weights) require(w > 0.0 && std::isfinite(w), "class weights must be > 0");
  }
}

double LearningRateAt(const TrainConfig& config, int64_t step, int64_t total_steps) {
  if (total_steps <= 0) return 0.0;
  const int64_t warmup = static_cast<int64_t>(std::floor(config.warmup_fraction * total_steps));
  if (step < warmup) {
    return config.learning_rate * static_cast<double>(step + 1) / static_cast<double>(warmup);
  }
  const int64_t remaining = total_steps - warmup;
  if (remaining <= 0) return 0.0;
  return config.learning_rate * static_cast<double>(total_steps - step) /
         static_cast<double>(remaining);
}

Vocab BuildModelVocab(const std::vector<const AnnotatedDocument*>& docs,
                      const std::vector<TagSpec>& schema, int64_t min_count) {
  std::vector<std::vector<Token>> texts;
  texts.reserve(docs.size());
  for (const AnnotatedDocument* doc : docs) texts.push_back(Tokenize(doc->text));
  const Vocab base = Vocab::Build(texts, min_count);
  std::vector<std::string> tokens(base.tokens().begin() + kNumReservedIds, base.tokens().end());
  for (const TagSpec& tag : schema) {
    for (const Token& t : Tokenize(tag.name)) {
      if (!base.Contains(t.text) &&
          std::find(tokens.begin(), tokens.end(), t.text) == tokens.end()) {
        tokens.push_back(t.text);
      }
    }
  }
  return Vocab::FromTokens(tokens);
}

SentenceCorpus EncodeSentences(const std::vector<const AnnotatedDocument*>& docs,
                               const Vocab& vocab) {
  SentenceCorpus corpus;
  corpus.reserve(docs.size());
  for (const AnnotatedDocument* doc : docs) {
    const Utf8Text text(doc->text);
    std::vector<std::vector<int32_t>> sentences;
    for (const CharRange& range : doc->sentences) {
      const std::string sentence = text.Substr(range);
      sentences.push_back(vocab.Encode(Tokenize(sentence)));
    }
    corpus.push_back(std::move(sentences));
  }
  return corpus;
}

std::vector<PackedWindow> BuildSpanWindows(const std::vector<const AnnotatedDocument*>& docs,
                                           const std::vector<TagSpec>& schema, const Vocab& vocab,
                                           int64_t window_length) {
  std::vector<PackedWindow> out;
  for (const AnnotatedDocument* doc : docs) {
    const std::vector<Token> tokens = Tokenize(doc->text);
    const std::vector<int32_t> ids = vocab.Encode(tokens);
    for (const TagSpec& tag : schema) {
      const std::vector<int32_t> tag_ids = vocab.Encode(Tokenize(tag.name));
      const int64_t capacity = WindowCapacity(window_length, static_cast<int64_t>(tag_ids.size()));
      std::vector<PackedWindow> windows = WindowDocument(ids, tag_ids, window_length, capacity);
      std::optional<CharRange> gold;
      const auto it = doc->gold.find(tag.tag_id);
      if (it != doc->gold.end() && it->second) gold = it->second->span;
      AlignLabels(&windows, gold, tokens, doc->doc_id, tag.tag_id);
      for (auto& w : windows) out.push_back(std::move(w));
    }
  }
  return out;
}

TrainResult Pretrain(const SentenceCorpus& sentences, const TrainConfig& config,
                     Model<float>* model, const TrainHooks& hooks) {
  config.Validate();
  const ModelConfig& mc = model->config();
  const int32_t vocab_size = static_cast<int32_t>(mc.vocab_size);
  Logger logger(hooks.log);
  FreezeGuard freeze(&model->params(), {"span."});
  model->params().ZeroGrad();

  // The number of pairs is fixed by the corpus shape; probe it once.
  const int64_t pairs_per_epoch = static_cast<int64_t>(
      MakeNspPairs(sentences, StreamSeed(config.seed, kPairStream, 0)).size());
  const int64_t total_steps = TotalSteps(config, pairs_per_epoch);
  TrainResult result;
  int64_t step = 0;
  for (int64_t epoch = 1; epoch <= config.epochs && step < total_steps; ++epoch) {
    const std::vector<SentencePair> pairs =
        MakeNspPairs(sentences, StreamSeed(config.seed, kPairStream, epoch - 1));
    const std::vector<int64_t> order =
        EpochOrder(config.seed, epoch - 1, static_cast<int64_t>(pairs.size()));
    double loss_sum = 0.0;
    int64_t batches = 0, correct = 0, seen = 0;
    for (int64_t begin = 0; begin < pairs_per_epoch && step < total_steps;
         begin += config.batch_size, ++batches) {
      const int64_t end = std::min(pairs_per_epoch, begin + config.batch_size);
      std::vector<PackedWindow> windows;
      std::vector<std::vector<int32_t>> targets;
      std::vector<int32_t> nsp_targets;
      int64_t length = 0;
      for (int64_t i = begin; i < end; ++i) {
        const SentencePair& pair = pairs[order[i]];
        PackedWindow w = PackPair(pair, mc.window_length);
        if (config.mlm_enabled) {
          const uint64_t mask_seed = StreamSeed(config.seed, kMaskStream,
                                                static_cast<uint64_t>(step * config.batch_size + i - begin));
          MaskedWindow masked = MaskTokens(w, vocab_size, mask_seed);
          w = std::move(masked.window);
          targets.push_back(std::move(masked.targets));
        }
        length = std::max(length, w.length());
        nsp_targets.push_back(pair.is_next ? 1 : 0);
        windows.push_back(std::move(w));
      }
      std::vector<const PackedWindow*> ptrs;
      for (auto& w : windows) {
        PadWindow(&w, length);
        ptrs.push_back(&w);
      }
      const InputBatch batch = InputBatch::FromWindows(ptrs);
      Tape<float> tape(model, batch,
                       ForwardOptions{true, StreamSeed(config.seed, kDropoutStream, step)});

      const NumArray<float> nsp_logits = tape.NspLogits();
      NumArray<float> dnsp(nsp_logits.shape());
      double loss = CrossEntropyLoss(nsp_logits, nsp_targets, {}, std::nullopt, &dnsp);
      for (size_t b = 0; b < nsp_targets.size(); ++b) {
        const bool says_next = nsp_logits.at({static_cast<int64_t>(b), 1}) >
                               nsp_logits.at({static_cast<int64_t>(b), 0});
        correct += (says_next == (nsp_targets[b] == 1)) ? 1 : 0;
        ++seen;
      }
      tape.BackwardNsp(dnsp);

      if (config.mlm_enabled) {
        std::vector<int64_t> positions;
        std::vector<int32_t> mlm_targets;
        for (size_t b = 0; b < targets.size(); ++b) {
          for (size_t t = 0; t < targets[b].size(); ++t) {
            if (targets[b][t] == kIgnoreLabel) continue;
            positions.push_back(static_cast<int64_t>(b) * length + static_cast<int64_t>(t));
            mlm_targets.push_back(targets[b][t]);
          }
        }
        if (!positions.empty()) {
          const NumArray<float> mlm_logits = tape.MlmLogits(positions);
          NumArray<float> dmlm(mlm_logits.shape());
          loss += CrossEntropyLoss(mlm_logits, mlm_targets, {}, std::nullopt, &dmlm);
          tape.BackwardMlm(dmlm);
        }
      }
      CheckFinite(loss, epoch, batches + 1);
      tape.Backward();
      OptimizerStep(config, step, total_steps, epoch, batches + 1, model);
      ++step;
      result.step_losses.push_back(loss);
      loss_sum += loss;
      logger.Step(epoch, step, loss);
    }
    const double mean = batches > 0 ? loss_sum / static_cast<double>(batches) : 0.0;
    const double accuracy = seen > 0 ? static_cast<double>(correct) / static_cast<double>(seen) : 0.0;
    result.epoch_losses.push_back(mean);
    result.nsp_accuracy.push_back(accuracy);
    result.steps = step;
    char extra[48];
    std::snprintf(extra, sizeof(extra), " nsp_accuracy=%.4f", accuracy);
    logger.Epoch(epoch, step, mean, extra);
    if (hooks.on_epoch_end) hooks.on_epoch_end(epoch, result);
  }
  return result;
}

TrainResult Finetune(const std::vector<PackedWindow>& windows, const TrainConfig& config,
                     Model<float>* model, const TrainHooks& hooks) {
  config.Validate();
  if (windows.empty()) throw DataError("fine-tuning needs at least one labeled window");
  Logger logger(hooks.log);
  FreezeGuard freeze(&model->params(), {"nsp.", "mlm."});
  model->params().ZeroGrad();
  std::vector<float> class_weights;
  if (config.class_weights) {
    for (double w : *config.class_weights) class_weights.push_back(static_cast<float>(w));
  }

  const int64_t n = static_cast<int64_t>(windows.size());
  const int64_t total_steps = TotalSteps(config, n);
  TrainResult result;
  int64_t step = 0;
  for (int64_t epoch = 1; epoch <= config.epochs && step < total_steps; ++epoch) {
    const std::vector<int64_t> order = EpochOrder(config.seed, epoch - 1, n);
    double loss_sum = 0.0;
    int64_t batches = 0;
    for (int64_t begin = 0; begin < n && step < total_steps; begin += config.batch_size, ++batches) {
      const int64_t end = std::min(n, begin + config.batch_size);
      std::vector<const PackedWindow*> ptrs;
      std::vector<int32_t> labels;
      for (int64_t i = begin; i < end; ++i) {
        const PackedWindow& w = windows[order[i]];
        ptrs.push_back(&w);
        labels.insert(labels.end(), w.labels.begin(), w.labels.end());
      }
      const InputBatch batch = InputBatch::FromWindows(ptrs);
      Tape<float> tape(model, batch,
                       ForwardOptions{true, StreamSeed(config.seed, kDropoutStream, step)});
      const NumArray<float> logits = tape.SpanLogits();
      NumArray<float> dlogits;
      const double loss = SpanLoss(logits, labels, std::span<const float>(class_weights), &dlogits);
      CheckFinite(loss, epoch, batches + 1);
      tape.BackwardSpan(dlogits);
      tape.Backward();
      OptimizerStep(config, step, total_steps, epoch, batches + 1, model);
      ++step;
      result.step_losses.push_back(loss);
      loss_sum += loss;
      logger.Step(epoch, step, loss);
    }
    const double mean = batches > 0 ? loss_sum / static_cast<double>(batches) : 0.0;
    result.epoch_losses.push_back(mean);
    result.steps = step;
    logger.Epoch(epoch, step, mean, "");
    if (hooks.on_epoch_end) hooks.on_epoch_end(epoch, result);
  }
  return result;
}

Checkpoint RunPretraining(const std::vector<const AnnotatedDocument*>& docs,
                          const std::vector<TagSpec>& schema, ModelConfig model_config,
                          const TrainConfig& config, const TrainHooks& hooks,
                          TrainResult* result) {
  const Vocab vocab = BuildModelVocab(docs, schema);
  model_config.vocab_size = vocab.size();
  Model<float> model(model_config);
  model.InitializeWeights(StreamSeed(config.seed, kInitStream, 0));
  TrainResult r = Pretrain(EncodeSentences(docs, vocab), config, &model, hooks);
  CheckpointMeta meta;
  meta.stage = std::string(StageName(Stage::kPretrain));
  meta.epoch = static_cast<int64_t>(r.epoch_losses.size());
  meta.seed = config.seed;
  meta.epoch_losses = r.epoch_losses;
  meta.step_losses = r.step_losses;
  meta.vocab = vocab.tokens();
  if (result != nullptr) *result = std::move(r);
  return MakeCheckpoint(model, meta, false);
}

Checkpoint RunFinetune(const std::vector<const AnnotatedDocument*>& docs,
                       const std::vector<TagSpec>& schema, const Checkpoint* init,
                       ModelConfig model_config, const TrainConfig& config,
                       const TrainHooks& hooks,
                       const std::function<void(const Checkpoint&)>& on_checkpoint,
                       TrainResult* result) {
  const Vocab vocab = BuildModelVocab(docs, schema);
  model_config.vocab_size = vocab.size();
  if (init != nullptr) {
    if (init->meta.vocab != vocab.tokens()) {
      throw DataError("checkpoint incompatible: its vocabulary has " +
                      std::to_string(init->meta.vocab.size()) + " tokens, the corpus yields " +
                      std::to_string(vocab.size()) + " different ones");
    }
    CheckCompatible(init->config, model_config, /*encoder_only=*/true);
  }
  Model<float> model(model_config);
  model.InitializeWeights(StreamSeed(config.seed, kInitStream, 0));
  if (init != nullptr) {
    RestoreParameters(*init, RestoreScope::kEncoderAndPretrainHeads, false, &model);
  }
  const std::vector<PackedWindow> windows =
      BuildSpanWindows(docs, schema, vocab, model_config.window_length);

  auto make_meta = [&](const TrainResult& r) {
    CheckpointMeta meta;
    meta.stage = std::string(StageName(Stage::kFinetune));
    meta.epoch = static_cast<int64_t>(r.epoch_losses.size());
    meta.seed = config.seed;
    meta.epoch_losses = r.epoch_losses;
    meta.step_losses = r.step_losses;
    meta.vocab = vocab.tokens();
    return meta;
  };
  TrainHooks wrapped = hooks;
  wrapped.on_epoch_end = [&](int64_t epoch, const TrainResult& so_far) {
    if (on_checkpoint) on_checkpoint(MakeCheckpoint(model, make_meta(so_far), false));
    if (hooks.on_epoch_end) hooks.on_epoch_end(epoch, so_far);
  };
  TrainResult r = Finetune(windows, config, &model, wrapped);
  Checkpoint out = MakeCheckpoint(model, make_meta(r), false);
  if (result != nullptr) *result = std::move(r);
  return out;
}

Model<float> ModelFromCheckpoint(const Checkpoint& checkpoint) {
  Model<float> model(checkpoint.config);
  RestoreParameters(checkpoint, RestoreScope::kAll, false, &model);
  return model;
}

Vocab CheckpointVocab(const Checkpoint& checkpoint) {
  const std::vector<std::string>& tokens = checkpoint.meta.vocab;
  const Vocab reserved;
  if (tokens.size() < static_cast<size_t>(kNumReservedIds) ||
      !std::equal(reserved.tokens().begin(), reserved.tokens().end(), tokens.begin())) {
    throw DataError("checkpoint vocabulary lacks the reserved tokens");
  }
  Vocab vocab = Vocab::FromTokens(
      std::vector<std::string>(tokens.begin() + kNumReservedIds, tokens.end()));
  if (vocab.size() != checkpoint.config.vocab_size) {
    throw DataError("checkpoint vocabulary has " + std::to_string(vocab.size()) +
                    " tokens but the model expects " + std::to_string(checkpoint.config.vocab_size));
  }
  return vocab;
}

}  // namespace spanfield
