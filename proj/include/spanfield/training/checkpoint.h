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

// Binary checkpoint format (all integers little-endian):
//
//   "SPFG"                      4 magic bytes
//   u32 version                 kCheckpointVersion
//   u32 n, n bytes              model config JSON
//   u32 n, n bytes              metadata JSON
//   u32 count                   number of tensors, then per tensor:
//     u32 n, n bytes            name
//     u32 rank, rank x i64      shape
//     f32 x prod(shape)         row-major values
//
// Adam moments travel as extra tensors named "<param>@adam_m" and
// "<param>@adam_v".

#ifndef SPANFIELD_TRAINING_CHECKPOINT_H_
#define SPANFIELD_TRAINING_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "spanfield/model/config.h"
#include "spanfield/model/model.h"
#include "spanfield/numeric/num_array.h"

namespace spanfield {

inline constexpr uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  std::string stage;  // "init", "pretrain" or "finetune"
  int64_t epoch = 0;
  uint64_t seed = 0;
  int64_t optimizer_steps = 0;
  std::vector<double> epoch_losses;
  std::vector<double> step_losses;
  // Vocabulary in id order, reserved tokens included.
  std::vector<std::string> vocab;

  bool operator==(const CheckpointMeta&) const = default;
};

struct NamedTensor {
  std::string name;
  Shape shape;
  std::vector<float> values;

  bool operator==(const NamedTensor&) const = default;
};

struct Checkpoint {
  ModelConfig config;
  CheckpointMeta meta;
  std::vector<NamedTensor> tensors;

  const NamedTensor* Find(std::string_view name) const;
  bool operator==(const Checkpoint&) const = default;
};

// Snapshot of every parameter (and the Adam moments when requested).
Checkpoint MakeCheckpoint(const Model<float>& model, const CheckpointMeta& meta,
                          bool with_optimizer_state);

enum class RestoreScope {
  kAll,
  // Everything except the span head, which keeps its current values.
  kEncoderAndPretrainHeads,
};

// Copies checkpoint tensors into the model. Every parameter in scope must be
// present with a matching shape (DataError otherwise). Optimizer moments are
// restored only when present and requested.
void RestoreParameters(const Checkpoint& checkpoint, RestoreScope scope, bool with_optimizer_state,
                       Model<float>* model);

// Throws DataError naming the first differing field. With encoder_only the
// span-head fields (conv, mlp, dropout, init) may differ.
void CheckCompatible(const ModelConfig& in_file, const ModelConfig& expected, bool encoder_only);

std::string SerializeCheckpoint(const Checkpoint& checkpoint);
// `source` names the input in error messages. Throws DataError on bad magic,
// unsupported version, truncation or trailing bytes.
Checkpoint ParseCheckpoint(std::string_view bytes, std::string_view source = "checkpoint");

void SaveCheckpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace spanfield

#endif  // SPANFIELD_TRAINING_CHECKPOINT_H_
