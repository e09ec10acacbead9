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

#include "spanfield/training/checkpoint.h"

#include <bit>
#include <fstream>
#include <iterator>

#include "json.hpp"
#include "spanfield/errors.h"
#include "spanfield/text/corpus.h"
#include "util/byte_io.h"

namespace spanfield {
namespace {

using Json = nlohmann::ordered_json;
using internal::PutBytes;
using internal::PutU32;
using internal::PutU64;
using internal::Reader;

constexpr char kMagic[4] = {'S', 'P', 'F', 'G'};
constexpr const char* kAdamM = "@adam_m";
constexpr const char* kAdamV = "@adam_v";

Json MetaToJson(const CheckpointMeta& meta) {
  return Json{{"stage", meta.stage},
              {"epoch", meta.epoch},
              {"seed", meta.seed},
              {"optimizer_steps", meta.optimizer_steps},
              {"epoch_losses", meta.epoch_losses},
              {"step_losses", meta.step_losses},
              {"vocab", meta.vocab}};
}

CheckpointMeta MetaFromJson(const Json& json) {
  CheckpointMeta meta;
  meta.stage = json.at("stage").get<std::string>();
  meta.epoch = json.at("epoch").get<int64_t>();
  meta.seed = json.at("seed").get<uint64_t>();
  meta.optimizer_steps = json.at("optimizer_steps").get<int64_t>();
  meta.epoch_losses = json.at("epoch_losses").get<std::vector<double>>();
  meta.step_losses = json.at("step_losses").get<std::vector<double>>();
  meta.vocab = json.at("vocab").get<std::vector<std::string>>();
  return meta;
}

NamedTensor ToNamed(const std::string& name, const NumArray<float>& a) {
  return NamedTensor{name, a.shape(), a.ToVector()};
}

void CopyInto(const NamedTensor& t, NumArray<float>* dst) {
  if (t.shape != dst->shape()) {
    throw DataError("checkpoint tensor '" + t.name + "' has shape " + ShapeToString(t.shape) +
                    ", model expects " + ShapeToString(dst->shape()));
  }
  std::copy(t.values.begin(), t.values.end(), dst->data());
}

}  // namespace

const NamedTensor* Checkpoint::Find(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

Checkpoint MakeCheckpoint(const Model<float>& model, const CheckpointMeta& meta,
                          bool with_optimizer_state) {
  Checkpoint ckpt;
  ckpt.config = model.config();
  ckpt.meta = meta;
  ckpt.meta.optimizer_steps = model.params().step_count;
  for (const auto& p : model.params().tensors()) ckpt.tensors.push_back(ToNamed(p.name, p.value));
  if (with_optimizer_state) {
    for (const auto& p : model.params().tensors()) {
      ckpt.tensors.push_back(ToNamed(p.name + kAdamM, p.adam_m));
      ckpt.tensors.push_back(ToNamed(p.name + kAdamV, p.adam_v));
    }
  }
  return ckpt;
}

void RestoreParameters(const Checkpoint& checkpoint, RestoreScope scope, bool with_optimizer_state,
                       Model<float>* model) {
  for (auto& p : model->params().tensors()) {
    if (scope == RestoreScope::kEncoderAndPretrainHeads && p.name.rfind("span.", 0) == 0) continue;
    const NamedTensor* t = checkpoint.Find(p.name);
    if (t == nullptr) throw DataError("checkpoint lacks parameter '" + p.name + "'");
    CopyInto(*t, &p.value);
    if (with_optimizer_state) {
      const NamedTensor* m = checkpoint.Find(p.name + kAdamM);
      const NamedTensor* v = checkpoint.Find(p.name + kAdamV);
      if (m != nullptr && v != nullptr) {
        CopyInto(*m, &p.adam_m);
        CopyInto(*v, &p.adam_v);
      }
    }
  }
  if (with_optimizer_state) model->params().step_count = checkpoint.meta.optimizer_steps;
}

void CheckCompatible(const ModelConfig& in_file, const ModelConfig& expected, bool encoder_only) {
  const std::string field = FirstConfigDifference(in_file, expected, encoder_only);
  if (field.empty()) return;
  throw DataError("checkpoint incompatible: field '" + field + "' is " +
                  in_file.ToJson().at(field).dump() + " in the checkpoint but " +
                  expected.ToJson().at(field).dump() + " is required");
}

std::string SerializeCheckpoint(const Checkpoint& checkpoint) {
  std::string out(kMagic, 4);
  PutU32(&out, kCheckpointVersion);
  PutBytes(&out, checkpoint.config.ToJson().dump());
  PutBytes(&out, MetaToJson(checkpoint.meta).dump());
  PutU32(&out, static_cast<uint32_t>(checkpoint.tensors.size()));
  for (const auto& t : checkpoint.tensors) {
    PutBytes(&out, t.name);
    PutU32(&out, static_cast<uint32_t>(t.shape.size()));
    for (int64_t d : t.shape) PutU64(&out, static_cast<uint64_t>(d));
    out.reserve(out.size() + 4 * t.values.size());
    for (float v : t.values) PutU32(&out, std::bit_cast<uint32_t>(v));
  }
  return out;
}

Checkpoint ParseCheckpoint(std::string_view bytes, std::string_view source) {
  Reader r(bytes, source);
  if (r.Take(4, "magic") != std::string_view(kMagic, 4)) r.Fail("bad magic bytes (expected SPFG)");
  const uint32_t version = r.U32("version");
  if (version != kCheckpointVersion) {
    r.Fail("unsupported format version " + std::to_string(version) + " (expected " +
           std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint ckpt;
  try {
    ckpt.config = ModelConfig::FromJson(Json::parse(r.Bytes("config")));
    ckpt.meta = MetaFromJson(Json::parse(r.Bytes("metadata")));
  } catch (const Json::exception& e) {
    r.Fail(std::string("malformed header record: ") + e.what());
  } catch (const DataError& e) {
    r.Fail(e.what());
  }
  const uint32_t count = r.U32("tensor count");
  for (uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = std::string(r.Bytes("tensor name"));
    const uint32_t rank = r.U32("tensor rank");
    if (rank > 8) r.Fail("tensor '" + t.name + "' has implausible rank " + std::to_string(rank));
    uint64_t n = 1;
    for (uint32_t d = 0; d < rank; ++d) {
      const uint64_t dim = r.U64("tensor shape");
      if (dim > (uint64_t{1} << 40) || (dim != 0 && n > (uint64_t{1} << 40) / dim)) {
        r.Fail("tensor '" + t.name + "' has an implausible shape");
      }
      n *= dim;
      t.shape.push_back(static_cast<int64_t>(dim));
    }
    const std::string_view data = r.Take(4 * n, "tensor values");
    t.values.resize(n);
    for (uint64_t k = 0; k < n; ++k) {
      uint32_t bits = 0;
      for (int b = 3; b >= 0; --b) bits = (bits << 8) | static_cast<uint8_t>(data[4 * k + b]);
      t.values[k] = std::bit_cast<float>(bits);
    }
    ckpt.tensors.push_back(std::move(t));
  }
  if (!r.AtEnd()) r.Fail("trailing bytes after byte " + std::to_string(r.position()));
  return ckpt;
}

void SaveCheckpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  WriteTextFile(path, SerializeCheckpoint(checkpoint));
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  return ParseCheckpoint(ReadTextFile(path), path.string());
}

}  // namespace spanfield
