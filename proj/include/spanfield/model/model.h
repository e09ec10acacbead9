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

// Transformer encoder with a convolutional span head and the two
// pre-training heads (next-sentence and masked-token prediction).
//
// Parameter names:
//   embeddings.{token,segment,position}, embeddings.ln.{gain,bias}
//   encoder.<i>.attention.{qkv_weight,query_bias,value_bias,out_weight,out_bias}
//   encoder.<i>.attention_ln.{gain,bias}
//   encoder.<i>.ff.{in_weight,in_bias,out_weight,out_bias}, encoder.<i>.ff_ln.{gain,bias}
//   span.conv.{kernels,bias}, span.mlp.{weight,bias}, span.classifier.{weight,bias}
//   nsp.{weight,bias}, mlm.{weight,bias}

#ifndef SPANFIELD_MODEL_MODEL_H_
#define SPANFIELD_MODEL_MODEL_H_

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "spanfield/model/config.h"
#include "spanfield/numeric/num_array.h"
#include "spanfield/numeric/params.h"
#include "spanfield/text/windowing.h"

namespace spanfield {

inline constexpr int64_t kNumSegments = 2;
inline constexpr int64_t kNumSpanClasses = 3;

// Equal-length windows flattened row-major into [batch, length] arrays.
struct InputBatch {
  int64_t batch = 0;
  int64_t length = 0;
  std::vector<int32_t> token_ids;
  std::vector<int32_t> segment_ids;
  std::vector<int32_t> position_ids;
  std::vector<uint8_t> pad_mask;

  // Throws DimensionError when window lengths differ.
  static InputBatch FromWindows(std::span<const PackedWindow* const> windows);
  static InputBatch FromWindow(const PackedWindow& window);
};

struct ForwardOptions {
  bool train = false;  // enables dropout
  uint64_t dropout_seed = 0;
};

// Number of parameters in each top-level group, and the total.
struct ParameterCensus {
  int64_t embeddings = 0;
  int64_t encoder = 0;
  int64_t span_head = 0;
  int64_t nsp_head = 0;
  int64_t mlm_head = 0;
  int64_t total = 0;
};

template <typename T>
class Model {
 public:
  explicit Model(const ModelConfig& config);

  // Truncated-normal weights, zero biases, unit layer-norm gains.
  void InitializeWeights(uint64_t seed);
  // Re-initializes only the span head tensors.
  void InitializeSpanHead(uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ParamStore<T>& params() { return params_; }
  const ParamStore<T>& params() const { return params_; }
  ParameterCensus Census() const;

  // Inference-mode building blocks (no dropout, no caches).
  NumArray<T> Embed(const InputBatch& batch) const;                                // [B,L,H]
  NumArray<T> EncoderForward(const NumArray<T>& embedded,
                             std::span<const uint8_t> pad_mask) const;             // [B,L,H]
  NumArray<T> Encode(const InputBatch& batch) const;                               // [B,L,H]
  NumArray<T> SpanHeadForward(const NumArray<T>& hidden) const;                    // [B,L,3]
  NumArray<T> NspForward(const NumArray<T>& hidden) const;                         // [B,2]
  NumArray<T> MlmForward(const NumArray<T>& hidden) const;                         // [B,L,V]

 private:
  ModelConfig config_;
  ParamStore<T> params_;
};

// One forward pass with every intermediate kept for the backward pass.
// Head backward calls accumulate into the gradient of the encoder output;
// Backward() then pushes it through the encoder and embeddings. All
// gradients accumulate into the model's ParamStore.
template <typename T>
class Tape {
 public:
  Tape(Model<T>* model, const InputBatch& batch, const ForwardOptions& options);
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  const NumArray<T>& hidden() const;

  NumArray<T> SpanLogits();                                       // [B,L,3]
  NumArray<T> NspLogits();                                        // [B,2]
  // Logits for the rows `flat_positions` of the [B*L] position list: [N,V].
  NumArray<T> MlmLogits(std::span<const int64_t> flat_positions);

  void BackwardSpan(const NumArray<T>& dlogits);
  void BackwardNsp(const NumArray<T>& dlogits);
  void BackwardMlm(const NumArray<T>& dlogits);
  void Backward();

 private:
  struct State;
  std::unique_ptr<State> state_;
};

// Mean span cross-entropy over non-ignored positions of logits [B,L,3].
template <typename T>
T SpanLoss(const NumArray<T>& logits, std::span<const int32_t> labels,
           std::span<const T> class_weights = {}, NumArray<T>* dlogits = nullptr);

}  // namespace spanfield

#endif  // SPANFIELD_MODEL_MODEL_H_
