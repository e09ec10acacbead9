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

// Forward and backward kernels for the fixed encoder/head architecture.
//
// Conventions shared by every op in this file:
//  * Forward functions return a freshly allocated output.
//  * Backward functions ACCUMULATE (+=) into the gradient arrays they are
//    given, which must already have the right shape. A null gradient pointer
//    means "not needed" and skips that computation.
//  * Masks are byte arrays where a nonzero entry means "excluded"
//    (padding for attention, masked-out logit for softmax).

#ifndef SPANFIELD_NUMERIC_OPS_H_
#define SPANFIELD_NUMERIC_OPS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "spanfield/numeric/num_array.h"

namespace spanfield {

// ---------------------------------------------------------------- linear ---

// out[..., o] = sum_i x[..., i] * w[i, o] + b[o]. Leading axes of x are
// treated as a flat list of rows.
template <typename T>
NumArray<T> LinearForward(const NumArray<T>& x, const NumArray<T>& w, const NumArray<T>& b);

template <typename T>
void LinearBackward(const NumArray<T>& x, const NumArray<T>& w, const NumArray<T>& dout,
                    NumArray<T>* dx, NumArray<T>* dw, NumArray<T>* db);

// ------------------------------------------------------------ layer norm ---

template <typename T>
struct LayerNormCache {
  NumArray<T> normalized;   // (x - mean) * inv_std, same shape as x
  std::vector<T> inv_std;   // one per last-axis slice
};

// Normalizes every last-axis slice with the biased (1/H) variance.
template <typename T>
NumArray<T> LayerNormForward(const NumArray<T>& x, const NumArray<T>& gain, const NumArray<T>& bias,
                             T eps, LayerNormCache<T>* cache = nullptr);

template <typename T>
void LayerNormBackward(const LayerNormCache<T>& cache, const NumArray<T>& gain,
                       const NumArray<T>& dy, NumArray<T>* dx, NumArray<T>* dgain,
                       NumArray<T>* dbias);

// --------------------------------------------------------------- softmax ---

// Softmax over the last axis in max-shifted form. `masked` is either empty or
// has one byte per element of x; masked entries come out exactly 0.
template <typename T>
NumArray<T> SoftmaxForward(const NumArray<T>& x, std::span<const uint8_t> masked = {});

// dx += J^T dy where J is the softmax Jacobian at output y.
template <typename T>
void SoftmaxBackward(const NumArray<T>& y, const NumArray<T>& dy, NumArray<T>* dx);

// ------------------------------------------------------------- attention ---

// There is no key bias: adding a constant vector to every key shifts each
// query's scores uniformly, which softmax ignores, so it could never learn.
template <typename T>
struct AttentionWeights {
  const NumArray<T>& qkv_weight;  // [H, 3H], columns ordered q | k | v
  const NumArray<T>& query_bias;  // [H]
  const NumArray<T>& value_bias;  // [H]
  const NumArray<T>& out_weight;  // [H, H]
  const NumArray<T>& out_bias;    // [H]
};

template <typename T>
struct AttentionGrads {
  NumArray<T>* qkv_weight;
  NumArray<T>* query_bias;
  NumArray<T>* value_bias;
  NumArray<T>* out_weight;
  NumArray<T>* out_bias;
};

template <typename T>
struct AttentionCache {
  NumArray<T> input;    // [B, T, H]
  NumArray<T> qkv;      // [B, T, 3H]
  NumArray<T> probs;    // [B, heads, T_key, T_query], key-major
  NumArray<T> context;  // [B, T, H], heads concatenated
  std::vector<uint8_t> pad_mask;
  int heads = 0;
};

// Bidirectional scaled dot-product self-attention. pad_mask is [B, T]; padded
// keys get zero weight. Padded queries still produce (ignorable) outputs.
template <typename T>
NumArray<T> MultiHeadSelfAttention(const NumArray<T>& x, const AttentionWeights<T>& weights,
                                   int heads, std::span<const uint8_t> pad_mask,
                                   AttentionCache<T>* cache = nullptr);

template <typename T>
void MultiHeadSelfAttentionBackward(const AttentionCache<T>& cache,
                                    const AttentionWeights<T>& weights, const NumArray<T>& dout,
                                    NumArray<T>* dx, const AttentionGrads<T>& grads);

// ---------------------------------------------------------------- conv1d ---

// Cross-correlation along T with (W-1)/2 zero padding on each side.
// x [B, T, C_in], kernels [W, C_in, C_out], bias [C_out] -> [B, T, C_out].
template <typename T>
NumArray<T> Conv1dSameForward(const NumArray<T>& x, const NumArray<T>& kernels,
                              const NumArray<T>& bias);

template <typename T>
void Conv1dSameBackward(const NumArray<T>& x, const NumArray<T>& kernels, const NumArray<T>& dout,
                        NumArray<T>* dx, NumArray<T>* dkernels, NumArray<T>* dbias);

// ----------------------------------------------------------- activations ---

// Exact (erf) GELU.
template <typename T>
NumArray<T> GeluForward(const NumArray<T>& x);
template <typename T>
void GeluBackward(const NumArray<T>& x, const NumArray<T>& dy, NumArray<T>* dx);

template <typename T>
NumArray<T> ReluForward(const NumArray<T>& x);
template <typename T>
void ReluBackward(const NumArray<T>& x, const NumArray<T>& dy, NumArray<T>* dx);

// Inverted dropout, in place. Element i is dropped when a hash of (seed, i)
// falls below `rate`; the keep mask is returned for the backward pass.
template <typename T>
std::vector<uint8_t> DropoutInPlace(NumArray<T>* x, double rate, uint64_t seed);
template <typename T>
void DropoutBackwardInPlace(NumArray<T>* dy, std::span<const uint8_t> keep, double rate);

// ------------------------------------------------------------- embedding ---

// Gathers rows of table [V, H]; ids outside [0, V) raise DataError.
template <typename T>
NumArray<T> EmbeddingLookup(const NumArray<T>& table, std::span<const int32_t> ids);
template <typename T>
void EmbeddingBackward(std::span<const int32_t> ids, const NumArray<T>& dout, NumArray<T>* dtable);

// ------------------------------------------------------------------ loss ---

// Mean (class-weighted when weights are given) negative log-likelihood of the
// targets under softmax(logits). logits is [N, K]; rows whose target equals
// ignore_index are skipped. With weights w the loss is
// sum_n w[t_n] * nll_n / sum_n w[t_n]. Writes (not accumulates) dloss/dlogits
// into *dlogits when non-null.
template <typename T>
T CrossEntropyLoss(const NumArray<T>& logits, std::span<const int32_t> targets,
                   std::span<const T> class_weights = {},
                   std::optional<int32_t> ignore_index = std::nullopt,
                   NumArray<T>* dlogits = nullptr);

}  // namespace spanfield

#endif  // SPANFIELD_NUMERIC_OPS_H_
