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

#ifndef SPANFIELD_NUMERIC_PARAMS_H_
#define SPANFIELD_NUMERIC_PARAMS_H_

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <string_view>

#include "spanfield/numeric/num_array.h"

namespace spanfield {

// A learned array with its gradient and Adam moments. All four arrays share
// one shape.
template <typename T>
struct ParamTensor {
  std::string name;
  NumArray<T> value;
  NumArray<T> grad;
  NumArray<T> adam_m;
  NumArray<T> adam_v;
  // Frozen tensors are skipped by AdamUpdate and excluded from clipping.
  bool trainable = true;
};

// Ordered collection of named parameters plus the optimizer step counter that
// all of them share. Entries have stable addresses once added.
template <typename T>
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;
  ParamStore(ParamStore&&) = default;
  ParamStore& operator=(ParamStore&&) = default;

  // Adds a zero-initialized tensor. Names must be unique.
  ParamTensor<T>& Add(const std::string& name, const Shape& shape);

  ParamTensor<T>& Get(std::string_view name);
  const ParamTensor<T>& Get(std::string_view name) const;
  ParamTensor<T>* Find(std::string_view name);
  const ParamTensor<T>* Find(std::string_view name) const;

  std::deque<ParamTensor<T>>& tensors() { return tensors_; }
  const std::deque<ParamTensor<T>>& tensors() const { return tensors_; }

  int64_t TotalSize() const;
  void ZeroGrad();
  // Resets moments and the step counter (a fresh optimizer over the same values).
  void ResetOptimizerState();

  int64_t step_count = 0;

 private:
  std::deque<ParamTensor<T>> tensors_;
  std::map<std::string, size_t, std::less<>> index_;
};

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam step over every trainable tensor, then zeroes all
// gradients. Validates every gradient before touching any value: a non-finite
// gradient throws NumericError naming the tensor and leaves the store intact.
// A learning rate of exactly 0 leaves values bitwise unchanged.
template <typename T>
void AdamUpdate(ParamStore<T>* params, const AdamOptions& options);

// L2 norm over the gradients of trainable tensors.
template <typename T>
double GlobalGradNorm(const ParamStore<T>& params);

// Scales trainable gradients so their global norm is at most max_norm.
// Returns the norm before clipping.
template <typename T>
double ClipGradNorm(ParamStore<T>* params, double max_norm);

}  // namespace spanfield

#endif  // SPANFIELD_NUMERIC_PARAMS_H_
