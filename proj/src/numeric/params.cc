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

#include "spanfield/numeric/params.h"

#include <cmath>

namespace spanfield {

template <typename T>
ParamTensor<T>& ParamStore<T>::Add(const std::string& name, const Shape& shape) {
  if (index_.count(name) > 0) throw ConfigError("duplicate parameter name: " + name);
  ParamTensor<T>& p = tensors_.emplace_back();
  p.name = name;
  p.value = NumArray<T>(shape);
  p.grad = NumArray<T>(shape);
  p.adam_m = NumArray<T>(shape);
  p.adam_v = NumArray<T>(shape);
  index_.emplace(name, tensors_.size() - 1);
  return p;
}

template <typename T>
ParamTensor<T>* ParamStore<T>::Find(std::string_view name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &tensors_[it->second];
}

template <typename T>
const ParamTensor<T>* ParamStore<T>::Find(std::string_view name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &tensors_[it->second];
}

template <typename T>
ParamTensor<T>& ParamStore<T>::Get(std::string_view name) {
  ParamTensor<T>* p = Find(name);
  if (p == nullptr) throw DataError("unknown parameter: " + std::string(name));
  return *p;
}

template <typename T>
const ParamTensor<T>& ParamStore<T>::Get(std::string_view name) const {
  const ParamTensor<T>* p = Find(name);
  if (p == nullptr) throw DataError("unknown parameter: " + std::string(name));
  return *p;
}

template <typename T>
int64_t ParamStore<T>::TotalSize() const {
  int64_t n = 0;
  for (const auto& p : tensors_) n += p.value.size();
  return n;
}

template <typename T>
void ParamStore<T>::ZeroGrad() {
  for (auto& p : tensors_) p.grad.SetZero();
}

template <typename T>
void ParamStore<T>::ResetOptimizerState() {
  for (auto& p : tensors_) {
    p.adam_m.SetZero();
    p.adam_v.SetZero();
  }
  step_count = 0;
}

template <typename T>
void AdamUpdate(ParamStore<T>* params, const AdamOptions& options) {
  if (options.learning_rate < 0.0) throw ConfigError("adam: learning rate must be >= 0");
  if (options.beta1 < 0.0 || options.beta1 >= 1.0 || options.beta2 < 0.0 || options.beta2 >= 1.0) {
    throw ConfigError("adam: betas must lie in [0, 1)");
  }
  for (const auto& p : params->tensors()) {
    if (p.trainable && !p.grad.AllFinite()) {
      throw NumericError("adam: non-finite gradient in parameter " + p.name);
    }
  }
  params->step_count += 1;
  const double t = static_cast<double>(params->step_count);
  const double correction1 = 1.0 - std::pow(options.beta1, t);
  const double correction2 = 1.0 - std::pow(options.beta2, t);
  const T b1 = static_cast<T>(options.beta1);
  const T b2 = static_cast<T>(options.beta2);
  const T step = static_cast<T>(options.learning_rate / correction1);
  const T inv_sqrt_c2 = static_cast<T>(1.0 / std::sqrt(correction2));
  const T eps = static_cast<T>(options.eps);
  for (auto& p : params->tensors()) {
    if (p.trainable) {
      T* value = p.value.data();
      T* m = p.adam_m.data();
      T* v = p.adam_v.data();
      const T* g = p.grad.data();
      for (int64_t i = 0; i < p.value.size(); ++i) {
        m[i] = b1 * m[i] + (T(1) - b1) * g[i];
        v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
        value[i] -= step * m[i] / (std::sqrt(v[i]) * inv_sqrt_c2 + eps);
      }
    }
    p.grad.SetZero();
  }
}

template <typename T>
double GlobalGradNorm(const ParamStore<T>& params) {
  double sq = 0.0;
  for (const auto& p : params.tensors()) {
    if (!p.trainable) continue;
    for (const T g : p.grad.values()) sq += static_cast<double>(g) * static_cast<double>(g);
  }
  return std::sqrt(sq);
}

template <typename T>
double ClipGradNorm(ParamStore<T>* params, double max_norm) {
  const double norm = GlobalGradNorm(*params);
  if (norm > max_norm && norm > 0.0) {
    const T scale = static_cast<T>(max_norm / norm);
    for (auto& p : params->tensors()) {
      if (!p.trainable) continue;
      for (T& g : p.grad.values()) g *= scale;
    }
  }
  return norm;
}

template class ParamStore<float>;
template class ParamStore<double>;
template void AdamUpdate(ParamStore<float>*, const AdamOptions&);
template void AdamUpdate(ParamStore<double>*, const AdamOptions&);
template double GlobalGradNorm(const ParamStore<float>&);
template double GlobalGradNorm(const ParamStore<double>&);
template double ClipGradNorm(ParamStore<float>*, double);
template double ClipGradNorm(ParamStore<double>*, double);

}  // namespace spanfield
