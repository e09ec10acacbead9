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

#include "spanfield/numeric/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "numeric/eigen_maps.h"
#include "spanfield/random.h"

namespace spanfield {

using internal::ArrayMap;
using internal::AsMatrix;
using internal::ConstArrayMap;
using internal::AsRow;
using internal::ConstStridedMap;
using internal::RowMatrix;
using internal::StridedMap;

namespace {

void ExpectShape(const Shape& actual, const Shape& expected, const char* op, const char* what) {
  if (actual != expected) {
    throw DimensionError(std::string(op) + ": " + what + " has shape " + ShapeToString(actual) +
                         ", expected " + ShapeToString(expected));
  }
}

template <typename T>
void ExpectSameShape(const NumArray<T>* grad, const Shape& expected, const char* op,
                     const char* what) {
  if (grad != nullptr) ExpectShape(grad->shape(), expected, op, what);
}

Shape WithLastDim(Shape shape, int64_t last) {
  shape.back() = last;
  return shape;
}

}  // namespace

// ---------------------------------------------------------------- linear ---

template <typename T>
NumArray<T> LinearForward(const NumArray<T>& x, const NumArray<T>& w, const NumArray<T>& b) {
  if (x.rank() < 1 || w.rank() != 2 || b.rank() != 1 || x.dim(-1) != w.dim(0) ||
      w.dim(1) != b.dim(0)) {
    throw DimensionError("linear: incompatible shapes x" + ShapeToString(x.shape()) + " w" +
                         ShapeToString(w.shape()) + " b" + ShapeToString(b.shape()));
  }
  const int64_t in = w.dim(0);
  const int64_t out_dim = w.dim(1);
  NumArray<T> out(WithLastDim(x.shape(), out_dim));
  auto out_m = AsMatrix(out, out_dim);
  out_m.noalias() = AsMatrix(x, in) * AsMatrix(w, out_dim);
  out_m.rowwise() += AsRow(b);
  return out;
}

template <typename T>
void LinearBackward(const NumArray<T>& x, const NumArray<T>& w, const NumArray<T>& dout,
                    NumArray<T>* dx, NumArray<T>* dw, NumArray<T>* db) {
  const int64_t in = w.dim(0);
  const int64_t out_dim = w.dim(1);
  ExpectShape(dout.shape(), WithLastDim(x.shape(), out_dim), "linear backward", "dout");
  ExpectSameShape(dx, x.shape(), "linear backward", "dx");
  ExpectSameShape(dw, w.shape(), "linear backward", "dw");
  ExpectSameShape(db, Shape{out_dim}, "linear backward", "db");
  const auto dout_m = AsMatrix(dout, out_dim);
  if (dw != nullptr) AsMatrix(*dw, out_dim).noalias() += AsMatrix(x, in).transpose() * dout_m;
  if (db != nullptr) AsRow(*db) += dout_m.colwise().sum();
  if (dx != nullptr) AsMatrix(*dx, in).noalias() += dout_m * AsMatrix(w, out_dim).transpose();
}

// ------------------------------------------------------------ layer norm ---

template <typename T>
NumArray<T> LayerNormForward(const NumArray<T>& x, const NumArray<T>& gain, const NumArray<T>& bias,
                             T eps, LayerNormCache<T>* cache) {
  if (x.rank() < 1) throw DimensionError("layer_norm: scalar input");
  const int64_t h = x.dim(-1);
  if (h < 2) {
    throw DimensionError("layer_norm: degenerate normalization axis of size " + std::to_string(h));
  }
  if (!(eps > T(0))) throw ConfigError("layer_norm: eps must be positive");
  ExpectShape(gain.shape(), Shape{h}, "layer_norm", "gain");
  ExpectShape(bias.shape(), Shape{h}, "layer_norm", "bias");

  const int64_t rows = x.size() / h;
  NumArray<T> out(x.shape());
  NumArray<T> normalized(x.shape());
  std::vector<T> inv_std(rows);
  for (int64_t r = 0; r < rows; ++r) {
    const T* in = x.data() + r * h;
    T mean = 0;
    for (int64_t i = 0; i < h; ++i) mean += in[i];
    mean /= static_cast<T>(h);
    T var = 0;
    for (int64_t i = 0; i < h; ++i) var += (in[i] - mean) * (in[i] - mean);
    var /= static_cast<T>(h);
    const T inv = T(1) / std::sqrt(var + eps);
    inv_std[r] = inv;
    T* xhat = normalized.data() + r * h;
    T* y = out.data() + r * h;
    for (int64_t i = 0; i < h; ++i) {
      xhat[i] = (in[i] - mean) * inv;
      y[i] = gain[i] * xhat[i] + bias[i];
    }
  }
  if (cache != nullptr) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return out;
}

template <typename T>
void LayerNormBackward(const LayerNormCache<T>& cache, const NumArray<T>& gain,
                       const NumArray<T>& dy, NumArray<T>* dx, NumArray<T>* dgain,
                       NumArray<T>* dbias) {
  const NumArray<T>& xhat = cache.normalized;
  ExpectShape(dy.shape(), xhat.shape(), "layer_norm backward", "dy");
  ExpectSameShape(dx, xhat.shape(), "layer_norm backward", "dx");
  const int64_t h = xhat.dim(-1);
  const int64_t rows = xhat.size() / h;
  std::vector<T> dxhat(h);
  for (int64_t r = 0; r < rows; ++r) {
    const T* g = dy.data() + r * h;
    const T* xn = xhat.data() + r * h;
    if (dgain != nullptr) {
      for (int64_t i = 0; i < h; ++i) (*dgain)[i] += g[i] * xn[i];
    }
    if (dbias != nullptr) {
      for (int64_t i = 0; i < h; ++i) (*dbias)[i] += g[i];
    }
    if (dx == nullptr) continue;
    T mean_d = 0;
    T mean_dx = 0;
    for (int64_t i = 0; i < h; ++i) {
      dxhat[i] = g[i] * gain[i];
      mean_d += dxhat[i];
      mean_dx += dxhat[i] * xn[i];
    }
    mean_d /= static_cast<T>(h);
    mean_dx /= static_cast<T>(h);
    T* out = dx->data() + r * h;
    const T inv = cache.inv_std[r];
    for (int64_t i = 0; i < h; ++i) out[i] += inv * (dxhat[i] - mean_d - xn[i] * mean_dx);
  }
}

// --------------------------------------------------------------- softmax ---

namespace {

// Softmax of one row in place. Returns false if every entry is masked.
template <typename T>
bool SoftmaxRow(T* row, int64_t k, const uint8_t* masked) {
  T max_value = -std::numeric_limits<T>::infinity();
  bool any = false;
  for (int64_t i = 0; i < k; ++i) {
    if (masked != nullptr && masked[i]) continue;
    if (!any || row[i] > max_value) max_value = row[i];
    any = true;
  }
  if (!any) return false;
  if (masked != nullptr) {
    for (int64_t i = 0; i < k; ++i) {
      if (masked[i]) row[i] = max_value;
    }
  }
  ArrayMap<T> a(row, k);
  a = (a - max_value).exp();
  if (masked != nullptr) {
    for (int64_t i = 0; i < k; ++i) {
      if (masked[i]) row[i] = T(0);
    }
  }
  T sum = 0;
  for (int64_t i = 0; i < k; ++i) sum += row[i];
  a *= T(1) / sum;
  return true;
}

// Column-wise softmax of a key-major score matrix [keys, queries]: every
// column is a distribution over the unmasked keys (rows). Working across
// rows keeps every pass contiguous. At least one key must be unmasked.
template <typename T>
void SoftmaxKeysInPlace(internal::MatrixMap<T>* scores, const uint8_t* key_mask) {
  internal::MatrixMap<T>& p = *scores;
  using Row = Eigen::Array<T, 1, Eigen::Dynamic>;
  const int64_t keys = p.rows();
  auto live = [&](int64_t j) { return key_mask == nullptr || !key_mask[j]; };
  int64_t first = 0;
  while (!live(first)) ++first;
  Row max_values = p.row(first).array();
  for (int64_t j = first + 1; j < keys; ++j) {
    if (live(j)) max_values = max_values.max(p.row(j).array());
  }
  Row sums = Row::Zero(p.cols());
  for (int64_t j = 0; j < keys; ++j) {
    if (!live(j)) {
      p.row(j).setZero();
      continue;
    }
    auto row = p.row(j).array();
    row = (row - max_values).exp();
    sums += row;
  }
  const Row inv_sums = sums.inverse();
  for (int64_t j = 0; j < keys; ++j) {
    if (live(j)) p.row(j).array() *= inv_sums;
  }
}

}  // namespace

template <typename T>
NumArray<T> SoftmaxForward(const NumArray<T>& x, std::span<const uint8_t> masked) {
  if (x.rank() < 1 || x.dim(-1) < 1) throw DimensionError("softmax: empty class axis");
  if (!masked.empty() && static_cast<int64_t>(masked.size()) != x.size()) {
    throw DimensionError("softmax: mask has " + std::to_string(masked.size()) +
                         " entries for input " + ShapeToString(x.shape()));
  }
  const int64_t k = x.dim(-1);
  const int64_t rows = x.size() / k;
  NumArray<T> out = x;
  for (int64_t r = 0; r < rows; ++r) {
    const uint8_t* m = masked.empty() ? nullptr : masked.data() + r * k;
    if (!SoftmaxRow(out.data() + r * k, k, m)) {
      throw DataError("softmax: all positions masked in slice " + std::to_string(r));
    }
  }
  return out;
}

template <typename T>
void SoftmaxBackward(const NumArray<T>& y, const NumArray<T>& dy, NumArray<T>* dx) {
  ExpectShape(dy.shape(), y.shape(), "softmax backward", "dy");
  ExpectShape(dx->shape(), y.shape(), "softmax backward", "dx");
  const int64_t k = y.dim(-1);
  const int64_t rows = y.size() / k;
  for (int64_t r = 0; r < rows; ++r) {
    const T* p = y.data() + r * k;
    const T* g = dy.data() + r * k;
    T dot = 0;
    for (int64_t i = 0; i < k; ++i) dot += p[i] * g[i];
    T* out = dx->data() + r * k;
    for (int64_t i = 0; i < k; ++i) out[i] += p[i] * (g[i] - dot);
  }
}

// ------------------------------------------------------------- attention ---

template <typename T>
NumArray<T> MultiHeadSelfAttention(const NumArray<T>& x, const AttentionWeights<T>& weights,
                                   int heads, std::span<const uint8_t> pad_mask,
                                   AttentionCache<T>* cache) {
  if (x.rank() != 3) throw DimensionError("attention: expected [B,T,H], got " + ShapeToString(x.shape()));
  const int64_t batch = x.dim(0);
  const int64_t len = x.dim(1);
  const int64_t hidden = x.dim(2);
  if (heads <= 0 || hidden % heads != 0) {
    throw ConfigError("attention: hidden size " + std::to_string(hidden) +
                      " is not divisible by " + std::to_string(heads) + " heads");
  }
  if (!pad_mask.empty() && static_cast<int64_t>(pad_mask.size()) != batch * len) {
    throw DimensionError("attention: pad mask has " + std::to_string(pad_mask.size()) +
                         " entries, expected " + std::to_string(batch * len));
  }
  ExpectShape(weights.qkv_weight.shape(), Shape{hidden, 3 * hidden}, "attention", "qkv weight");
  ExpectShape(weights.out_weight.shape(), Shape{hidden, hidden}, "attention", "output weight");

  ExpectShape(weights.query_bias.shape(), Shape{hidden}, "attention", "query bias");
  ExpectShape(weights.value_bias.shape(), Shape{hidden}, "attention", "value bias");

  const int64_t head_dim = hidden / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(head_dim));
  NumArray<T> qkv_bias(Shape{3 * hidden});
  std::copy_n(weights.query_bias.data(), hidden, qkv_bias.data());
  std::copy_n(weights.value_bias.data(), hidden, qkv_bias.data() + 2 * hidden);
  NumArray<T> qkv = LinearForward(x, weights.qkv_weight, qkv_bias);
  NumArray<T> probs(Shape{batch, heads, len, len});
  NumArray<T> context(Shape{batch, len, hidden});
  const int64_t qkv_stride = 3 * hidden;

  for (int64_t b = 0; b < batch; ++b) {
    const uint8_t* key_mask = pad_mask.empty() ? nullptr : pad_mask.data() + b * len;
    if (key_mask != nullptr && std::all_of(key_mask, key_mask + len, [](uint8_t m) { return m; })) {
      throw DataError("attention: every key is padding in batch element " + std::to_string(b));
    }
    const T* base = qkv.data() + b * len * qkv_stride;
    for (int h = 0; h < heads; ++h) {
      ConstStridedMap<T> q(base + h * head_dim, len, head_dim, Eigen::OuterStride<>(qkv_stride));
      ConstStridedMap<T> k(base + hidden + h * head_dim, len, head_dim,
                           Eigen::OuterStride<>(qkv_stride));
      ConstStridedMap<T> v(base + 2 * hidden + h * head_dim, len, head_dim,
                           Eigen::OuterStride<>(qkv_stride));
      T* p_data = probs.data() + (b * heads + h) * len * len;
      internal::MatrixMap<T> p(p_data, len, len);
      p.noalias() = scale * (k * q.transpose());
      SoftmaxKeysInPlace(&p, key_mask);
      StridedMap<T> ctx(context.data() + b * len * hidden + h * head_dim, len, head_dim,
                        Eigen::OuterStride<>(hidden));
      ctx.noalias() = p.transpose() * v;
    }
  }
  NumArray<T> out = LinearForward(context, weights.out_weight, weights.out_bias);
  if (cache != nullptr) {
    cache->input = x;
    cache->qkv = std::move(qkv);
    cache->probs = std::move(probs);
    cache->context = std::move(context);
    cache->pad_mask.assign(pad_mask.begin(), pad_mask.end());
    cache->heads = heads;
  }
  return out;
}

template <typename T>
void MultiHeadSelfAttentionBackward(const AttentionCache<T>& cache,
                                    const AttentionWeights<T>& weights, const NumArray<T>& dout,
                                    NumArray<T>* dx, const AttentionGrads<T>& grads) {
  const int64_t batch = cache.input.dim(0);
  const int64_t len = cache.input.dim(1);
  const int64_t hidden = cache.input.dim(2);
  const int heads = cache.heads;
  const int64_t head_dim = hidden / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(head_dim));
  const int64_t qkv_stride = 3 * hidden;

  NumArray<T> dcontext(cache.context.shape());
  LinearBackward(cache.context, weights.out_weight, dout, &dcontext, grads.out_weight,
                 grads.out_bias);

  NumArray<T> dqkv(cache.qkv.shape());
  RowMatrix<T> dp(len, len);
  Eigen::Array<T, 1, Eigen::Dynamic> dots(len);
  for (int64_t b = 0; b < batch; ++b) {
    const T* base = cache.qkv.data() + b * len * qkv_stride;
    T* dbase = dqkv.data() + b * len * qkv_stride;
    for (int h = 0; h < heads; ++h) {
      const Eigen::OuterStride<> stride(qkv_stride);
      ConstStridedMap<T> q(base + h * head_dim, len, head_dim, stride);
      ConstStridedMap<T> k(base + hidden + h * head_dim, len, head_dim, stride);
      ConstStridedMap<T> v(base + 2 * hidden + h * head_dim, len, head_dim, stride);
      StridedMap<T> dq(dbase + h * head_dim, len, head_dim, stride);
      StridedMap<T> dk(dbase + hidden + h * head_dim, len, head_dim, stride);
      StridedMap<T> dv(dbase + 2 * hidden + h * head_dim, len, head_dim, stride);
      internal::ConstMatrixMap<T> p(cache.probs.data() + (b * heads + h) * len * len, len, len);
      ConstStridedMap<T> dctx(dcontext.data() + b * len * hidden + h * head_dim, len, head_dim,
                              Eigen::OuterStride<>(hidden));

      // p and dp are key-major [keys, queries].
      dv.noalias() += p * dctx;
      dp.noalias() = v * dctx.transpose();
      dots.setZero();
      for (int64_t j = 0; j < len; ++j) dots += p.row(j).array() * dp.row(j).array();
      for (int64_t j = 0; j < len; ++j) {
        dp.row(j).array() = p.row(j).array() * (dp.row(j).array() - dots);
      }
      dq.noalias() += scale * (dp.transpose() * k);
      dk.noalias() += scale * (dp * q);
    }
  }
  NumArray<T> dqkv_bias(Shape{3 * hidden});
  LinearBackward(cache.input, weights.qkv_weight, dqkv, dx, grads.qkv_weight, &dqkv_bias);
  for (int64_t i = 0; i < hidden; ++i) {
    if (grads.query_bias != nullptr) (*grads.query_bias)[i] += dqkv_bias[i];
    if (grads.value_bias != nullptr) (*grads.value_bias)[i] += dqkv_bias[2 * hidden + i];
  }
}

// ---------------------------------------------------------------- conv1d ---

namespace {

void CheckConvShapes(const Shape& x, const Shape& kernels, int64_t bias_dim) {
  if (x.size() != 3 || kernels.size() != 3) {
    throw DimensionError("conv1d: expected x [B,T,C] and kernels [W,C,O], got x" +
                         ShapeToString(x) + " kernels" + ShapeToString(kernels));
  }
  if (kernels[0] % 2 == 0) {
    throw ConfigError("conv1d: window width must be odd, got " + std::to_string(kernels[0]));
  }
  if (x[2] != kernels[1] || kernels[2] != bias_dim) {
    throw DimensionError("conv1d: channel mismatch between x" + ShapeToString(x) + ", kernels" +
                         ShapeToString(kernels) + " and bias [" + std::to_string(bias_dim) + "]");
  }
}

// Unfolds x [B,T,C] into rows of W*C values, zero outside the sequence.
template <typename T>
RowMatrix<T> Im2Col(const NumArray<T>& x, int64_t width) {
  const int64_t batch = x.dim(0), len = x.dim(1), ch = x.dim(2);
  const int64_t pad = (width - 1) / 2;
  RowMatrix<T> col = RowMatrix<T>::Zero(batch * len, width * ch);
  for (int64_t b = 0; b < batch; ++b) {
    for (int64_t t = 0; t < len; ++t) {
      T* row = col.data() + (b * len + t) * width * ch;
      for (int64_t w = 0; w < width; ++w) {
        const int64_t src = t + w - pad;
        if (src < 0 || src >= len) continue;
        const T* in = x.data() + (b * len + src) * ch;
        std::copy(in, in + ch, row + w * ch);
      }
    }
  }
  return col;
}

}  // namespace

template <typename T>
NumArray<T> Conv1dSameForward(const NumArray<T>& x, const NumArray<T>& kernels,
                              const NumArray<T>& bias) {
  CheckConvShapes(x.shape(), kernels.shape(), bias.rank() == 1 ? bias.dim(0) : -1);
  const int64_t width = kernels.dim(0);
  const int64_t out_ch = kernels.dim(2);
  const RowMatrix<T> col = Im2Col(x, width);
  NumArray<T> out(Shape{x.dim(0), x.dim(1), out_ch});
  auto out_m = AsMatrix(out, out_ch);
  out_m.noalias() = col * AsMatrix(kernels, out_ch);
  out_m.rowwise() += AsRow(bias);
  return out;
}

template <typename T>
void Conv1dSameBackward(const NumArray<T>& x, const NumArray<T>& kernels, const NumArray<T>& dout,
                        NumArray<T>* dx, NumArray<T>* dkernels, NumArray<T>* dbias) {
  CheckConvShapes(x.shape(), kernels.shape(), kernels.dim(2));
  const int64_t batch = x.dim(0), len = x.dim(1), ch = x.dim(2);
  const int64_t width = kernels.dim(0);
  const int64_t out_ch = kernels.dim(2);
  const int64_t pad = (width - 1) / 2;
  ExpectShape(dout.shape(), Shape{batch, len, out_ch}, "conv1d backward", "dout");
  ExpectSameShape(dx, x.shape(), "conv1d backward", "dx");
  ExpectSameShape(dkernels, kernels.shape(), "conv1d backward", "dkernels");
  const auto dout_m = AsMatrix(dout, out_ch);
  if (dkernels != nullptr) {
    const RowMatrix<T> col = Im2Col(x, width);
    AsMatrix(*dkernels, out_ch).noalias() += col.transpose() * dout_m;
  }
  if (dbias != nullptr) AsRow(*dbias) += dout_m.colwise().sum();
  if (dx == nullptr) return;
  const RowMatrix<T> dcol = dout_m * AsMatrix(kernels, out_ch).transpose();
  for (int64_t b = 0; b < batch; ++b) {
    for (int64_t t = 0; t < len; ++t) {
      const T* row = dcol.data() + (b * len + t) * width * ch;
      for (int64_t w = 0; w < width; ++w) {
        const int64_t dst = t + w - pad;
        if (dst < 0 || dst >= len) continue;
        T* out = dx->data() + (b * len + dst) * ch;
        for (int64_t c = 0; c < ch; ++c) out[c] += row[w * ch + c];
      }
    }
  }
}

// ----------------------------------------------------------- activations ---

template <typename T>
NumArray<T> GeluForward(const NumArray<T>& x) {
  NumArray<T> out(x.shape());
  const T inv_sqrt2 = T(1) / std::numbers::sqrt2_v<T>;
  ConstArrayMap<T> xa(x.data(), x.size());
  ArrayMap<T>(out.data(), out.size()) = T(0.5) * xa * (T(1) + (xa * inv_sqrt2).erf());
  return out;
}

template <typename T>
void GeluBackward(const NumArray<T>& x, const NumArray<T>& dy, NumArray<T>* dx) {
  ExpectShape(dy.shape(), x.shape(), "gelu backward", "dy");
  const T inv_sqrt2 = T(1) / std::numbers::sqrt2_v<T>;
  const T inv_sqrt_2pi = T(1) / std::sqrt(T(2) * std::numbers::pi_v<T>);
  ExpectShape(dx->shape(), x.shape(), "gelu backward", "dx");
  ConstArrayMap<T> v(x.data(), x.size());
  ConstArrayMap<T> g(dy.data(), dy.size());
  ArrayMap<T>(dx->data(), dx->size()) +=
      g * (T(0.5) * (T(1) + (v * inv_sqrt2).erf()) + v * inv_sqrt_2pi * (T(-0.5) * v * v).exp());
}

template <typename T>
NumArray<T> ReluForward(const NumArray<T>& x) {
  NumArray<T> out(x.shape());
  for (int64_t i = 0; i < x.size(); ++i) out[i] = x[i] > T(0) ? x[i] : T(0);
  return out;
}

template <typename T>
void ReluBackward(const NumArray<T>& x, const NumArray<T>& dy, NumArray<T>* dx) {
  ExpectShape(dy.shape(), x.shape(), "relu backward", "dy");
  for (int64_t i = 0; i < x.size(); ++i) {
    if (x[i] > T(0)) (*dx)[i] += dy[i];
  }
}

template <typename T>
std::vector<uint8_t> DropoutInPlace(NumArray<T>* x, double rate, uint64_t seed) {
  if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout: rate must lie in [0, 1)");
  if (rate == 0.0) return {};
  std::vector<uint8_t> keep(x->size());
  const T scale = static_cast<T>(1.0 / (1.0 - rate));
  for (int64_t i = 0; i < x->size(); ++i) {
    const double u = static_cast<double>(MixBits(seed + static_cast<uint64_t>(i)) >> 11) * 0x1.0p-53;
    keep[i] = u >= rate;
    (*x)[i] = keep[i] ? (*x)[i] * scale : T(0);
  }
  return keep;
}

template <typename T>
void DropoutBackwardInPlace(NumArray<T>* dy, std::span<const uint8_t> keep, double rate) {
  if (keep.empty()) return;
  const T scale = static_cast<T>(1.0 / (1.0 - rate));
  for (int64_t i = 0; i < dy->size(); ++i) (*dy)[i] = keep[i] ? (*dy)[i] * scale : T(0);
}

// ------------------------------------------------------------- embedding ---

template <typename T>
NumArray<T> EmbeddingLookup(const NumArray<T>& table, std::span<const int32_t> ids) {
  const int64_t vocab = table.dim(0);
  const int64_t h = table.dim(1);
  NumArray<T> out(Shape{static_cast<int64_t>(ids.size()), h});
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= vocab) {
      throw DataError("embedding: id " + std::to_string(ids[i]) + " outside table of size " +
                      std::to_string(vocab));
    }
    std::copy_n(table.data() + ids[i] * h, h, out.data() + i * h);
  }
  return out;
}

template <typename T>
void EmbeddingBackward(std::span<const int32_t> ids, const NumArray<T>& dout, NumArray<T>* dtable) {
  const int64_t h = dtable->dim(1);
  for (size_t i = 0; i < ids.size(); ++i) {
    T* row = dtable->data() + ids[i] * h;
    const T* g = dout.data() + i * h;
    for (int64_t j = 0; j < h; ++j) row[j] += g[j];
  }
}

// ------------------------------------------------------------------ loss ---

template <typename T>
T CrossEntropyLoss(const NumArray<T>& logits, std::span<const int32_t> targets,
                   std::span<const T> class_weights, std::optional<int32_t> ignore_index,
                   NumArray<T>* dlogits) {
  if (logits.rank() != 2) {
    throw DimensionError("cross_entropy: logits must be [N,K], got " + ShapeToString(logits.shape()));
  }
  const int64_t n = logits.dim(0);
  const int64_t k = logits.dim(1);
  if (static_cast<int64_t>(targets.size()) != n) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                         std::to_string(n) + " rows");
  }
  if (!class_weights.empty() && static_cast<int64_t>(class_weights.size()) != k) {
    throw DimensionError("cross_entropy: class weights must have " + std::to_string(k) + " entries");
  }
  if (dlogits != nullptr) {
    ExpectShape(dlogits->shape(), logits.shape(), "cross_entropy", "dlogits");
    dlogits->SetZero();
  }

  double total = 0.0;
  double weight_sum = 0.0;
  int64_t counted = 0;
  std::vector<T> probs(k);
  for (int64_t r = 0; r < n; ++r) {
    const int32_t t = targets[r];
    if (ignore_index && t == *ignore_index) continue;
    if (t < 0 || t >= k) {
      throw DataError("cross_entropy: target " + std::to_string(t) + " outside [0," +
                      std::to_string(k) + ")");
    }
    const T* row = logits.data() + r * k;
    T max_value = row[0];
    for (int64_t i = 1; i < k; ++i) max_value = std::max(max_value, row[i]);
    T sum = 0;
    for (int64_t i = 0; i < k; ++i) sum += std::exp(row[i] - max_value);
    const T log_z = max_value + std::log(sum);
    const double w = class_weights.empty() ? 1.0 : static_cast<double>(class_weights[t]);
    total += w * static_cast<double>(log_z - row[t]);
    weight_sum += w;
    ++counted;
  }
  if (counted == 0) throw DataError("cross_entropy: every row is ignored (empty batch)");
  if (!(weight_sum > 0.0)) throw DataError("cross_entropy: class weights sum to zero");

  if (dlogits != nullptr) {
    const double inv = 1.0 / weight_sum;
    for (int64_t r = 0; r < n; ++r) {
      const int32_t t = targets[r];
      if (ignore_index && t == *ignore_index) continue;
      const T* row = logits.data() + r * k;
      T max_value = row[0];
      for (int64_t i = 1; i < k; ++i) max_value = std::max(max_value, row[i]);
      T sum = 0;
      for (int64_t i = 0; i < k; ++i) {
        probs[i] = std::exp(row[i] - max_value);
        sum += probs[i];
      }
      const double w = class_weights.empty() ? 1.0 : static_cast<double>(class_weights[t]);
      const T scale = static_cast<T>(w * inv);
      T* out = dlogits->data() + r * k;
      for (int64_t i = 0; i < k; ++i) {
        out[i] = scale * (probs[i] / sum - (i == t ? T(1) : T(0)));
      }
    }
  }
  return static_cast<T>(total / weight_sum);
}

// --------------------------------------------------------- instantiation ---

#define SPANFIELD_INSTANTIATE_OPS(T)                                                            \
  template NumArray<T> LinearForward(const NumArray<T>&, const NumArray<T>&, const NumArray<T>&); \
  template void LinearBackward(const NumArray<T>&, const NumArray<T>&, const NumArray<T>&,       \
                               NumArray<T>*, NumArray<T>*, NumArray<T>*);                        \
  template NumArray<T> LayerNormForward(const NumArray<T>&, const NumArray<T>&,                  \
                                        const NumArray<T>&, T, LayerNormCache<T>*);              \
  template void LayerNormBackward(const LayerNormCache<T>&, const NumArray<T>&,                  \
                                  const NumArray<T>&, NumArray<T>*, NumArray<T>*, NumArray<T>*); \
  template NumArray<T> SoftmaxForward(const NumArray<T>&, std::span<const uint8_t>);             \
  template void SoftmaxBackward(const NumArray<T>&, const NumArray<T>&, NumArray<T>*);           \
  template NumArray<T> MultiHeadSelfAttention(const NumArray<T>&, const AttentionWeights<T>&,    \
                                              int, std::span<const uint8_t>,                     \
                                              AttentionCache<T>*);                               \
  template void MultiHeadSelfAttentionBackward(const AttentionCache<T>&,                         \
                                               const AttentionWeights<T>&, const NumArray<T>&,   \
                                               NumArray<T>*, const AttentionGrads<T>&);          \
  template NumArray<T> Conv1dSameForward(const NumArray<T>&, const NumArray<T>&,                 \
                                         const NumArray<T>&);                                    \
  template void Conv1dSameBackward(const NumArray<T>&, const NumArray<T>&, const NumArray<T>&,   \
                                   NumArray<T>*, NumArray<T>*, NumArray<T>*);                    \
  template NumArray<T> GeluForward(const NumArray<T>&);                                          \
  template void GeluBackward(const NumArray<T>&, const NumArray<T>&, NumArray<T>*);              \
  template NumArray<T> ReluForward(const NumArray<T>&);                                          \
  template void ReluBackward(const NumArray<T>&, const NumArray<T>&, NumArray<T>*);              \
  template std::vector<uint8_t> DropoutInPlace(NumArray<T>*, double, uint64_t);                  \
  template void DropoutBackwardInPlace(NumArray<T>*, std::span<const uint8_t>, double);          \
  template NumArray<T> EmbeddingLookup(const NumArray<T>&, std::span<const int32_t>);            \
  template void EmbeddingBackward(std::span<const int32_t>, const NumArray<T>&, NumArray<T>*);   \
  template T CrossEntropyLoss(const NumArray<T>&, std::span<const int32_t>, std::span<const T>,  \
                              std::optional<int32_t>, NumArray<T>*);

SPANFIELD_INSTANTIATE_OPS(float)
SPANFIELD_INSTANTIATE_OPS(double)

#undef SPANFIELD_INSTANTIATE_OPS

}  // namespace spanfield
