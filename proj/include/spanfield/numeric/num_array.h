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

#ifndef SPANFIELD_NUMERIC_NUM_ARRAY_H_
#define SPANFIELD_NUMERIC_NUM_ARRAY_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <new>
#include <vector>

#include "spanfield/errors.h"

namespace spanfield {

using Shape = std::vector<int64_t>;

std::string ShapeToString(const Shape& shape);
int64_t ShapeSize(const Shape& shape);

// Allocator with 64-byte alignment, so vectorized kernels see the same
// alignment (and therefore the same summation order) on every run.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlignment)); }
  void deallocate(T* p, size_t) { ::operator delete(p, kAlignment); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const {
    return true;
  }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

// Dense row-major array. The library instantiates it for double (gradient
// checks and tests) and float (training runs).
template <typename T>
class NumArray {
 public:
  using value_type = T;

  NumArray() = default;

  // Zero-filled array of the given shape.
  explicit NumArray(Shape shape) : shape_(std::move(shape)), data_(ShapeSize(shape_), T(0)) {}

  NumArray(Shape shape, const std::vector<T>& data)
      : NumArray(std::move(shape), std::span<const T>(data)) {}

  NumArray(Shape shape, std::span<const T> data)
      : shape_(std::move(shape)), data_(data.begin(), data.end()) {
    if (ShapeSize(shape_) != static_cast<int64_t>(data_.size())) {
      throw DimensionError("NumArray: shape " + ShapeToString(shape_) + " holds " +
                           std::to_string(ShapeSize(shape_)) + " values, got " +
                           std::to_string(data_.size()));
    }
  }

  static NumArray Full(Shape shape, T value) {
    NumArray out(std::move(shape));
    out.Fill(value);
    return out;
  }

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }

  // Negative axes count from the end.
  int64_t dim(int axis) const {
    if (axis < 0) axis += rank();
    if (axis < 0 || axis >= rank()) {
      throw DimensionError("NumArray: axis out of range for shape " + ShapeToString(shape_));
    }
    return shape_[axis];
  }

  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::vector<T> ToVector() const { return std::vector<T>(data_.begin(), data_.end()); }

  T& operator[](int64_t i) { return data_[i]; }
  const T& operator[](int64_t i) const { return data_[i]; }

  // Multi-index access, e.g. a.at({b, t, h}).
  T& at(std::initializer_list<int64_t> index) { return data_[Offset(index)]; }
  const T& at(std::initializer_list<int64_t> index) const { return data_[Offset(index)]; }

  void Fill(T value) { std::fill(data_.begin(), data_.end(), value); }
  void SetZero() { Fill(T(0)); }

  // Changes the shape in place; the element count must not change.
  void Reshape(Shape shape) {
    if (ShapeSize(shape) != size()) {
      throw DimensionError("NumArray: cannot reshape " + ShapeToString(shape_) + " to " +
                           ShapeToString(shape));
    }
    shape_ = std::move(shape);
  }

  NumArray Reshaped(Shape shape) const {
    NumArray out = *this;
    out.Reshape(std::move(shape));
    return out;
  }

  bool AllFinite() const {
    for (const T& v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  template <typename U>
  NumArray<U> Cast() const {
    const std::vector<U> converted(data_.begin(), data_.end());
    return NumArray<U>(shape_, std::span<const U>(converted));
  }

  bool operator==(const NumArray& other) const = default;

 private:
  int64_t Offset(std::initializer_list<int64_t> index) const {
    if (static_cast<int>(index.size()) != rank()) {
      throw DimensionError("NumArray: index rank does not match shape " + ShapeToString(shape_));
    }
    int64_t offset = 0;
    int axis = 0;
    for (int64_t i : index) {
      if (i < 0 || i >= shape_[axis]) {
        throw DimensionError("NumArray: index out of range for shape " + ShapeToString(shape_));
      }
      offset = offset * shape_[axis] + i;
      ++axis;
    }
    return offset;
  }

  Shape shape_;
  AlignedVector<T> data_;
};

// Throws NumericError naming `what` if any value is NaN or infinite.
template <typename T>
void CheckFinite(const NumArray<T>& a, const std::string& what) {
  if (!a.AllFinite()) throw NumericError("non-finite value in " + what);
}

}  // namespace spanfield

#endif  // SPANFIELD_NUMERIC_NUM_ARRAY_H_
