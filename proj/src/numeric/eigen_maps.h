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

// Private helpers: views of NumArray storage as Eigen row-major matrices.

#ifndef SPANFIELD_SRC_NUMERIC_EIGEN_MAPS_H_
#define SPANFIELD_SRC_NUMERIC_EIGEN_MAPS_H_

#include <Eigen/Core>
#include <unsupported/Eigen/SpecialFunctions>

#include "spanfield/numeric/num_array.h"

namespace spanfield::internal {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;
template <typename T>
using StridedMap = Eigen::Map<RowMatrix<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using ConstStridedMap = Eigen::Map<const RowMatrix<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using VectorMap = Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>;
template <typename T>
using ConstVectorMap = Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>;
template <typename T>
using ArrayMap = Eigen::Map<Eigen::Array<T, Eigen::Dynamic, 1>>;
template <typename T>
using ConstArrayMap = Eigen::Map<const Eigen::Array<T, Eigen::Dynamic, 1>>;

// Views `a` as a [size/cols, cols] matrix.
template <typename T>
MatrixMap<T> AsMatrix(NumArray<T>& a, int64_t cols) {
  return MatrixMap<T>(a.data(), a.size() / cols, cols);
}

template <typename T>
ConstMatrixMap<T> AsMatrix(const NumArray<T>& a, int64_t cols) {
  return ConstMatrixMap<T>(a.data(), a.size() / cols, cols);
}

template <typename T>
VectorMap<T> AsRow(NumArray<T>& a) {
  return VectorMap<T>(a.data(), a.size());
}

template <typename T>
ConstVectorMap<T> AsRow(const NumArray<T>& a) {
  return ConstVectorMap<T>(a.data(), a.size());
}

}  // namespace spanfield::internal

#endif  // SPANFIELD_SRC_NUMERIC_EIGEN_MAPS_H_
