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

#ifndef SPANFIELD_NUMERIC_GRAD_CHECK_H_
#define SPANFIELD_NUMERIC_GRAD_CHECK_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "spanfield/numeric/params.h"

namespace spanfield {

struct GradCheckOptions {
  double epsilon = 1e-5;
  double tolerance = 1e-4;
  // Coordinates sampled per tensor (all of them when the tensor is smaller).
  int64_t samples_per_param = 20;
  uint64_t seed = 0;
};

struct GradCheckEntry {
  std::string name;
  int64_t coordinates_checked = 0;
  double max_relative_error = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_relative_error = 0.0;
  bool passed = true;
};

// Compares analytic gradients against central differences.
//
// `loss` must recompute the scalar loss from the current parameter values;
// when its argument is true it must also leave d(loss)/d(param) in every
// tensor's grad (starting from zeroed gradients). The relative error of a
// coordinate is |a - n| / max(|a|, |n|, 1e-8). Parameter values are restored
// after every probe.
GradCheckReport FiniteDifferenceCheck(const std::function<double(bool)>& loss,
                                      ParamStore<double>* params,
                                      const GradCheckOptions& options = {});

}  // namespace spanfield

#endif  // SPANFIELD_NUMERIC_GRAD_CHECK_H_
