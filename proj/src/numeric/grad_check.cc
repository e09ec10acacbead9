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

#include "spanfield/numeric/grad_check.h"

#include <algorithm>
#include <cmath>

#include "spanfield/random.h"

namespace spanfield {

GradCheckReport FiniteDifferenceCheck(const std::function<double(bool)>& loss,
                                      ParamStore<double>* params,
                                      const GradCheckOptions& options) {
  params->ZeroGrad();
  loss(true);
  Rng rng(options.seed);
  GradCheckReport report;
  for (auto& p : params->tensors()) {
    const NumArray<double> analytic = p.grad;
    GradCheckEntry entry;
    entry.name = p.name;
    std::vector<int64_t> coords;
    if (p.value.size() <= options.samples_per_param) {
      for (int64_t i = 0; i < p.value.size(); ++i) coords.push_back(i);
    } else {
      std::vector<int64_t> perm = rng.Permutation(p.value.size());
      coords.assign(perm.begin(), perm.begin() + options.samples_per_param);
      std::sort(coords.begin(), coords.end());
    }
    for (int64_t i : coords) {
      const double saved = p.value[i];
      p.value[i] = saved + options.epsilon;
      const double up = loss(false);
      p.value[i] = saved - options.epsilon;
      const double down = loss(false);
      p.value[i] = saved;
      const double numeric = (up - down) / (2.0 * options.epsilon);
      const double a = analytic[i];
      const double rel =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      entry.max_relative_error = std::max(entry.max_relative_error, rel);
      ++entry.coordinates_checked;
    }
    entry.passed = entry.max_relative_error < options.tolerance;
    report.max_relative_error = std::max(report.max_relative_error, entry.max_relative_error);
    report.passed = report.passed && entry.passed;
    report.entries.push_back(std::move(entry));
  }
  params->ZeroGrad();
  return report;
}

}  // namespace spanfield
