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

#ifndef SPANFIELD_MODEL_MODEL_GRAD_CHECK_H_
#define SPANFIELD_MODEL_MODEL_GRAD_CHECK_H_

#include <cstdint>

#include "spanfield/model/config.h"
#include "spanfield/numeric/grad_check.h"

namespace spanfield {

// Finite-difference check of the whole model in double precision. The loss
// is span cross-entropy + next-sentence cross-entropy + masked-token
// cross-entropy on a seeded two-window batch with padding and ignored
// labels, so every parameter group receives a gradient. Dropout is disabled.
// samples_per_param <= 0 checks every coordinate.
GradCheckReport CheckModelGradients(const ModelConfig& config, uint64_t seed,
                                    int64_t samples_per_param = 0);

}  // namespace spanfield

#endif  // SPANFIELD_MODEL_MODEL_GRAD_CHECK_H_
