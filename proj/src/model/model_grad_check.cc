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

#include "spanfield/model/model_grad_check.h"

#include <limits>
#include <optional>
#include <vector>

#include "spanfield/model/model.h"
#include "spanfield/numeric/ops.h"
#include "spanfield/random.h"
#include "spanfield/text/vocab.h"

namespace spanfield {

GradCheckReport CheckModelGradients(const ModelConfig& config, uint64_t seed,
                                    int64_t samples_per_param) {
  ModelConfig c = config;
  c.dropout_rate = 0.0;
  c.Validate();
  Model<double> model(c);
  model.InitializeWeights(seed);

  // Two windows of the full length: [CLS] A [SEP] B [SEP], the second one
  // padded after its last separator.
  Rng rng(DeriveSeed(seed, 1));
  const int64_t length = c.window_length;
  const int64_t split = length / 3;
  InputBatch in;
  in.batch = 2;
  in.length = length;
  std::vector<int32_t> labels;
  std::vector<int64_t> mlm_positions;
  std::vector<int32_t> mlm_targets;
  for (int64_t b = 0; b < 2; ++b) {
    const int64_t used = b == 0 ? length : length - 2;
    for (int64_t t = 0; t < length; ++t) {
      int32_t id = static_cast<int32_t>(rng.UniformRange(kNumReservedIds, c.vocab_size - 1));
      if (t == 0) id = kClsId;
      if (t == split || t == used - 1) id = kSepId;
      const bool pad = t >= used;
      in.token_ids.push_back(pad ? kPadId : id);
      in.segment_ids.push_back(t <= split ? 0 : 1);
      in.position_ids.push_back(static_cast<int32_t>(t));
      in.pad_mask.push_back(pad ? 1 : 0);
      const bool document = t > split && t < used - 1;
      labels.push_back(document ? static_cast<int32_t>(rng.UniformInt(3)) : kIgnoreLabel);
      if (document && rng.Bernoulli(0.3)) {
        mlm_positions.push_back(b * length + t);
        mlm_targets.push_back(static_cast<int32_t>(
            rng.UniformRange(kNumReservedIds, c.vocab_size - 1)));
      }
    }
  }
  if (mlm_positions.empty()) {
    mlm_positions.push_back(split + 1);
    mlm_targets.push_back(kNumReservedIds);
  }
  const std::vector<int32_t> nsp_targets = {1, 0};
  const auto n_masked = static_cast<int64_t>(mlm_positions.size());

  auto loss = [&](bool backward) {
    Tape<double> tape(&model, in, ForwardOptions{});
    NumArray<double> dspan;
    NumArray<double> dnsp({2, 2});
    NumArray<double> dmlm({n_masked, c.vocab_size});
    double value = SpanLoss(tape.SpanLogits(), labels, {}, backward ? &dspan : nullptr);
    value += CrossEntropyLoss(tape.NspLogits(), nsp_targets, {}, std::nullopt,
                              backward ? &dnsp : nullptr);
    value += CrossEntropyLoss(tape.MlmLogits(mlm_positions), mlm_targets, {}, std::nullopt,
                              backward ? &dmlm : nullptr);
    if (backward) {
      tape.BackwardSpan(dspan);
      tape.BackwardNsp(dnsp);
      tape.BackwardMlm(dmlm);
      tape.Backward();
    }
    return value;
  };
  GradCheckOptions options;
  options.seed = seed;
  options.samples_per_param =
      samples_per_param > 0 ? samples_per_param : std::numeric_limits<int64_t>::max();
  return FiniteDifferenceCheck(loss, &model.params(), options);
}

}  // namespace spanfield
