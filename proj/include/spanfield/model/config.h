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

#ifndef SPANFIELD_MODEL_CONFIG_H_
#define SPANFIELD_MODEL_CONFIG_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"

namespace spanfield {

struct ModelConfig {
  int64_t vocab_size = 0;
  int64_t hidden_size = 64;
  int64_t num_layers = 2;
  int64_t num_heads = 4;
  int64_t ff_size = 256;
  int64_t max_position = 128;
  int64_t conv_filters = 64;
  int64_t conv_width = 3;
  double dropout_rate = 0.1;
  int64_t window_length = 128;
  // Span head variants: without the conv layer the classifier reads the
  // encoder output directly; mlp_hidden > 0 inserts one ReLU hidden layer
  // before the classifier.
  bool use_conv = true;
  int64_t mlp_hidden = 0;
  double init_stddev = 0.02;
  double layer_norm_eps = 1e-12;

  // Throws ConfigError naming the first violated constraint.
  void Validate() const;

  nlohmann::ordered_json ToJson() const;
  static ModelConfig FromJson(const nlohmann::ordered_json& json);

  bool operator==(const ModelConfig&) const = default;
};

// "toy", "paper" or "gradcheck". Throws ConfigError for other names.
ModelConfig PresetConfig(std::string_view name, int64_t vocab_size);

// Names of the first field that differs between two configs, or empty.
std::string FirstConfigDifference(const ModelConfig& a, const ModelConfig& b,
                                  bool encoder_only = false);

}  // namespace spanfield

#endif  // SPANFIELD_MODEL_CONFIG_H_
