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

#include "spanfield/model/config.h"

#include <algorithm>

#include "spanfield/errors.h"

namespace spanfield {

using Json = nlohmann::ordered_json;

void ModelConfig::Validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("model config: " + what);
  };
  require(vocab_size > 5, "vocab_size must exceed the 5 reserved tokens");
  require(hidden_size >= 2, "hidden_size must be >= 2");
  require(num_layers >= 1, "num_layers must be >= 1");
  require(num_heads >= 1 && hidden_size % num_heads == 0, "hidden_size % num_heads must be 0");
  require(ff_size >= 1, "ff_size must be >= 1");
  require(window_length >= 5, "window_length must be >= 5");
  require(max_position >= window_length, "max_position must be >= window_length");
  require(!use_conv || conv_filters >= 1, "conv_filters must be >= 1");
  require(!use_conv || (conv_width >= 1 && conv_width % 2 == 1), "conv_width must be odd");
  require(mlp_hidden >= 0, "mlp_hidden must be >= 0");
  require(dropout_rate >= 0.0 && dropout_rate < 1.0, "dropout_rate must lie in [0, 1)");
  require(init_stddev > 0.0, "init_stddev must be positive");
  require(layer_norm_eps > 0.0, "layer_norm_eps must be positive");
}

Json ModelConfig::ToJson() const {
  return Json{{"vocab_size", vocab_size},
              {"hidden_size", hidden_size},
              {"num_layers", num_layers},
              {"num_heads", num_heads},
              {"ff_size", ff_size},
              {"max_position", max_position},
              {"conv_filters", conv_filters},
              {"conv_width", conv_width},
              {"dropout_rate", dropout_rate},
              {"window_length", window_length},
              {"use_conv", use_conv},
              {"mlp_hidden", mlp_hidden},
              {"init_stddev", init_stddev},
              {"layer_norm_eps", layer_norm_eps}};
}

ModelConfig ModelConfig::FromJson(const Json& json) {
  ModelConfig c;
  try {
    c.vocab_size = json.at("vocab_size").get<int64_t>();
    c.hidden_size = json.at("hidden_size").get<int64_t>();
    c.num_layers = json.at("num_layers").get<int64_t>();
    c.num_heads = json.at("num_heads").get<int64_t>();
    c.ff_size = json.at("ff_size").get<int64_t>();
    c.max_position = json.at("max_position").get<int64_t>();
    c.conv_filters = json.at("conv_filters").get<int64_t>();
    c.conv_width = json.at("conv_width").get<int64_t>();
    c.dropout_rate = json.at("dropout_rate").get<double>();
    c.window_length = json.at("window_length").get<int64_t>();
    c.use_conv = json.at("use_conv").get<bool>();
    c.mlp_hidden = json.at("mlp_hidden").get<int64_t>();
    c.init_stddev = json.at("init_stddev").get<double>();
    c.layer_norm_eps = json.at("layer_norm_eps").get<double>();
  } catch (const Json::exception& e) {
    throw DataError(std::string("model config record: ") + e.what());
  }
  return c;
}

ModelConfig PresetConfig(std::string_view name, int64_t vocab_size) {
  ModelConfig c;
  c.vocab_size = vocab_size;
  if (name == "toy") return c;
  if (name == "paper") {
    c.hidden_size = 768;
    c.num_layers = 12;
    c.num_heads = 12;
    c.ff_size = 3072;
    c.max_position = 512;
    c.conv_filters = 768;
    c.window_length = 384;
    return c;
  }
  if (name == "gradcheck") {
    c.hidden_size = 8;
    c.num_layers = 2;
    c.num_heads = 2;
    c.ff_size = 16;
    c.max_position = 12;
    c.conv_filters = 8;
    c.window_length = 12;
    c.dropout_rate = 0.0;
    c.init_stddev = 0.5;
    c.layer_norm_eps = 1e-5;
    return c;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "' (expected toy, paper or gradcheck)");
}

std::string FirstConfigDifference(const ModelConfig& a, const ModelConfig& b, bool encoder_only) {
  const Json ja = a.ToJson();
  const Json jb = b.ToJson();
  static const char* const kHeadFields[] = {"conv_filters", "conv_width", "use_conv",
                                            "mlp_hidden", "dropout_rate", "init_stddev"};
  for (const auto& [key, value] : ja.items()) {
    if (encoder_only && std::find(std::begin(kHeadFields), std::end(kHeadFields), key) !=
                            std::end(kHeadFields)) {
      continue;
    }
    if (jb.at(key) != value) return key;
  }
  return "";
}

}  // namespace spanfield
