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

#ifndef SPANFIELD_TEXT_VOCAB_H_
#define SPANFIELD_TEXT_VOCAB_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "spanfield/text/tokenizer.h"

namespace spanfield {

inline constexpr int32_t kPadId = 0;
inline constexpr int32_t kUnkId = 1;
inline constexpr int32_t kClsId = 2;
inline constexpr int32_t kSepId = 3;
inline constexpr int32_t kMaskId = 4;
inline constexpr int32_t kNumReservedIds = 5;

// Token inventory. Ids 0..4 are [PAD] [UNK] [CLS] [SEP] [MASK]; the rest map
// one-to-one onto token strings.
class Vocab {
 public:
  Vocab();

  // Reserved tokens followed by `tokens` in order. Duplicates or reserved
  // names in `tokens` raise DataError.
  static Vocab FromTokens(const std::vector<std::string>& tokens);

  // Counts tokens across `texts`, keeps those seen at least min_count times,
  // orders them by descending count then by byte order.
  static Vocab Build(const std::vector<std::vector<Token>>& texts, int64_t min_count = 1);

  int32_t size() const { return static_cast<int32_t>(tokens_.size()); }
  // [UNK] for unknown strings.
  int32_t IdOf(std::string_view token) const;
  // Throws DataError for ids outside [0, size()).
  const std::string& TokenOf(int32_t id) const;
  bool Contains(std::string_view token) const;

  std::vector<int32_t> Encode(std::span<const Token> tokens) const;

  // Every token in id order, reserved ones included.
  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  void Append(const std::string& token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int32_t> ids_;
};

}  // namespace spanfield

#endif  // SPANFIELD_TEXT_VOCAB_H_
