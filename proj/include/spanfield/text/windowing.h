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

#ifndef SPANFIELD_TEXT_WINDOWING_H_
#define SPANFIELD_TEXT_WINDOWING_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "spanfield/text/tokenizer.h"

namespace spanfield {

inline constexpr int32_t kLabelIrrelevant = 0;
inline constexpr int32_t kLabelStart = 1;
inline constexpr int32_t kLabelEnd = 2;
inline constexpr int32_t kIgnoreLabel = -100;

// Inclusive token range [first, last] in document-global indices.
struct TokenSpan {
  int64_t first = 0;
  int64_t last = 0;

  bool operator==(const TokenSpan&) const = default;
};

// One packed model input. Layout: [CLS] tag [SEP] doc [SEP] [PAD]*.
struct PackedWindow {
  std::vector<int32_t> token_ids;
  std::vector<int32_t> segment_ids;
  std::vector<int32_t> position_ids;
  std::vector<uint8_t> pad_mask;  // 1 at [PAD] positions.
  std::vector<int32_t> labels;    // kIgnoreLabel off the document side.
  // Document tokens [doc_begin, doc_end) sit at window positions starting
  // at doc_offset.
  int64_t doc_begin = 0;
  int64_t doc_end = 0;
  int64_t doc_offset = 0;
  int64_t window_index = 0;

  int64_t length() const { return static_cast<int64_t>(token_ids.size()); }
  int64_t doc_token_count() const { return doc_end - doc_begin; }
};

// Document tokens that fit next to a tag of `tag_length` tokens.
int64_t WindowCapacity(int64_t window_length, int64_t tag_length);

// Windows covering [0, C), [stride, stride + C), ... until the last document
// token is covered. Labels are IRRELEVANT on document positions. Throws
// ConfigError when the tag leaves no room or stride is outside (0, C], and
// DataError on an empty document.
std::vector<PackedWindow> WindowDocument(std::span<const int32_t> doc_tokens,
                                         std::span<const int32_t> tag_tokens,
                                         int64_t window_length, int64_t stride);

// Maps a character span onto the tokens it covers exactly. Throws DataError
// naming doc_id and tag_id if either end falls inside a token or between
// tokens.
TokenSpan CharSpanToTokens(std::span<const Token> tokens, CharRange span, std::string_view doc_id,
                           int tag_id);

// Writes START/END into every window that fully contains `gold`; every other
// document position becomes IRRELEVANT. A single-token gold carries START only.
void AlignLabels(std::vector<PackedWindow>* windows, std::optional<TokenSpan> gold);

// Character-level convenience wrapper over CharSpanToTokens + AlignLabels.
void AlignLabels(std::vector<PackedWindow>* windows, std::optional<CharRange> gold,
                 std::span<const Token> tokens, std::string_view doc_id, int tag_id);

}  // namespace spanfield

#endif  // SPANFIELD_TEXT_WINDOWING_H_
