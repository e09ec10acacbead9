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

// Turning per-token class probabilities into extracted values.

#ifndef SPANFIELD_EXTRACTION_SPAN_DECODER_H_
#define SPANFIELD_EXTRACTION_SPAN_DECODER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spanfield/text/tokenizer.h"
#include "spanfield/text/windowing.h"

namespace spanfield {

inline constexpr int64_t kDefaultMaxSpan = 30;

// Best (start, end) pair of one window, in window positions.
struct WindowCandidate {
  int64_t start = 0;
  int64_t end = 0;
  double score = 0.0;  // p_START(start) * p_END(end)
  bool abstained = true;

  bool operator==(const WindowCandidate&) const = default;
};

// `probs` holds `length` rows of (p_IRR, p_START, p_END). Over the document
// positions [doc_offset, doc_offset + doc_count) it finds the pair
// s <= e <= s + max_span - 1 maximizing p_START(s) * p_END(e); ties go to
// the smaller s, then the smaller e. The window abstains when
// p_START(s) <= p_IRR(s) or p_END(e) <= p_IRR(e) at that pair; start, end
// and score still describe the pair. Throws DataError when doc_count is 0
// and ConfigError when max_span < 1.
WindowCandidate DecodeWindow(std::span<const float> probs, int64_t length, int64_t doc_offset,
                             int64_t doc_count, int64_t max_span = kDefaultMaxSpan);

struct SpanPrediction {
  std::string doc_id;
  int tag_id = 0;
  // Document token indices, inclusive; -1 when abstained.
  int64_t start_token = -1;
  int64_t end_token = -1;
  double score = 0.0;
  std::string value;
  CharRange chars;  // code point offsets of value in the document
  bool abstained = true;

  bool operator==(const SpanPrediction&) const = default;
};

// Picks the highest-scoring non-abstaining window candidate (ties: lowest
// window_index, then lowest start) and maps it to document token indices.
// Abstains when every window abstains. `candidates[i]` belongs to
// `windows[i]`. Text fields are left empty; see RecoverText.
SpanPrediction Aggregate(std::span<const WindowCandidate> candidates,
                         std::span<const PackedWindow> windows, std::string doc_id, int tag_id);

// Fills value and chars from the document text: first character of the start
// token through the last character of the end token, whitespace-trimmed.
void RecoverText(const Utf8Text& text, std::span<const Token> tokens, SpanPrediction* prediction);

// Trims and collapses internal whitespace runs to one space.
std::string NormalizeValue(std::string_view value);

}  // namespace spanfield

#endif  // SPANFIELD_EXTRACTION_SPAN_DECODER_H_
