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

#include "spanfield/text/windowing.h"

#include <algorithm>
#include <string>

#include "spanfield/errors.h"
#include "spanfield/text/vocab.h"

namespace spanfield {

int64_t WindowCapacity(int64_t window_length, int64_t tag_length) {
  return window_length - tag_length - 3;
}

std::vector<PackedWindow> WindowDocument(std::span<const int32_t> doc_tokens,
                                         std::span<const int32_t> tag_tokens,
                                         int64_t window_length, int64_t stride) {
  const auto tag_len = static_cast<int64_t>(tag_tokens.size());
  const int64_t capacity = WindowCapacity(window_length, tag_len);
  if (capacity < 1) {
    throw ConfigError("tag of " + std::to_string(tag_len) + " tokens overflows window length " +
                      std::to_string(window_length));
  }
  if (stride <= 0 || stride > capacity) {
    throw ConfigError("stride " + std::to_string(stride) + " outside (0, " +
                      std::to_string(capacity) + "]");
  }
  const auto n = static_cast<int64_t>(doc_tokens.size());
  if (n == 0) throw DataError("cannot window an empty document");

  std::vector<PackedWindow> windows;
  for (int64_t begin = 0;; begin += stride) {
    const int64_t end = std::min(begin + capacity, n);
    PackedWindow w;
    w.doc_begin = begin;
    w.doc_end = end;
    w.doc_offset = tag_len + 2;
    w.window_index = static_cast<int64_t>(windows.size());
    w.token_ids.reserve(window_length);
    auto push = [&w](int32_t id, int32_t segment, int32_t label, uint8_t pad = 0) {
      w.token_ids.push_back(id);
      w.segment_ids.push_back(segment);
      w.labels.push_back(label);
      w.pad_mask.push_back(pad);
    };
    push(kClsId, 0, kIgnoreLabel);
    for (int32_t id : tag_tokens) push(id, 0, kIgnoreLabel);
    push(kSepId, 0, kIgnoreLabel);
    for (int64_t i = begin; i < end; ++i) push(doc_tokens[i], 1, kLabelIrrelevant);
    push(kSepId, 1, kIgnoreLabel);
    while (w.length() < window_length) push(kPadId, 0, kIgnoreLabel, 1);
    w.position_ids.resize(window_length);
    for (int64_t i = 0; i < window_length; ++i) w.position_ids[i] = static_cast<int32_t>(i);
    windows.push_back(std::move(w));
    if (end == n) break;
  }
  return windows;
}

TokenSpan CharSpanToTokens(std::span<const Token> tokens, CharRange span, std::string_view doc_id,
                           int tag_id) {
  auto fail = [&](const std::string& why) -> DataError {
    return DataError("gold span [" + std::to_string(span.begin) + "," + std::to_string(span.end) +
                     ") of document '" + std::string(doc_id) + "' tag " + std::to_string(tag_id) +
                     " " + why);
  };
  auto first = std::find_if(tokens.begin(), tokens.end(),
                            [&](const Token& t) { return t.range.begin == span.begin; });
  if (first == tokens.end()) throw fail("does not start at a token boundary");
  auto last = std::find_if(first, tokens.end(),
                           [&](const Token& t) { return t.range.end == span.end; });
  if (last == tokens.end()) throw fail("does not end at a token boundary");
  return {first - tokens.begin(), last - tokens.begin()};
}

void AlignLabels(std::vector<PackedWindow>* windows, std::optional<TokenSpan> gold) {
  for (auto& w : *windows) {
    for (int64_t i = 0; i < w.doc_token_count(); ++i) {
      w.labels[w.doc_offset + i] = kLabelIrrelevant;
    }
    if (!gold || gold->first < w.doc_begin || gold->last >= w.doc_end) continue;
    w.labels[w.doc_offset + gold->first - w.doc_begin] = kLabelStart;
    if (gold->last != gold->first) w.labels[w.doc_offset + gold->last - w.doc_begin] = kLabelEnd;
  }
}

void AlignLabels(std::vector<PackedWindow>* windows, std::optional<CharRange> gold,
                 std::span<const Token> tokens, std::string_view doc_id, int tag_id) {
  std::optional<TokenSpan> span;
  if (gold) span = CharSpanToTokens(tokens, *gold, doc_id, tag_id);
  AlignLabels(windows, span);
}

}  // namespace spanfield
