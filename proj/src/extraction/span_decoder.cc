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

#include "spanfield/extraction/span_decoder.h"

#include <deque>

#include "spanfield/errors.h"

namespace spanfield {

WindowCandidate DecodeWindow(std::span<const float> probs, int64_t length, int64_t doc_offset,
                             int64_t doc_count, int64_t max_span) {
  if (max_span < 1) throw ConfigError("decoder: max_span must be >= 1");
  if (doc_count <= 0) throw DataError("decoder: window has no document positions");
  if (static_cast<int64_t>(probs.size()) != 3 * length || doc_offset < 0 ||
      doc_offset + doc_count > length) {
    throw DimensionError("decoder: probabilities do not cover the document positions");
  }
  auto p = [&](int64_t pos, int32_t label) { return static_cast<double>(probs[3 * pos + label]); };

  // For each end e, the best start lies in [e - max_span + 1, e]; a deque of
  // candidate starts with non-increasing p_START keeps its maximum (earliest
  // on ties) at the front.
  std::deque<int64_t> starts;
  WindowCandidate best;
  bool have = false;
  const int64_t first = doc_offset;
  const int64_t last = doc_offset + doc_count - 1;
  for (int64_t e = first; e <= last; ++e) {
    while (!starts.empty() && p(starts.back(), kLabelStart) < p(e, kLabelStart)) starts.pop_back();
    starts.push_back(e);
    while (starts.front() < e - max_span + 1) starts.pop_front();
    const int64_t s = starts.front();
    const double score = p(s, kLabelStart) * p(e, kLabelEnd);
    const bool better = !have || score > best.score ||
                        (score == best.score && (s < best.start || (s == best.start && e < best.end)));
    if (better) {
      best.start = s;
      best.end = e;
      best.score = score;
      have = true;
    }
  }
  best.abstained = p(best.start, kLabelStart) <= p(best.start, kLabelIrrelevant) ||
                   p(best.end, kLabelEnd) <= p(best.end, kLabelIrrelevant);
  return best;
}

SpanPrediction Aggregate(std::span<const WindowCandidate> candidates,
                         std::span<const PackedWindow> windows, std::string doc_id, int tag_id) {
  if (candidates.size() != windows.size()) {
    throw DimensionError("aggregate: " + std::to_string(candidates.size()) + " candidates for " +
                         std::to_string(windows.size()) + " windows");
  }
  SpanPrediction out;
  out.doc_id = std::move(doc_id);
  out.tag_id = tag_id;
  const WindowCandidate* best = nullptr;
  const PackedWindow* best_window = nullptr;
  for (size_t i = 0; i < candidates.size(); ++i) {
    const WindowCandidate& c = candidates[i];
    if (c.abstained) continue;
    const PackedWindow& w = windows[i];
    bool better = best == nullptr || c.score > best->score;
    if (!better && c.score == best->score) {
      better = w.window_index < best_window->window_index ||
               (w.window_index == best_window->window_index && c.start < best->start);
    }
    if (better) {
      best = &c;
      best_window = &w;
    }
  }
  if (best == nullptr) return out;
  out.abstained = false;
  out.score = best->score;
  out.start_token = best_window->doc_begin + (best->start - best_window->doc_offset);
  out.end_token = best_window->doc_begin + (best->end - best_window->doc_offset);
  return out;
}

void RecoverText(const Utf8Text& text, std::span<const Token> tokens, SpanPrediction* prediction) {
  SpanPrediction& p = *prediction;
  if (p.abstained) {
    p.value.clear();
    p.chars = CharRange{};
    return;
  }
  if (p.start_token < 0 || p.end_token < p.start_token ||
      p.end_token >= static_cast<int64_t>(tokens.size())) {
    throw DataError("prediction for " + p.doc_id + " tag " + std::to_string(p.tag_id) +
                    " has token span outside the document");
  }
  CharRange range{tokens[p.start_token].range.begin, tokens[p.end_token].range.end};
  while (range.begin < range.end && IsSpaceChar(text.char_at(range.begin))) ++range.begin;
  while (range.end > range.begin && IsSpaceChar(text.char_at(range.end - 1))) --range.end;
  p.chars = range;
  p.value = text.Substr(range);
}

std::string NormalizeValue(std::string_view value) {
  const Utf8Text text(value);
  std::string out;
  bool pending_space = false;
  for (int64_t i = 0; i < text.char_count(); ++i) {
    if (IsSpaceChar(text.char_at(i))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.append(text.bytes().substr(text.ByteOffset(i), text.ByteOffset(i + 1) - text.ByteOffset(i)));
  }
  return out;
}

}  // namespace spanfield
