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

#ifndef SPANFIELD_TEXT_PRETRAIN_DATA_H_
#define SPANFIELD_TEXT_PRETRAIN_DATA_H_

#include <cstdint>
#include <vector>

#include "spanfield/text/windowing.h"

namespace spanfield {

// Token ids of each sentence of each document.
using SentenceCorpus = std::vector<std::vector<std::vector<int32_t>>>;

struct SentencePair {
  std::vector<int32_t> first;
  std::vector<int32_t> second;
  bool is_next = false;
  int64_t doc_index = 0;
  int64_t sentence_index = 0;

  bool operator==(const SentencePair&) const = default;
};

// One pair per consecutive-sentence slot of every document. With probability
// 0.5 the second sentence is the true successor (is_next); otherwise it is a
// uniformly drawn sentence of another document. Throws DataError with fewer
// than two documents or a document with fewer than two sentences.
std::vector<SentencePair> MakeNspPairs(const SentenceCorpus& corpus, uint64_t seed);

// [CLS] first [SEP] second [SEP], segment 0 through the first [SEP] and 1
// after. When the pair exceeds max_length the longer sentence loses tokens
// from its end. No padding; labels are all kIgnoreLabel.
PackedWindow PackPair(const SentencePair& pair, int64_t max_length);

// Appends [PAD] positions up to `length`.
void PadWindow(PackedWindow* window, int64_t length);

struct MaskedWindow {
  PackedWindow window;
  // Original ids at selected positions, kIgnoreLabel elsewhere.
  std::vector<int32_t> targets;
};

// Selects each non-special position with probability `rate`; a selected
// token becomes [MASK] (80%), a random non-reserved id (10%), or stays (10%).
MaskedWindow MaskTokens(const PackedWindow& window, int32_t vocab_size, uint64_t seed,
                        double rate = 0.15);

}  // namespace spanfield

#endif  // SPANFIELD_TEXT_PRETRAIN_DATA_H_
