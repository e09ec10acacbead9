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

#include "spanfield/text/pretrain_data.h"

#include <algorithm>
#include <string>

#include "spanfield/errors.h"
#include "spanfield/random.h"
#include "spanfield/text/vocab.h"

namespace spanfield {

std::vector<SentencePair> MakeNspPairs(const SentenceCorpus& corpus, uint64_t seed) {
  if (corpus.size() < 2) {
    throw DataError("next-sentence pairs need at least 2 documents for negative sampling");
  }
  std::vector<int64_t> offsets = {0};
  for (size_t d = 0; d < corpus.size(); ++d) {
    if (corpus[d].size() < 2) {
      throw DataError("document " + std::to_string(d) + " has fewer than 2 sentences");
    }
    offsets.push_back(offsets.back() + static_cast<int64_t>(corpus[d].size()));
  }
  const int64_t total = offsets.back();

  Rng rng(seed);
  std::vector<SentencePair> pairs;
  for (size_t d = 0; d < corpus.size(); ++d) {
    const auto& doc = corpus[d];
    const int64_t own = offsets[d + 1] - offsets[d];
    for (size_t i = 0; i + 1 < doc.size(); ++i) {
      SentencePair pair;
      pair.first = doc[i];
      pair.doc_index = static_cast<int64_t>(d);
      pair.sentence_index = static_cast<int64_t>(i);
      pair.is_next = rng.Bernoulli(0.5);
      if (pair.is_next) {
        pair.second = doc[i + 1];
      } else {
        int64_t k = static_cast<int64_t>(rng.UniformInt(static_cast<uint64_t>(total - own)));
        if (k >= offsets[d]) k += own;
        const auto other = static_cast<size_t>(
            std::upper_bound(offsets.begin(), offsets.end(), k) - offsets.begin() - 1);
        pair.second = corpus[other][k - offsets[other]];
      }
      pairs.push_back(std::move(pair));
    }
  }
  return pairs;
}

PackedWindow PackPair(const SentencePair& pair, int64_t max_length) {
  if (max_length < 5) throw ConfigError("sentence pairs need max_length >= 5");
  auto a_len = static_cast<int64_t>(pair.first.size());
  auto b_len = static_cast<int64_t>(pair.second.size());
  while (a_len + b_len + 3 > max_length) {
    if (a_len >= b_len) {
      --a_len;
    } else {
      --b_len;
    }
  }
  PackedWindow w;
  auto push = [&w](int32_t id, int32_t segment) {
    w.token_ids.push_back(id);
    w.segment_ids.push_back(segment);
    w.labels.push_back(kIgnoreLabel);
    w.pad_mask.push_back(0);
  };
  push(kClsId, 0);
  for (int64_t i = 0; i < a_len; ++i) push(pair.first[i], 0);
  push(kSepId, 0);
  w.doc_offset = w.length();
  for (int64_t i = 0; i < b_len; ++i) push(pair.second[i], 1);
  push(kSepId, 1);
  w.doc_end = b_len;
  w.position_ids.resize(w.length());
  for (int64_t i = 0; i < w.length(); ++i) w.position_ids[i] = static_cast<int32_t>(i);
  return w;
}

void PadWindow(PackedWindow* window, int64_t length) {
  for (int64_t i = window->length(); i < length; ++i) {
    window->token_ids.push_back(kPadId);
    window->segment_ids.push_back(0);
    window->position_ids.push_back(static_cast<int32_t>(i));
    window->pad_mask.push_back(1);
    window->labels.push_back(kIgnoreLabel);
  }
}

MaskedWindow MaskTokens(const PackedWindow& window, int32_t vocab_size, uint64_t seed,
                        double rate) {
  if (vocab_size <= kNumReservedIds) throw ConfigError("vocabulary has no ordinary tokens");
  MaskedWindow out{window, std::vector<int32_t>(window.token_ids.size(), kIgnoreLabel)};
  Rng rng(seed);
  for (size_t i = 0; i < window.token_ids.size(); ++i) {
    const int32_t id = window.token_ids[i];
    if (window.pad_mask[i] || id == kPadId || id == kClsId || id == kSepId || id == kMaskId) {
      continue;
    }
    if (!rng.Bernoulli(rate)) continue;
    out.targets[i] = id;
    const double r = rng.Uniform();
    if (r < 0.8) {
      out.window.token_ids[i] = kMaskId;
    } else if (r < 0.9) {
      out.window.token_ids[i] = kNumReservedIds + static_cast<int32_t>(rng.UniformInt(
                                                      static_cast<uint64_t>(vocab_size - kNumReservedIds)));
    }
  }
  return out;
}

}  // namespace spanfield
