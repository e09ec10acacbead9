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

#include "spanfield/extraction/extractor.h"

#include <algorithm>

#include "spanfield/numeric/ops.h"
#include "spanfield/text/windowing.h"

namespace spanfield {

std::vector<SpanPrediction> ExtractDocument(const Model<float>& model, const Vocab& vocab,
                                            const std::vector<TagSpec>& schema,
                                            const AnnotatedDocument& doc,
                                            const ExtractOptions& options) {
  const int64_t length = model.config().window_length;
  const Utf8Text text(doc.text);
  const std::vector<Token> tokens = Tokenize(text);
  const std::vector<int32_t> ids = vocab.Encode(tokens);

  std::vector<std::vector<PackedWindow>> per_tag;
  std::vector<const PackedWindow*> all;
  per_tag.reserve(schema.size());
  for (const TagSpec& tag : schema) {
    const std::vector<int32_t> tag_ids = vocab.Encode(Tokenize(tag.name));
    const int64_t capacity = WindowCapacity(length, static_cast<int64_t>(tag_ids.size()));
    per_tag.push_back(WindowDocument(ids, tag_ids, length, capacity));
  }
  for (const auto& windows : per_tag) {
    for (const auto& w : windows) all.push_back(&w);
  }

  // Class probabilities of every window, in the order of `all`.
  std::vector<float> probs(all.size() * length * 3);
  for (size_t begin = 0; begin < all.size(); begin += options.batch_size) {
    const size_t end = std::min(all.size(), begin + static_cast<size_t>(options.batch_size));
    const InputBatch batch = InputBatch::FromWindows(
        std::span<const PackedWindow* const>(all.data() + begin, end - begin));
    const NumArray<float> p = SoftmaxForward(model.SpanHeadForward(model.Encode(batch)));
    std::copy(p.data(), p.data() + p.size(), probs.begin() + begin * length * 3);
  }

  std::vector<SpanPrediction> out;
  size_t offset = 0;
  for (size_t t = 0; t < schema.size(); ++t) {
    const auto& windows = per_tag[t];
    std::vector<WindowCandidate> candidates;
    for (size_t i = 0; i < windows.size(); ++i, ++offset) {
      const PackedWindow& w = windows[i];
      candidates.push_back(DecodeWindow(
          std::span<const float>(probs.data() + offset * length * 3, length * 3), length,
          w.doc_offset, w.doc_token_count(), options.max_span));
    }
    SpanPrediction p = Aggregate(candidates, windows, doc.doc_id, schema[t].tag_id);
    RecoverText(text, tokens, &p);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<SpanPrediction> ExtractAll(const Model<float>& model, const Vocab& vocab,
                                       const std::vector<TagSpec>& schema,
                                       const std::vector<const AnnotatedDocument*>& docs,
                                       const ExtractOptions& options) {
  std::vector<SpanPrediction> out;
  for (const AnnotatedDocument* doc : docs) {
    for (auto& p : ExtractDocument(model, vocab, schema, *doc, options)) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace spanfield
