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

#ifndef SPANFIELD_EXTRACTION_EXTRACTOR_H_
#define SPANFIELD_EXTRACTION_EXTRACTOR_H_

#include <cstdint>
#include <vector>

#include "spanfield/extraction/span_decoder.h"
#include "spanfield/model/model.h"
#include "spanfield/text/corpus.h"
#include "spanfield/text/vocab.h"

namespace spanfield {

struct ExtractOptions {
  int64_t max_span = kDefaultMaxSpan;
  int64_t batch_size = 32;
};

// One prediction per schema tag for `doc`, in schema order: windows of the
// document for every tag, an inference-mode forward pass, per-window
// decoding, aggregation and text recovery.
std::vector<SpanPrediction> ExtractDocument(const Model<float>& model, const Vocab& vocab,
                                            const std::vector<TagSpec>& schema,
                                            const AnnotatedDocument& doc,
                                            const ExtractOptions& options = {});

// Document-major concatenation of ExtractDocument over `docs`.
std::vector<SpanPrediction> ExtractAll(const Model<float>& model, const Vocab& vocab,
                                       const std::vector<TagSpec>& schema,
                                       const std::vector<const AnnotatedDocument*>& docs,
                                       const ExtractOptions& options = {});

}  // namespace spanfield

#endif  // SPANFIELD_EXTRACTION_EXTRACTOR_H_
