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

// Exact-match scoring and the JSON forms of predictions and reports.

#ifndef SPANFIELD_EXTRACTION_EVALUATION_H_
#define SPANFIELD_EXTRACTION_EVALUATION_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "spanfield/extraction/span_decoder.h"
#include "spanfield/text/corpus.h"

namespace spanfield {

struct Scores {
  int64_t predicted = 0;  // non-abstained predictions
  int64_t correct = 0;
  int64_t gold = 0;       // (doc, tag) pairs with a gold value ("support")
  int64_t abstained = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct TagScores {
  int tag_id = 0;
  std::string tag_name;
  Scores scores;
};

struct EvalReport {
  std::vector<TagScores> tags;  // schema order
  Scores overall;               // micro-averaged

  const Scores& ForTag(int tag_id) const;
};

// A prediction is correct when it is not abstained, the pair has a gold
// value and the normalized strings agree. Precision divides by predictions,
// recall by gold values; both are 0 over an empty denominator, as is F1 when
// precision + recall = 0. Throws DataError for predictions naming a document
// outside `docs` or a tag outside the schema.
EvalReport Evaluate(std::span<const SpanPrediction> predictions,
                    const std::vector<const AnnotatedDocument*>& docs,
                    const std::vector<TagSpec>& schema);

// {"documents":[{"doc_id", "fields":[{"tag_id","tag_name","value",
// "char_start","char_end","score"}]}]}, documents ordered by doc_id and
// fields by tag_id. Abstained fields carry only tag_id, tag_name and a null
// value. Ends with a newline.
std::string PredictionsToJson(std::span<const SpanPrediction> predictions,
                              const std::vector<TagSpec>& schema);
// Inverse of PredictionsToJson; token indices are not serialized and come
// back as -1. Throws DataError on malformed input.
std::vector<SpanPrediction> PredictionsFromJson(std::string_view json);

std::string ReportToJson(const EvalReport& report);

}  // namespace spanfield

#endif  // SPANFIELD_EXTRACTION_EVALUATION_H_
