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

#ifndef SPANFIELD_TEXT_CORPUS_GENERATOR_H_
#define SPANFIELD_TEXT_CORPUS_GENERATOR_H_

#include <cstdint>
#include <vector>

#include "spanfield/text/corpus.h"

namespace spanfield {

struct GeneratorOptions {
  int min_clauses = 20;
  int max_clauses = 60;
  // Chance of an unnumbered filler line after each clause.
  double filler_rate = 0.15;
  // Share of fillers that carry a same-dtype distractor value.
  double distractor_rate = 0.5;
  // Chance that a (document, tag) pair has no value.
  double absent_rate = 0.1;
  // Chance that a line keeps the subject (an item and its task) of the line
  // before it, so neighbouring sentences share vocabulary.
  double topic_continuity = 0.9;
  // Gold values never straddle the boundaries of non-overlapping windows of
  // this length (0 disables the check).
  int64_t window_length = 128;
};

// Eight tags: two dates, two addresses, organization, phone, money and the
// alphanumeric case code.
std::vector<TagSpec> DefaultSchema();

// Requires at least two date tags, two address tags and exactly one code
// tag; throws DataError otherwise.
void CheckGeneratorSchema(const std::vector<TagSpec>& schema);

// Tender-notice documents built from numbered clauses. Every present value is
// introduced by a cue phrase specific to its tag; filler lines may carry
// distractor values of the same dtype. Output depends only on the arguments.
Corpus GenerateCorpus(int64_t n_docs, const std::vector<TagSpec>& schema, uint64_t seed,
                      const GeneratorOptions& options = {});

}  // namespace spanfield

#endif  // SPANFIELD_TEXT_CORPUS_GENERATOR_H_
