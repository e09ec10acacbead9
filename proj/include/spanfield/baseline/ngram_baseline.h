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

// Feature-based extractor: hashed n-gram sentence features, one small MLP per
// tag that finds the sentence holding the value, then per-dtype regular
// expressions inside that sentence.

#ifndef SPANFIELD_BASELINE_NGRAM_BASELINE_H_
#define SPANFIELD_BASELINE_NGRAM_BASELINE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "spanfield/extraction/span_decoder.h"
#include "spanfield/numeric/params.h"
#include "spanfield/text/corpus.h"

namespace spanfield {

inline constexpr int64_t kDefaultHashDim = int64_t{1} << 14;
inline constexpr int kMaxNgram = 4;

// Presence indicators of hashed 1..4-grams.
class NgramFeaturizer {
 public:
  explicit NgramFeaturizer(int64_t dim = kDefaultHashDim);

  int64_t dim() const { return dim_; }

  // Sorted, distinct active buckets. Colliding n-grams share a bucket.
  std::vector<int32_t> Featurize(const std::vector<std::string>& tokens) const;

 private:
  int64_t dim_;
};

// Ordered extraction patterns per dtype; the first pattern with a match wins.
class RegexBook {
 public:
  // {"version": 1, "patterns": {"<dtype>": ["<pattern>", ...], ...}}.
  // Throws DataError on malformed records, unknown dtypes, patterns outside
  // the portable subset or patterns that do not compile.
  static RegexBook FromJson(std::string_view json);
  static RegexBook Load(const std::filesystem::path& path);
  // The book shipped in data/regexbook.json.
  static RegexBook Default();

  // Byte range [first, second) of the first match in `text`.
  std::optional<std::pair<size_t, size_t>> Match(DType dtype, std::string_view text) const;

  const std::vector<std::string>& Sources(DType dtype) const;

 private:
  std::map<DType, std::vector<std::string>> sources_;
  std::map<DType, std::vector<std::regex>> compiled_;
};

struct SentenceMlpConfig {
  int64_t hidden = 64;
  int64_t epochs = 10;
  int64_t batch_size = 128;
  double learning_rate = 1e-3;
  uint64_t seed = 0;

  // Throws ConfigError.
  void Validate() const;
};

struct SentenceExample {
  std::vector<int32_t> features;
  int32_t label = 0;  // 1 when the sentence holds the gold value
};

// D -> hidden -> 2 perceptron over sparse binary features.
class SentenceClassifier {
 public:
  SentenceClassifier(int64_t dim, int64_t hidden);

  // Truncated-normal weights (std 1/8 for the sparse first layer,
  // 1/sqrt(hidden) for the second), zero biases.
  void Initialize(uint64_t seed);

  // Logits [2] of one example.
  std::vector<float> Logits(const std::vector<int32_t>& features) const;
  // Probability of the positive class.
  double PositiveProbability(const std::vector<int32_t>& features) const;

  // Adds the gradient of cross-entropy(Logits(features), label) * scale.
  // Returns the unscaled loss.
  double AccumulateGradient(const SentenceExample& example, double scale);

  int64_t dim() const { return dim_; }
  int64_t hidden() const { return hidden_; }
  ParamStore<float>& params() { return params_; }
  const ParamStore<float>& params() const { return params_; }

 private:
  std::vector<float> Hidden(const std::vector<int32_t>& features) const;

  int64_t dim_;
  int64_t hidden_;
  ParamStore<float> params_;
};

struct SentenceTrainStats {
  std::vector<double> epoch_losses;
  double train_accuracy = 0.0;
  // True when every label is the same class; training still runs.
  bool degenerate_labels = false;
};

// Mini-batch Adam on the mean cross-entropy, shuffled per epoch under the
// seed. A warning goes to `warnings` (when set) for degenerate labels.
SentenceClassifier TrainSentenceMlp(const std::vector<SentenceExample>& examples, int64_t dim,
                                    const SentenceMlpConfig& config,
                                    SentenceTrainStats* stats = nullptr,
                                    std::ostream* warnings = nullptr);

// Token texts of every sentence of `doc`.
std::vector<std::vector<std::string>> SentenceTokens(const AnnotatedDocument& doc);

// One example per sentence of `docs`: positive when the sentence fully
// contains the gold value of `tag_id`.
std::vector<SentenceExample> SentenceExamples(const std::vector<const AnnotatedDocument*>& docs,
                                              int tag_id, const NgramFeaturizer& featurizer);

// The most probable sentence, if its positive probability exceeds 0.5, then
// the first regex match of the tag's dtype inside it. Abstains otherwise.
SpanPrediction BaselineExtract(const AnnotatedDocument& doc, const TagSpec& tag,
                               const SentenceClassifier& classifier,
                               const NgramFeaturizer& featurizer, const RegexBook& book);

// One classifier per schema tag.
struct BaselineModel {
  std::vector<TagSpec> schema;
  int64_t dim = kDefaultHashDim;
  SentenceMlpConfig config;
  std::map<int, SentenceClassifier> classifiers;
};

struct BaselineTrainReport {
  std::map<int, SentenceTrainStats> per_tag;
};

BaselineModel TrainBaseline(const std::vector<const AnnotatedDocument*>& docs,
                            const std::vector<TagSpec>& schema, const SentenceMlpConfig& config,
                            int64_t dim = kDefaultHashDim, BaselineTrainReport* report = nullptr,
                            std::ostream* warnings = nullptr);

// Document-major, schema-ordered predictions.
std::vector<SpanPrediction> BaselineExtractAll(const BaselineModel& model,
                                               const std::vector<const AnnotatedDocument*>& docs,
                                               const RegexBook& book);

// Binary container: "SPBL", u32 version, u32-prefixed JSON header, then the
// float32 little-endian values of every classifier tensor in header order.
std::string SerializeBaseline(const BaselineModel& model);
BaselineModel ParseBaseline(std::string_view bytes, const std::string& source = "baseline");
void SaveBaseline(const BaselineModel& model, const std::filesystem::path& path);
BaselineModel LoadBaseline(const std::filesystem::path& path);

}  // namespace spanfield

#endif  // SPANFIELD_BASELINE_NGRAM_BASELINE_H_
