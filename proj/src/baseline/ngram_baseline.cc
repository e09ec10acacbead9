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

#include "spanfield/baseline/ngram_baseline.h"

#include <algorithm>
#include <bit>
#include <cmath>

#include "json.hpp"
#include "spanfield/errors.h"
#include "spanfield/random.h"
#include "spanfield/text/tokenizer.h"
#include "util/byte_io.h"

namespace spanfield {
namespace {

using Json = nlohmann::ordered_json;
using internal::PutBytes;
using internal::PutU32;
using internal::Reader;

constexpr char kMagic[4] = {'S', 'P', 'B', 'L'};
constexpr uint32_t kBaselineVersion = 1;
// Fixed offset basis perturbation so bucket assignment is stable across runs.
constexpr uint64_t kHashSeed = 0x5bd1e9955bd1e995ULL;

// Rejects constructs outside the documented subset: backreferences and
// lookaround.
void CheckPortable(const std::string& pattern) {
  for (size_t i = 0; i + 1 < pattern.size(); ++i) {
    if (pattern[i] == '\\') {
      const char next = pattern[i + 1];
      if (next >= '1' && next <= '9') {
        throw DataError("regex book: backreference in pattern '" + pattern + "'");
      }
      ++i;
      continue;
    }
    if (pattern[i] == '(' && pattern[i + 1] == '?') {
      throw DataError("regex book: lookaround or special group in pattern '" + pattern + "'");
    }
  }
}

void SoftmaxPair(const float* logits, double* p) {
  const double m = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - m);
  const double e1 = std::exp(logits[1] - m);
  p[0] = e0 / (e0 + e1);
  p[1] = e1 / (e0 + e1);
}

}  // namespace

// ---------------------------------------------------------------- features

NgramFeaturizer::NgramFeaturizer(int64_t dim) : dim_(dim) {
  if (dim < 1 || dim > (int64_t{1} << 30)) {
    throw ConfigError("n-gram feature dimension must be in [1, 2^30], got " + std::to_string(dim));
  }
}

std::vector<int32_t> NgramFeaturizer::Featurize(const std::vector<std::string>& tokens) const {
  std::vector<int32_t> out;
  const size_t len = tokens.size();
  for (size_t n = 1; n <= static_cast<size_t>(kMaxNgram); ++n) {
    for (size_t i = 0; i + n <= len; ++i) {
      std::string key(1, static_cast<char>('0' + n));
      for (size_t k = i; k < i + n; ++k) {
        key += '\x1f';
        key += tokens[k];
      }
      const uint64_t h = Fnv1a64(key) ^ kHashSeed;
      out.push_back(static_cast<int32_t>(MixBits(h) % static_cast<uint64_t>(dim_)));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// -------------------------------------------------------------- regex book

RegexBook RegexBook::FromJson(std::string_view json) {
  Json doc;
  try {
    doc = Json::parse(json);
  } catch (const Json::exception& e) {
    throw DataError(std::string("regex book: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("patterns") || !doc["patterns"].is_object()) {
    throw DataError("regex book: missing 'patterns' object");
  }
  if (doc.contains("version") && doc["version"] != 1) {
    throw DataError("regex book: unsupported version " + doc["version"].dump());
  }
  RegexBook book;
  for (const auto& [name, list] : doc["patterns"].items()) {
    const DType dtype = ParseDType(name);
    if (!list.is_array()) throw DataError("regex book: patterns of '" + name + "' must be a list");
    for (const auto& p : list) {
      if (!p.is_string()) throw DataError("regex book: non-string pattern for '" + name + "'");
      const std::string source = p.get<std::string>();
      CheckPortable(source);
      try {
        book.compiled_[dtype].emplace_back(source, std::regex::ECMAScript);
      } catch (const std::regex_error& e) {
        throw DataError("regex book: pattern '" + source + "' does not compile: " + e.what());
      }
      book.sources_[dtype].push_back(source);
    }
  }
  return book;
}

RegexBook RegexBook::Load(const std::filesystem::path& path) {
  return FromJson(ReadTextFile(path));
}

RegexBook RegexBook::Default() {
  return Load(std::filesystem::path(SPANFIELD_DATA_DIR) / "regexbook.json");
}

std::optional<std::pair<size_t, size_t>> RegexBook::Match(DType dtype,
                                                          std::string_view text) const {
  const auto it = compiled_.find(dtype);
  if (it == compiled_.end()) return std::nullopt;
  for (const std::regex& re : it->second) {
    std::match_results<std::string_view::const_iterator> m;
    if (std::regex_search(text.begin(), text.end(), m, re) && m.length(0) > 0) {
      const auto begin = static_cast<size_t>(m.position(0));
      return std::make_pair(begin, begin + static_cast<size_t>(m.length(0)));
    }
  }
  return std::nullopt;
}

const std::vector<std::string>& RegexBook::Sources(DType dtype) const {
  static const std::vector<std::string> kNone;
  const auto it = sources_.find(dtype);
  return it == sources_.end() ? kNone : it->second;
}

// -------------------------------------------------------------- classifier

void SentenceMlpConfig::Validate() const {
  if (hidden < 1) throw ConfigError("baseline hidden size must be >= 1");
  if (epochs < 1) throw ConfigError("baseline epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("baseline batch_size must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("baseline learning_rate must be finite and >= 0");
  }
}

SentenceClassifier::SentenceClassifier(int64_t dim, int64_t hidden) : dim_(dim), hidden_(hidden) {
  if (dim < 1 || hidden < 1) throw ConfigError("sentence classifier needs dim, hidden >= 1");
  params_.Add("w1", {dim, hidden});
  params_.Add("b1", {hidden});
  params_.Add("w2", {hidden, 2});
  params_.Add("b2", {2});
}

void SentenceClassifier::Initialize(uint64_t seed) {
  Rng rng(seed);
  // Inputs are sums over a few dozen active features, so the first layer
  // uses a small per-feature scale.
  const double s1 = 1.0 / std::sqrt(64.0);
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_));
  for (float& v : params_.Get("w1").value.values()) v = static_cast<float>(rng.TruncatedNormal(s1));
  for (float& v : params_.Get("w2").value.values()) v = static_cast<float>(rng.TruncatedNormal(s2));
  params_.Get("b1").value.Fill(0.0f);
  params_.Get("b2").value.Fill(0.0f);
}

std::vector<float> SentenceClassifier::Hidden(const std::vector<int32_t>& features) const {
  const float* w1 = params_.Get("w1").value.data();
  const float* b1 = params_.Get("b1").value.data();
  std::vector<float> h(b1, b1 + hidden_);
  for (int32_t f : features) {
    if (f < 0 || f >= dim_) throw DataError("feature bucket out of range: " + std::to_string(f));
    const float* row = w1 + static_cast<int64_t>(f) * hidden_;
    for (int64_t j = 0; j < hidden_; ++j) h[j] += row[j];
  }
  return h;  // pre-activation
}

std::vector<float> SentenceClassifier::Logits(const std::vector<int32_t>& features) const {
  const std::vector<float> pre = Hidden(features);
  const float* w2 = params_.Get("w2").value.data();
  const float* b2 = params_.Get("b2").value.data();
  std::vector<float> logits(b2, b2 + 2);
  for (int64_t j = 0; j < hidden_; ++j) {
    const float a = std::max(pre[j], 0.0f);
    logits[0] += a * w2[2 * j];
    logits[1] += a * w2[2 * j + 1];
  }
  return logits;
}

double SentenceClassifier::PositiveProbability(const std::vector<int32_t>& features) const {
  const std::vector<float> logits = Logits(features);
  double p[2];
  SoftmaxPair(logits.data(), p);
  return p[1];
}

double SentenceClassifier::AccumulateGradient(const SentenceExample& example, double scale) {
  if (example.label != 0 && example.label != 1) {
    throw DataError("sentence label must be 0 or 1, got " + std::to_string(example.label));
  }
  const std::vector<float> pre = Hidden(example.features);
  const float* w2 = params_.Get("w2").value.data();
  const float* b2 = params_.Get("b2").value.data();
  float logits[2] = {b2[0], b2[1]};
  for (int64_t j = 0; j < hidden_; ++j) {
    const float a = std::max(pre[j], 0.0f);
    logits[0] += a * w2[2 * j];
    logits[1] += a * w2[2 * j + 1];
  }
  double p[2];
  SoftmaxPair(logits, p);
  const double loss = -std::log(std::max(p[example.label], 1e-300));
  const float d0 = static_cast<float>((p[0] - (example.label == 0 ? 1.0 : 0.0)) * scale);
  const float d1 = static_cast<float>((p[1] - (example.label == 1 ? 1.0 : 0.0)) * scale);

  float* gw2 = params_.Get("w2").grad.data();
  float* gb2 = params_.Get("b2").grad.data();
  float* gw1 = params_.Get("w1").grad.data();
  float* gb1 = params_.Get("b1").grad.data();
  gb2[0] += d0;
  gb2[1] += d1;
  std::vector<float> dh(hidden_);
  for (int64_t j = 0; j < hidden_; ++j) {
    const float a = std::max(pre[j], 0.0f);
    gw2[2 * j] += a * d0;
    gw2[2 * j + 1] += a * d1;
    dh[j] = pre[j] > 0.0f ? w2[2 * j] * d0 + w2[2 * j + 1] * d1 : 0.0f;
    gb1[j] += dh[j];
  }
  for (int32_t f : example.features) {
    float* row = gw1 + static_cast<int64_t>(f) * hidden_;
    for (int64_t j = 0; j < hidden_; ++j) row[j] += dh[j];
  }
  return loss;
}

SentenceClassifier TrainSentenceMlp(const std::vector<SentenceExample>& examples, int64_t dim,
                                    const SentenceMlpConfig& config, SentenceTrainStats* stats,
                                    std::ostream* warnings) {
  config.Validate();
  SentenceClassifier clf(dim, config.hidden);
  clf.Initialize(DeriveSeed(config.seed, 0));
  SentenceTrainStats local;
  int64_t positives = 0;
  for (const auto& e : examples) positives += e.label == 1 ? 1 : 0;
  const auto n = static_cast<int64_t>(examples.size());
  local.degenerate_labels = positives == 0 || positives == n;
  if (local.degenerate_labels && warnings != nullptr) {
    *warnings << "warning: degenerate sentence labels (" << positives << " positive of " << n
              << "); training anyway\n";
  }
  AdamOptions adam;
  adam.learning_rate = config.learning_rate;
  clf.params().ZeroGrad();
  for (int64_t epoch = 0; epoch < config.epochs && n > 0; ++epoch) {
    Rng shuffle(DeriveSeed(config.seed, static_cast<uint64_t>(epoch) + 1));
    const std::vector<int64_t> order = shuffle.Permutation(n);
    double loss_sum = 0.0;
    for (int64_t begin = 0; begin < n; begin += config.batch_size) {
      const int64_t end = std::min(n, begin + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - begin);
      for (int64_t i = begin; i < end; ++i) {
        loss_sum += clf.AccumulateGradient(examples[order[i]], scale);
      }
      AdamUpdate(&clf.params(), adam);
    }
    const double mean = loss_sum / static_cast<double>(n);
    if (!std::isfinite(mean)) {
      throw NumericError("baseline training loss is not finite at epoch " +
                         std::to_string(epoch + 1));
    }
    local.epoch_losses.push_back(mean);
  }
  int64_t correct = 0;
  for (const auto& e : examples) {
    correct += ((clf.PositiveProbability(e.features) > 0.5) == (e.label == 1)) ? 1 : 0;
  }
  local.train_accuracy = n > 0 ? static_cast<double>(correct) / static_cast<double>(n) : 0.0;
  if (stats != nullptr) *stats = std::move(local);
  return clf;
}

// -------------------------------------------------------------- extraction

std::vector<std::vector<std::string>> SentenceTokens(const AnnotatedDocument& doc) {
  const Utf8Text text(doc.text);
  std::vector<std::vector<std::string>> out;
  out.reserve(doc.sentences.size());
  for (const CharRange& range : doc.sentences) {
    std::vector<std::string> words;
    for (const Token& t : Tokenize(text.Substr(range))) words.push_back(t.text);
    out.push_back(std::move(words));
  }
  return out;
}

std::vector<SentenceExample> SentenceExamples(const std::vector<const AnnotatedDocument*>& docs,
                                              int tag_id, const NgramFeaturizer& featurizer) {
  std::vector<SentenceExample> out;
  for (const AnnotatedDocument* doc : docs) {
    std::optional<CharRange> gold;
    const auto it = doc->gold.find(tag_id);
    if (it != doc->gold.end() && it->second) gold = it->second->span;
    const auto tokens = SentenceTokens(*doc);
    for (size_t s = 0; s < doc->sentences.size(); ++s) {
      const CharRange& r = doc->sentences[s];
      SentenceExample e;
      e.features = featurizer.Featurize(tokens[s]);
      e.label = gold && r.begin <= gold->begin && gold->end <= r.end ? 1 : 0;
      out.push_back(std::move(e));
    }
  }
  return out;
}

SpanPrediction BaselineExtract(const AnnotatedDocument& doc, const TagSpec& tag,
                               const SentenceClassifier& classifier,
                               const NgramFeaturizer& featurizer, const RegexBook& book) {
  SpanPrediction pred;
  pred.doc_id = doc.doc_id;
  pred.tag_id = tag.tag_id;
  const auto tokens = SentenceTokens(doc);
  int64_t best = -1;
  double best_p = 0.5;
  for (size_t s = 0; s < tokens.size(); ++s) {
    const double p = classifier.PositiveProbability(featurizer.Featurize(tokens[s]));
    if (p > best_p) {
      best_p = p;
      best = static_cast<int64_t>(s);
    }
  }
  if (best < 0) return pred;

  const Utf8Text text(doc.text);
  const CharRange sentence = doc.sentences[best];
  const std::string sentence_text = text.Substr(sentence);
  const auto match = book.Match(tag.dtype, sentence_text);
  if (!match) return pred;
  const int64_t base = text.ByteOffset(sentence.begin);
  pred.chars = {text.CharIndexOfByte(base + static_cast<int64_t>(match->first)),
                text.CharIndexOfByte(base + static_cast<int64_t>(match->second))};
  pred.value = text.Substr(pred.chars);
  pred.score = best_p;
  pred.abstained = false;
  const std::vector<Token> doc_tokens = Tokenize(text);
  for (size_t i = 0; i < doc_tokens.size(); ++i) {
    const CharRange& r = doc_tokens[i].range;
    if (r.end <= pred.chars.begin || r.begin >= pred.chars.end) continue;
    if (pred.start_token < 0) pred.start_token = static_cast<int64_t>(i);
    pred.end_token = static_cast<int64_t>(i);
  }
  return pred;
}

BaselineModel TrainBaseline(const std::vector<const AnnotatedDocument*>& docs,
                            const std::vector<TagSpec>& schema, const SentenceMlpConfig& config,
                            int64_t dim, BaselineTrainReport* report, std::ostream* warnings) {
  ValidateSchema(schema);
  BaselineModel model;
  model.schema = schema;
  model.dim = dim;
  model.config = config;
  const NgramFeaturizer featurizer(dim);
  for (const TagSpec& tag : schema) {
    SentenceMlpConfig c = config;
    c.seed = DeriveSeed(config.seed, static_cast<uint64_t>(tag.tag_id));
    SentenceTrainStats stats;
    model.classifiers.emplace(
        tag.tag_id,
        TrainSentenceMlp(SentenceExamples(docs, tag.tag_id, featurizer), dim, c, &stats, warnings));
    if (report != nullptr) report->per_tag[tag.tag_id] = std::move(stats);
  }
  return model;
}

std::vector<SpanPrediction> BaselineExtractAll(const BaselineModel& model,
                                               const std::vector<const AnnotatedDocument*>& docs,
                                               const RegexBook& book) {
  const NgramFeaturizer featurizer(model.dim);
  std::vector<SpanPrediction> out;
  for (const AnnotatedDocument* doc : docs) {
    for (const TagSpec& tag : model.schema) {
      out.push_back(BaselineExtract(*doc, tag, model.classifiers.at(tag.tag_id), featurizer, book));
    }
  }
  return out;
}

// ----------------------------------------------------------- serialization

std::string SerializeBaseline(const BaselineModel& model) {
  Json header;
  header["schema"] = Json::parse(SchemaToJson(model.schema));
  header["dim"] = model.dim;
  header["config"] = Json{{"hidden", model.config.hidden},
                          {"epochs", model.config.epochs},
                          {"batch_size", model.config.batch_size},
                          {"learning_rate", model.config.learning_rate},
                          {"seed", model.config.seed}};
  Json tags = Json::array();
  for (const auto& [tag_id, clf] : model.classifiers) tags.push_back(tag_id);
  header["classifiers"] = tags;

  std::string out(kMagic, 4);
  PutU32(&out, kBaselineVersion);
  PutBytes(&out, header.dump());
  for (const auto& [tag_id, clf] : model.classifiers) {
    for (const auto& t : clf.params().tensors()) {
      for (float v : t.value.values()) PutU32(&out, std::bit_cast<uint32_t>(v));
    }
  }
  return out;
}

BaselineModel ParseBaseline(std::string_view bytes, const std::string& source) {
  Reader r(bytes, source);
  if (r.Take(4, "magic") != std::string_view(kMagic, 4)) r.Fail("bad magic, not a baseline model");
  const uint32_t version = r.U32("version");
  if (version != kBaselineVersion) r.Fail("unsupported version " + std::to_string(version));
  BaselineModel model;
  try {
    const Json header = Json::parse(r.Bytes("header"));
    model.schema = SchemaFromJson(header.at("schema").dump());
    model.dim = header.at("dim").get<int64_t>();
    const Json& c = header.at("config");
    model.config.hidden = c.at("hidden").get<int64_t>();
    model.config.epochs = c.at("epochs").get<int64_t>();
    model.config.batch_size = c.at("batch_size").get<int64_t>();
    model.config.learning_rate = c.at("learning_rate").get<double>();
    model.config.seed = c.at("seed").get<uint64_t>();
    if (model.dim < 1 || model.dim > (int64_t{1} << 30) || model.config.hidden < 1 ||
        model.config.hidden > 4096) {
      r.Fail("implausible classifier shape");
    }
    for (const auto& id : header.at("classifiers")) {
      SentenceClassifier clf(model.dim, model.config.hidden);
      for (auto& t : clf.params().tensors()) {
        const std::string_view raw = r.Take(4 * t.value.values().size(), "classifier values");
        float* dst = t.value.data();
        for (size_t i = 0; i < t.value.values().size(); ++i) {
          uint32_t u = 0;
          for (int b = 3; b >= 0; --b) u = (u << 8) | static_cast<uint8_t>(raw[4 * i + b]);
          dst[i] = std::bit_cast<float>(u);
        }
      }
      model.classifiers.emplace(id.get<int>(), std::move(clf));
    }
  } catch (const Json::exception& e) {
    r.Fail(std::string("bad header: ") + e.what());
  }
  if (!r.AtEnd()) r.Fail("trailing bytes after classifier values");
  for (const TagSpec& tag : model.schema) {
    if (!model.classifiers.count(tag.tag_id)) {
      r.Fail("no classifier for tag " + std::to_string(tag.tag_id));
    }
  }
  return model;
}

void SaveBaseline(const BaselineModel& model, const std::filesystem::path& path) {
  WriteTextFile(path, SerializeBaseline(model));
}

BaselineModel LoadBaseline(const std::filesystem::path& path) {
  return ParseBaseline(ReadTextFile(path), path.string());
}

}  // namespace spanfield
