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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "spanfield/errors.h"
#include "spanfield/extraction/evaluation.h"
#include "spanfield/extraction/extractor.h"
#include "spanfield/extraction/span_decoder.h"
#include "spanfield/random.h"
#include "spanfield/text/corpus_generator.h"
#include "spanfield/training/trainer.h"

namespace spanfield {
namespace {

// Rows of (irr, start, end) from separate start/end columns.
std::vector<float> Rows(const std::vector<float>& start, const std::vector<float>& end) {
  std::vector<float> p;
  for (size_t i = 0; i < start.size(); ++i) {
    p.push_back(1.0f - start[i] - end[i]);
    p.push_back(start[i]);
    p.push_back(end[i]);
  }
  return p;
}

// Exhaustive search in lexicographic (s, e) order, keeping the first maximum.
WindowCandidate BruteForce(const std::vector<float>& p, int64_t offset, int64_t count,
                           int64_t max_span) {
  WindowCandidate best;
  bool have = false;
  for (int64_t s = offset; s < offset + count; ++s) {
    for (int64_t e = s; e < offset + count && e <= s + max_span - 1; ++e) {
      const double score = static_cast<double>(p[3 * s + 1]) * static_cast<double>(p[3 * e + 2]);
      if (!have || score > best.score) {
        best = WindowCandidate{s, e, score, false};
        have = true;
      }
    }
  }
  best.abstained = !(p[3 * best.start + 1] > p[3 * best.start]) ||
                   !(p[3 * best.end + 2] > p[3 * best.end]);
  return best;
}

// ------------------------------------------------------------------ decode

TEST_CASE("decode: four-token example") {
  const auto p = Rows({0.1f, 0.7f, 0.1f, 0.1f}, {0.1f, 0.1f, 0.6f, 0.2f});
  const WindowCandidate c = DecodeWindow(p, 4, 0, 4);
  CHECK(c.start == 1);
  CHECK(c.end == 2);
  CHECK(c.score == doctest::Approx(0.42).epsilon(1e-6));
  CHECK_FALSE(c.abstained);
}

TEST_CASE("decode: uniform probabilities abstain on the tie") {
  const std::vector<float> p(3 * 6, 1.0f / 3.0f);
  CHECK(DecodeWindow(p, 6, 1, 4).abstained);
}

TEST_CASE("decode: single-token spans and document positions only") {
  // Strong start and end on token 2; a stronger pair outside the document.
  auto p = Rows({0.5f, 0.0f, 0.6f, 0.0f, 0.0f}, {0.5f, 0.0f, 0.3f, 0.0f, 0.0f});
  const WindowCandidate c = DecodeWindow(p, 5, 1, 4);
  CHECK(c.start == 2);
  CHECK(c.end == 2);
  CHECK_FALSE(c.abstained);
}

TEST_CASE("decode: max_span bounds the pair") {
  const auto p = Rows({0.9f, 0.0f, 0.0f, 0.0f}, {0.0f, 0.0f, 0.0f, 0.9f});
  const WindowCandidate wide = DecodeWindow(p, 4, 0, 4, 4);
  CHECK(wide.start == 0);
  CHECK(wide.end == 3);
  const WindowCandidate narrow = DecodeWindow(p, 4, 0, 4, 3);
  CHECK(narrow.end - narrow.start <= 2);
  CHECK(narrow.abstained);
}

TEST_CASE("decode: errors") {
  const std::vector<float> p(12, 1.0f / 3.0f);
  CHECK_THROWS_AS(DecodeWindow(p, 4, 2, 0), DataError);
  CHECK_THROWS_AS(DecodeWindow(p, 4, 0, 4, 0), ConfigError);
  CHECK_THROWS_AS(DecodeWindow(p, 4, 2, 3), DimensionError);
}

TEST_CASE("decode: matches exhaustive search on 1000 random matrices") {
  Rng rng(2024);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int64_t length = 1 + static_cast<int64_t>(rng.UniformInt(20));
    const int64_t offset = static_cast<int64_t>(rng.UniformInt(length));
    const int64_t count = 1 + static_cast<int64_t>(rng.UniformInt(length - offset));
    const int64_t max_span = 1 + static_cast<int64_t>(rng.UniformInt(8));
    std::vector<float> p(3 * length);
    for (int64_t i = 0; i < length; ++i) {
      // Skewed draws so that both abstaining and confident rows occur.
      double a = rng.Uniform(), b = rng.Uniform() * 2, c = rng.Uniform() * 2;
      const double sum = a + b + c;
      p[3 * i] = static_cast<float>(a / sum);
      p[3 * i + 1] = static_cast<float>(b / sum);
      p[3 * i + 2] = static_cast<float>(c / sum);
    }
    const WindowCandidate fast = DecodeWindow(p, length, offset, count, max_span);
    const WindowCandidate slow = BruteForce(p, offset, count, max_span);
    if (!(fast == slow)) ++mismatches;
  }
  CHECK(mismatches == 0);
}

// --------------------------------------------------------------- aggregate

std::vector<PackedWindow> TwoWindows() {
  std::vector<PackedWindow> w(2);
  w[0].doc_begin = 0;
  w[0].doc_end = 6;
  w[0].doc_offset = 4;
  w[0].window_index = 0;
  w[1].doc_begin = 6;
  w[1].doc_end = 10;
  w[1].doc_offset = 4;
  w[1].window_index = 1;
  return w;
}

TEST_CASE("aggregate: identity, max rule, tie rule and abstention") {
  const auto windows = TwoWindows();
  const std::vector<PackedWindow> one(windows.begin(), windows.begin() + 1);
  const WindowCandidate a{5, 6, 0.3, false};
  const WindowCandidate b{4, 5, 0.5, false};

  SpanPrediction p = Aggregate(std::vector<WindowCandidate>{a}, one, "d", 3);
  CHECK_FALSE(p.abstained);
  CHECK(p.start_token == 1);
  CHECK(p.end_token == 2);
  CHECK(p.score == 0.3);
  CHECK(p.doc_id == "d");
  CHECK(p.tag_id == 3);

  p = Aggregate(std::vector<WindowCandidate>{a, b}, windows, "d", 3);
  CHECK(p.start_token == 6);
  CHECK(p.end_token == 7);

  const WindowCandidate tie{4, 4, 0.3, false};
  p = Aggregate(std::vector<WindowCandidate>{a, tie}, windows, "d", 3);
  CHECK(p.start_token == 1);

  WindowCandidate off = b;
  off.abstained = true;
  p = Aggregate(std::vector<WindowCandidate>{a, off}, windows, "d", 3);
  CHECK(p.start_token == 1);
  WindowCandidate off_a = a;
  off_a.abstained = true;
  p = Aggregate(std::vector<WindowCandidate>{off_a, off}, windows, "d", 3);
  CHECK(p.abstained);
  CHECK(p.start_token == -1);
}

// ------------------------------------------------------------ recover text

TEST_CASE("recover: substring, single token and interior whitespace") {
  const std::string doc = "Bids open 04/01/2019 at  Kita  Ward office.";
  const Utf8Text text(doc);
  const std::vector<Token> tokens = Tokenize(text);
  auto recover = [&](int64_t s, int64_t e) {
    SpanPrediction p;
    p.abstained = false;
    p.start_token = s;
    p.end_token = e;
    RecoverText(text, tokens, &p);
    return p;
  };
  // Tokens: Bids open 04 / 01 / 2019 at Kita Ward office .
  SpanPrediction p = recover(2, 6);
  CHECK(p.value == "04/01/2019");
  CHECK(p.chars == CharRange{10, 20});
  CHECK(recover(1, 1).value == "open");
  CHECK(recover(8, 9).value == "Kita  Ward");
  CHECK(NormalizeValue(recover(8, 9).value) == "Kita Ward");
  CHECK_THROWS_AS(recover(3, 40), DataError);

  SpanPrediction abstained;
  abstained.value = "x";
  RecoverText(text, tokens, &abstained);
  CHECK(abstained.value.empty());
}

TEST_CASE("recover: normalization trims and collapses whitespace") {
  CHECK(NormalizeValue("  a \t b\n\nc  ") == "a b c");
  CHECK(NormalizeValue("") == "");
  CHECK(NormalizeValue("　東京　 都 ") == "東京 都");
}

// ---------------------------------------------------------------- evaluate

struct EvalFixture {
  std::vector<TagSpec> schema = {{1, "alpha date", DType::kDate}, {2, "beta code", DType::kCode}};
  std::vector<AnnotatedDocument> docs;
  std::vector<const AnnotatedDocument*> ptrs;

  EvalFixture() {
    docs.push_back(MakeDocument("a", "x"));
    docs.push_back(MakeDocument("b", "y"));
    docs[0].gold[1] = GoldValue{"2019/04/01", {}};
    docs[0].gold[2] = GoldValue{"ZQ-1", {}};
    docs[1].gold[1] = GoldValue{"2020/01/02", {}};
    docs[1].gold[2] = GoldValue{"QX-2", {}};
    for (const auto& d : docs) ptrs.push_back(&d);
  }

  static SpanPrediction Pred(std::string doc, int tag, std::string value) {
    SpanPrediction p;
    p.doc_id = std::move(doc);
    p.tag_id = tag;
    p.value = std::move(value);
    p.abstained = false;
    p.score = 0.5;
    return p;
  }
  static SpanPrediction Abstain(std::string doc, int tag) {
    SpanPrediction p;
    p.doc_id = std::move(doc);
    p.tag_id = tag;
    return p;
  }
};

TEST_CASE("evaluate: perfect, degenerate and hand-counted cases") {
  EvalFixture f;
  std::vector<SpanPrediction> perfect = {
      EvalFixture::Pred("a", 1, "2019/04/01"), EvalFixture::Pred("a", 2, " ZQ-1 "),
      EvalFixture::Pred("b", 1, "2020/01/02"), EvalFixture::Pred("b", 2, "QX-2")};
  EvalReport r = Evaluate(perfect, f.ptrs, f.schema);
  CHECK(r.overall.precision == 1.0);
  CHECK(r.overall.recall == 1.0);
  CHECK(r.overall.f1 == 1.0);

  std::vector<SpanPrediction> none = {EvalFixture::Abstain("a", 1), EvalFixture::Abstain("a", 2),
                                      EvalFixture::Abstain("b", 1), EvalFixture::Abstain("b", 2)};
  r = Evaluate(none, f.ptrs, f.schema);
  CHECK(r.overall.precision == 0.0);
  CHECK(r.overall.recall == 0.0);
  CHECK(r.overall.f1 == 0.0);
  CHECK(r.overall.abstained == 4);

  std::vector<SpanPrediction> three = perfect;
  three[3].value = "QX-3";
  r = Evaluate(three, f.ptrs, f.schema);
  CHECK(r.overall.precision == 0.75);
  CHECK(r.overall.recall == 0.75);
  CHECK(r.overall.f1 == doctest::Approx(0.75));
  CHECK(r.ForTag(1).f1 == 1.0);
  CHECK(r.ForTag(2).precision == 0.5);
  CHECK(r.ForTag(2).recall == 0.5);
  CHECK(r.ForTag(2).gold == 2);
}

TEST_CASE("evaluate: absent gold, order symmetry and duplication") {
  EvalFixture f;
  f.docs[1].gold[2] = std::nullopt;
  std::vector<SpanPrediction> preds = {
      EvalFixture::Pred("a", 1, "2019/04/01"), EvalFixture::Pred("a", 2, "wrong"),
      EvalFixture::Pred("b", 1, "2020/01/02"), EvalFixture::Pred("b", 2, "QX-2")};
  const EvalReport r = Evaluate(preds, f.ptrs, f.schema);
  CHECK(r.overall.gold == 3);
  CHECK(r.overall.predicted == 4);
  CHECK(r.overall.correct == 2);

  std::vector<SpanPrediction> reversed(preds.rbegin(), preds.rend());
  CHECK(Evaluate(reversed, f.ptrs, f.schema).overall.f1 == r.overall.f1);

  std::vector<SpanPrediction> doubled = preds;
  doubled.insert(doubled.end(), preds.begin(), preds.end());
  std::vector<const AnnotatedDocument*> doubled_docs = f.ptrs;
  doubled_docs.insert(doubled_docs.end(), f.ptrs.begin(), f.ptrs.end());
  const EvalReport d = Evaluate(doubled, doubled_docs, f.schema);
  CHECK(d.overall.precision == r.overall.precision);
  CHECK(d.overall.recall == r.overall.recall);
  CHECK(d.overall.f1 == r.overall.f1);
  for (size_t t = 0; t < r.tags.size(); ++t) CHECK(d.tags[t].scores.f1 == r.tags[t].scores.f1);
}

TEST_CASE("evaluate: unknown documents and tags are input errors") {
  EvalFixture f;
  std::vector<SpanPrediction> bad_doc = {EvalFixture::Pred("zzz", 1, "x")};
  CHECK_THROWS_AS(Evaluate(bad_doc, f.ptrs, f.schema), DataError);
  std::vector<SpanPrediction> bad_tag = {EvalFixture::Pred("a", 9, "x")};
  CHECK_THROWS_AS(Evaluate(bad_tag, f.ptrs, f.schema), DataError);
}

// -------------------------------------------------------------------- json

TEST_CASE("json: empty set, abstentions and round trip") {
  EvalFixture f;
  CHECK(PredictionsToJson({}, f.schema) == "{\"documents\":[]}\n");

  SpanPrediction found = EvalFixture::Pred("b", 2, "QX-2 \"quoted\" 東京");
  found.chars = CharRange{4, 19};
  found.score = 0.123456789012345678;
  const std::vector<SpanPrediction> preds = {found, EvalFixture::Abstain("a", 1),
                                             EvalFixture::Pred("a", 2, "ZQ-1")};
  const std::string json = PredictionsToJson(preds, f.schema);
  CHECK(json.back() == '\n');
  CHECK(json.find("\"doc_id\":\"a\"") < json.find("\"doc_id\":\"b\""));
  CHECK(json.find("{\"tag_id\":1,\"tag_name\":\"alpha date\",\"value\":null}") != std::string::npos);

  std::vector<SpanPrediction> back = PredictionsFromJson(json);
  REQUIRE(back.size() == 3);
  std::vector<SpanPrediction> expected = {preds[1], preds[2], preds[0]};
  for (auto& p : expected) {
    p.start_token = -1;
    p.end_token = -1;
  }
  CHECK(back == expected);
  CHECK(PredictionsToJson(back, f.schema) == json);
  CHECK_THROWS_AS(PredictionsFromJson("{\"documents\":[{\"fields\":[]}]}"), DataError);
  CHECK_THROWS_AS(PredictionsFromJson("not json"), DataError);
}

TEST_CASE("json: report carries per-tag and overall scores") {
  EvalFixture f;
  std::vector<SpanPrediction> preds = {EvalFixture::Pred("a", 1, "2019/04/01")};
  const auto json = nlohmann::ordered_json::parse(ReportToJson(Evaluate(preds, f.ptrs, f.schema)));
  CHECK(json.at("overall").at("precision") == 1.0);
  CHECK(json.at("overall").at("recall") == 0.25);
  CHECK(json.at("tags").size() == 2);
  CHECK(json.at("tags")[0].at("tag_name") == "alpha date");
  CHECK(json.at("tags")[1].at("support") == 2);
}

// --------------------------------------------------------------- extractor

TEST_CASE("extractor: one well-formed prediction per tag from an untrained model") {
  const Corpus corpus = GenerateCorpus(4, DefaultSchema(), 5);
  std::vector<const AnnotatedDocument*> docs;
  for (const auto& d : corpus.documents) docs.push_back(&d);
  const Vocab vocab = BuildModelVocab(docs, corpus.schema, 1);
  ModelConfig c = PresetConfig("toy", vocab.size());
  c.hidden_size = 16;
  c.ff_size = 32;
  c.conv_filters = 16;
  Model<float> model(c);
  model.InitializeWeights(3);
  // A large START/END bias forces non-abstaining predictions.
  auto& bias = model.params().Get("span.classifier.bias").value;
  bias[1] = 4.0f;
  bias[2] = 4.0f;
  ExtractOptions options;
  options.max_span = 5;
  const std::vector<SpanPrediction> preds = ExtractAll(model, vocab, corpus.schema, docs, options);
  REQUIRE(preds.size() == docs.size() * corpus.schema.size());
  for (size_t i = 0; i < preds.size(); ++i) {
    const SpanPrediction& p = preds[i];
    const AnnotatedDocument& doc = *docs[i / corpus.schema.size()];
    CHECK(p.doc_id == doc.doc_id);
    CHECK(p.tag_id == corpus.schema[i % corpus.schema.size()].tag_id);
    REQUIRE_FALSE(p.abstained);
    CHECK(p.end_token >= p.start_token);
    CHECK(p.end_token - p.start_token < 5);
    CHECK(p.score > 0.0);
    CHECK(p.score <= 1.0);
    const Utf8Text text(doc.text);
    CHECK_FALSE(IsSpaceChar(text.char_at(p.chars.begin)));
    CHECK_FALSE(IsSpaceChar(text.char_at(p.chars.end - 1)));
    CHECK(text.Substr(p.chars) == p.value);
  }
  const EvalReport report = Evaluate(preds, docs, corpus.schema);
  CHECK(report.overall.predicted == static_cast<int64_t>(preds.size()));
}

}  // namespace
}  // namespace spanfield
