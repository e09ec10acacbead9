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

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "spanfield/errors.h"
#include "spanfield/random.h"
#include "spanfield/text/corpus.h"
#include "spanfield/text/corpus_generator.h"
#include "spanfield/text/pretrain_data.h"
#include "spanfield/text/tokenizer.h"
#include "spanfield/text/vocab.h"
#include "spanfield/text/windowing.h"

namespace spanfield {
namespace {

namespace fs = std::filesystem;

std::vector<std::string> Texts(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

std::vector<int32_t> Iota(int64_t n, int32_t first = 100) {
  std::vector<int32_t> v(n);
  for (int64_t i = 0; i < n; ++i) v[i] = first + static_cast<int32_t>(i);
  return v;
}

const Corpus& SmallCorpus() {
  static const Corpus corpus = GenerateCorpus(20, DefaultSchema(), 11);
  return corpus;
}

fs::path TempDir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("spanfield_text_test_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST_CASE("tokenize: empty text gives no tokens") { CHECK(Tokenize("").empty()); }

TEST_CASE("tokenize: digits and punctuation split from words") {
  const auto tokens = Tokenize("due 2019/04/01.");
  CHECK(Texts(tokens) == std::vector<std::string>{"due", "2019", "/", "04", "/", "01", "."});
  CHECK(tokens[1].range == CharRange{4, 8});
  CHECK(tokens[6].range == CharRange{14, 15});
}

TEST_CASE("tokenize: offsets count Unicode scalar values") {
  // Two 3-byte characters, a space, digits, a 3-byte character.
  const auto tokens = Tokenize("\xE6\x9D\xB1\xE4\xBA\xAC 2019\xE5\xB9\xB4");
  REQUIRE(tokens.size() == 3);
  CHECK(tokens[0].range == CharRange{0, 2});
  CHECK(tokens[1].text == "2019");
  CHECK(tokens[1].range == CharRange{3, 7});
  CHECK(tokens[2].range == CharRange{7, 8});
}

TEST_CASE("tokenize: malformed UTF-8 is a data error") {
  CHECK_THROWS_AS(Tokenize("ab\xC3"), DataError);
  CHECK_THROWS_AS(Tokenize("\xC0\x80"), DataError);
}

TEST_CASE("tokenize: offsets round-trip on generated documents") {
  for (const auto& doc : SmallCorpus().documents) {
    const Utf8Text text(doc.text);
    const auto tokens = Tokenize(text);
    std::string joined;
    int64_t prev_end = 0;
    for (const auto& t : tokens) {
      CHECK(text.Substr(t.range) == t.text);
      CHECK(t.range.begin >= prev_end);
      CHECK(t.range.end > t.range.begin);
      prev_end = t.range.end;
      joined += t.text;
    }
    std::string non_space;
    for (int64_t i = 0; i < text.char_count(); ++i) {
      if (!IsSpaceChar(text.char_at(i))) non_space += text.Substr({i, i + 1});
    }
    CHECK(joined == non_space);
  }
}

TEST_CASE("vocab: reserved ids and round trip") {
  const Vocab vocab = Vocab::Build({Tokenize("b a b c"), Tokenize("a b")});
  CHECK(vocab.TokenOf(kPadId) == "[PAD]");
  CHECK(vocab.TokenOf(kUnkId) == "[UNK]");
  CHECK(vocab.TokenOf(kClsId) == "[CLS]");
  CHECK(vocab.TokenOf(kSepId) == "[SEP]");
  CHECK(vocab.TokenOf(kMaskId) == "[MASK]");
  // Descending count, ties by byte order.
  CHECK(vocab.TokenOf(5) == "b");
  CHECK(vocab.TokenOf(6) == "a");
  CHECK(vocab.TokenOf(7) == "c");
  for (int32_t i = 0; i < vocab.size(); ++i) CHECK(vocab.IdOf(vocab.TokenOf(i)) == i);
  CHECK(vocab.IdOf("zzz") == kUnkId);
  CHECK_THROWS_AS(vocab.TokenOf(vocab.size()), DataError);
  CHECK_THROWS_AS(Vocab::FromTokens({"x", "x"}), DataError);
  CHECK_THROWS_AS(Vocab::FromTokens({"[SEP]"}), DataError);
  CHECK(Vocab::Build({Tokenize("a a b")}, 2).size() == kNumReservedIds + 1);
}

TEST_CASE("window_document: two windows with padding") {
  const auto doc = Iota(10);
  const std::vector<int32_t> tag = {50, 51, 52};
  CHECK(WindowCapacity(12, 3) == 6);
  const auto windows = WindowDocument(doc, tag, 12, 6);
  REQUIRE(windows.size() == 2);
  CHECK(windows[0].doc_begin == 0);
  CHECK(windows[0].doc_end == 6);
  CHECK(windows[1].doc_begin == 6);
  CHECK(windows[1].doc_end == 10);
  const auto& w = windows[1];
  CHECK(w.token_ids == std::vector<int32_t>{kClsId, 50, 51, 52, kSepId, 106, 107, 108, 109,
                                             kSepId, kPadId, kPadId});
  CHECK(w.segment_ids == std::vector<int32_t>{0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 0, 0});
  CHECK(w.pad_mask == std::vector<uint8_t>{0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1});
  CHECK(w.labels == std::vector<int32_t>{kIgnoreLabel, kIgnoreLabel, kIgnoreLabel, kIgnoreLabel,
                                          kIgnoreLabel, 0, 0, 0, 0, kIgnoreLabel, kIgnoreLabel,
                                          kIgnoreLabel});
  CHECK(w.window_index == 1);
  CHECK(w.doc_offset == 5);
}

TEST_CASE("window_document: exact fit gives one unpadded window") {
  const auto windows = WindowDocument(Iota(6), std::vector<int32_t>{50, 51, 52}, 12, 6);
  REQUIRE(windows.size() == 1);
  for (uint8_t p : windows[0].pad_mask) CHECK(p == 0);
  int seps = 0;
  for (int32_t id : windows[0].token_ids) seps += id == kSepId;
  CHECK(seps == 2);
}

TEST_CASE("window_document: errors") {
  const std::vector<int32_t> tag = {50, 51, 52};
  CHECK_THROWS_AS(WindowDocument(Iota(5), tag, 6, 1), ConfigError);
  CHECK_THROWS_AS(WindowDocument(Iota(5), tag, 12, 7), ConfigError);
  CHECK_THROWS_AS(WindowDocument(Iota(5), tag, 12, 0), ConfigError);
  CHECK_THROWS_AS(WindowDocument(std::vector<int32_t>{}, tag, 12, 6), DataError);
}

TEST_CASE("window_document: coverage and reconstruction on random inputs") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int64_t n = rng.UniformRange(1, 300);
    const int64_t tag_len = rng.UniformRange(1, 5);
    const int64_t length = rng.UniformRange(tag_len + 4, 64);
    const int64_t capacity = length - tag_len - 3;
    const int64_t stride = rng.UniformRange(1, capacity);
    const auto doc = Iota(n);
    const auto windows = WindowDocument(doc, Iota(tag_len, 10), length, stride);
    std::vector<int> covered(n, 0);
    for (const auto& w : windows) {
      CHECK(w.length() == length);
      for (int64_t i = w.doc_begin; i < w.doc_end; ++i) {
        ++covered[i];
        CHECK(w.token_ids[w.doc_offset + i - w.doc_begin] == doc[i]);
      }
    }
    for (int c : covered) CHECK(c >= 1);

    // Non-overlapping windows rebuild the document exactly.
    std::vector<int32_t> rebuilt;
    for (const auto& w : WindowDocument(doc, Iota(tag_len, 10), length, capacity)) {
      for (int64_t i = 0; i < w.length(); ++i) {
        if (w.segment_ids[i] == 1 && w.token_ids[i] != kSepId && !w.pad_mask[i]) {
          rebuilt.push_back(w.token_ids[i]);
        }
      }
    }
    CHECK(rebuilt == doc);
  }
}

TEST_CASE("align_labels: hand examples") {
  const std::vector<int32_t> tag = {50, 51, 52};
  auto windows = WindowDocument(Iota(10), tag, 12, 6);  // [0,6) and [6,10)

  AlignLabels(&windows, std::optional<TokenSpan>{});
  for (const auto& w : windows) {
    for (int64_t i = 0; i < w.doc_token_count(); ++i) CHECK(w.labels[w.doc_offset + i] == 0);
  }

  AlignLabels(&windows, TokenSpan{7, 9});
  for (int64_t i = 0; i < 6; ++i) CHECK(windows[0].labels[windows[0].doc_offset + i] == 0);

  AlignLabels(&windows, TokenSpan{2, 4});
  const auto& w = windows[0];
  CHECK(w.labels[w.doc_offset + 2] == kLabelStart);
  CHECK(w.labels[w.doc_offset + 4] == kLabelEnd);
  for (int64_t i : {0, 1, 3, 5}) CHECK(w.labels[w.doc_offset + i] == 0);
  CHECK(w.labels[0] == kIgnoreLabel);

  AlignLabels(&windows, TokenSpan{8, 8});
  CHECK(windows[1].labels[windows[1].doc_offset + 2] == kLabelStart);
  int ends = 0;
  for (int32_t l : windows[1].labels) ends += l == kLabelEnd;
  CHECK(ends == 0);
}

TEST_CASE("align_labels: misaligned gold names document and tag") {
  const auto tokens = Tokenize("deadline 2019/04/01 now");
  auto windows = WindowDocument(Iota(static_cast<int64_t>(tokens.size())), Iota(2), 32, 27);
  try {
    AlignLabels(&windows, CharRange{10, 19}, tokens, "docX", 7);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("docX") != std::string::npos);
    CHECK(msg.find("tag 7") != std::string::npos);
  }
  AlignLabels(&windows, CharRange{9, 19}, tokens, "docX", 7);
  CHECK(windows[0].labels[windows[0].doc_offset + 1] == kLabelStart);
  CHECK(windows[0].labels[windows[0].doc_offset + 5] == kLabelEnd);
}

TEST_CASE("align_labels: START/END counts equal windows containing the gold") {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const int64_t n = rng.UniformRange(2, 120);
    const int64_t stride = rng.UniformRange(1, 18);
    auto windows = WindowDocument(Iota(n), Iota(3), 24, stride);
    const int64_t first = rng.UniformRange(0, n - 1);
    const int64_t last = std::min<int64_t>(n - 1, first + rng.UniformRange(0, 4));
    AlignLabels(&windows, TokenSpan{first, last});
    int64_t containing = 0;
    int64_t starts = 0;
    int64_t ends = 0;
    for (const auto& w : windows) {
      containing += w.doc_begin <= first && last < w.doc_end;
      int64_t s = 0;
      int64_t e = 0;
      int64_t s_pos = -1;
      int64_t e_pos = -1;
      for (int64_t i = 0; i < w.length(); ++i) {
        if (w.labels[i] == kLabelStart) ++s, s_pos = i;
        if (w.labels[i] == kLabelEnd) ++e, e_pos = i;
      }
      CHECK(s <= 1);
      CHECK(e <= 1);
      if (s && e) CHECK(e_pos >= s_pos);
      starts += s;
      ends += e;
    }
    CHECK(starts == containing);
    CHECK(ends == (first == last ? 0 : containing));
  }
}

SentenceCorpus NumberedSentences(int docs, int sentences) {
  SentenceCorpus corpus(docs);
  for (int d = 0; d < docs; ++d) {
    for (int s = 0; s < sentences; ++s) {
      corpus[d].push_back({1000 * d + s + 10, 7, 8});
    }
  }
  return corpus;
}

TEST_CASE("make_nsp_pairs: construction, balance and determinism") {
  SentenceCorpus tiny = {{{10, 11}, {12}}, {{20}, {21}}};
  bool found_positive = false;
  for (uint64_t seed = 0; seed < 20 && !found_positive; ++seed) {
    for (const auto& p : MakeNspPairs(tiny, seed)) {
      if (p.is_next && p.first == std::vector<int32_t>{10, 11}) {
        CHECK(p.second == std::vector<int32_t>{12});
        found_positive = true;
      }
    }
  }
  CHECK(found_positive);

  const SentenceCorpus corpus = NumberedSentences(100, 102);  // 10100 pairs
  const auto pairs = MakeNspPairs(corpus, 3);
  REQUIRE(pairs.size() == 10100);
  int64_t positives = 0;
  for (const auto& p : pairs) {
    const int32_t a = p.first[0] - 10;
    const int32_t b = p.second[0] - 10;
    if (p.is_next) {
      ++positives;
      CHECK(b == a + 1);
    } else {
      CHECK(b / 1000 != a / 1000);
    }
  }
  const double frac = static_cast<double>(positives) / pairs.size();
  CHECK(frac >= 0.48);
  CHECK(frac <= 0.52);
  CHECK(MakeNspPairs(corpus, 3) == pairs);

  CHECK_THROWS_AS(MakeNspPairs(SentenceCorpus{{{1}, {2}}}, 0), DataError);
  CHECK_THROWS_AS(MakeNspPairs(SentenceCorpus{{{1}, {2}}, {{3}}}, 0), DataError);
}

TEST_CASE("pack_pair: layout, segments and truncation") {
  SentencePair pair{{10, 11, 12}, {20, 21}, true, 0, 0};
  const auto w = PackPair(pair, 16);
  CHECK(w.token_ids == std::vector<int32_t>{kClsId, 10, 11, 12, kSepId, 20, 21, kSepId});
  CHECK(w.segment_ids == std::vector<int32_t>{0, 0, 0, 0, 0, 1, 1, 1});
  const auto t = PackPair(pair, 6);
  CHECK(t.token_ids == std::vector<int32_t>{kClsId, 10, kSepId, 20, 21, kSepId});
  auto padded = w;
  PadWindow(&padded, 10);
  CHECK(padded.length() == 10);
  CHECK(padded.pad_mask[9] == 1);
  CHECK(padded.position_ids[9] == 9);
}

TEST_CASE("mask_tokens: rate, exclusions and determinism") {
  std::vector<int32_t> ids;
  for (int i = 0; i < 10000; ++i) ids.push_back(5 + i % 50);
  SentencePair pair{ids, {}, true, 0, 0};
  PackedWindow w = PackPair(pair, 20000);
  PadWindow(&w, w.length() + 5);
  const auto masked = MaskTokens(w, 60, 17);
  int64_t selected = 0;
  int64_t as_mask = 0;
  int64_t unchanged = 0;
  for (int64_t i = 0; i < w.length(); ++i) {
    const bool special = w.pad_mask[i] || w.token_ids[i] == kClsId || w.token_ids[i] == kSepId;
    if (special) {
      CHECK(masked.targets[i] == kIgnoreLabel);
      CHECK(masked.window.token_ids[i] == w.token_ids[i]);
      continue;
    }
    if (masked.targets[i] == kIgnoreLabel) {
      CHECK(masked.window.token_ids[i] == w.token_ids[i]);
      continue;
    }
    ++selected;
    CHECK(masked.targets[i] == w.token_ids[i]);
    as_mask += masked.window.token_ids[i] == kMaskId;
    unchanged += masked.window.token_ids[i] == w.token_ids[i];
    CHECK(masked.window.token_ids[i] >= kNumReservedIds - 1);
  }
  const double rate = selected / 10000.0;
  CHECK(rate >= 0.13);
  CHECK(rate <= 0.17);
  CHECK(as_mask / static_cast<double>(selected) == doctest::Approx(0.8).epsilon(0.06));
  CHECK(unchanged >= 0.05 * selected);
  CHECK(MaskTokens(w, 60, 17).window.token_ids == masked.window.token_ids);
  CHECK(MaskTokens(w, 60, 18).window.token_ids != masked.window.token_ids);
}

TEST_CASE("generate_corpus: annotation contract and structure") {
  const Corpus& corpus = SmallCorpus();
  REQUIRE(corpus.documents.size() == 20);
  for (const auto& doc : corpus.documents) {
    CHECK(doc.gold.size() == 8);
    const Utf8Text text(doc.text);
    for (const auto& [tag_id, gold] : doc.gold) {
      if (gold) CHECK(text.Substr(gold->span) == gold->value);
    }
    // Sentences cover the non-whitespace text in order.
    int64_t prev = 0;
    std::string from_sentences;
    for (const auto& s : doc.sentences) {
      CHECK(s.begin >= prev);
      prev = s.end;
      CHECK(!IsSpaceChar(text.char_at(s.begin)));
      CHECK(!IsSpaceChar(text.char_at(s.end - 1)));
      for (int64_t i = s.begin; i < s.end; ++i) {
        if (!IsSpaceChar(text.char_at(i))) from_sentences += text.Substr({i, i + 1});
      }
    }
    std::string all;
    for (int64_t i = 0; i < text.char_count(); ++i) {
      if (!IsSpaceChar(text.char_at(i))) all += text.Substr({i, i + 1});
    }
    CHECK(from_sentences == all);
  }
}

TEST_CASE("generate_corpus: gold values fit inside default windows") {
  const Corpus& corpus = SmallCorpus();
  for (const auto& doc : corpus.documents) {
    const auto tokens = Tokenize(doc.text);
    const auto doc_ids = Iota(static_cast<int64_t>(tokens.size()));
    for (const auto& tag : corpus.schema) {
      const auto& gold = doc.gold.at(tag.tag_id);
      if (!gold) continue;
      const auto tag_len = static_cast<int64_t>(Tokenize(tag.name).size());
      const int64_t capacity = WindowCapacity(128, tag_len);
      auto windows = WindowDocument(doc_ids, Iota(tag_len), 128, capacity);
      AlignLabels(&windows, gold->span, tokens, doc.doc_id, tag.tag_id);
      int starts = 0;
      for (const auto& w : windows) {
        for (int32_t l : w.labels) starts += l == kLabelStart;
      }
      CHECK(starts == 1);
      const TokenSpan span = CharSpanToTokens(tokens, gold->span, doc.doc_id, tag.tag_id);
      CHECK(span.last > span.first);
    }
  }
}

TEST_CASE("generate_corpus: default corpus length and absence rate") {
  const Corpus corpus = GenerateCorpus(200, DefaultSchema(), 1);
  double tokens = 0;
  int64_t absent = 0;
  int64_t pairs = 0;
  for (const auto& doc : corpus.documents) {
    tokens += static_cast<double>(Tokenize(doc.text).size());
    for (const auto& [tag_id, gold] : doc.gold) {
      ++pairs;
      absent += !gold.has_value();
    }
  }
  const double mean = tokens / 200;
  CHECK(mean >= 400);
  CHECK(mean <= 1200);
  const double absent_rate = static_cast<double>(absent) / pairs;
  CHECK(absent_rate > 0.06);
  CHECK(absent_rate < 0.14);
}

TEST_CASE("generate_corpus: byte-identical files under the same seed") {
  const fs::path a = TempDir("gen_a");
  const fs::path b = TempDir("gen_b");
  WriteCorpus(GenerateCorpus(15, DefaultSchema(), 42), a);
  WriteCorpus(GenerateCorpus(15, DefaultSchema(), 42), b);
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (entry.is_regular_file()) files.push_back(fs::relative(entry.path(), a));
  }
  CHECK(files.size() == 17);
  for (const auto& f : files) CHECK(ReadTextFile(a / f) == ReadTextFile(b / f));
  CHECK(ReadTextFile(a / "annotations.jsonl") !=
        [&] {
          const fs::path c = TempDir("gen_c");
          WriteCorpus(GenerateCorpus(15, DefaultSchema(), 43), c);
          return ReadTextFile(c / "annotations.jsonl");
        }());
}

TEST_CASE("generate_corpus: schema requirements") {
  auto schema = DefaultSchema();
  schema.pop_back();  // drop the code tag
  CHECK_THROWS_AS(GenerateCorpus(3, schema, 1), DataError);
  schema = DefaultSchema();
  schema[1].dtype = DType::kMoney;
  CHECK_THROWS_AS(GenerateCorpus(3, schema, 1), DataError);
  schema = DefaultSchema();
  schema[1].tag_id = schema[0].tag_id;
  CHECK_THROWS_AS(GenerateCorpus(3, schema, 1), DataError);

  // Custom tag names fall back to generic cue phrases.
  schema = DefaultSchema();
  schema.push_back({9, "inspection deadline", DType::kDate});
  const Corpus corpus = GenerateCorpus(5, schema, 2);
  for (const auto& doc : corpus.documents) CHECK(doc.gold.count(9) == 1);
}

TEST_CASE("corpus files round-trip and reject bad annotations") {
  const fs::path dir = TempDir("io");
  WriteCorpus(SmallCorpus(), dir);
  const Corpus loaded = ReadCorpus(dir);
  CHECK(loaded.schema == SmallCorpus().schema);
  REQUIRE(loaded.documents.size() == SmallCorpus().documents.size());
  for (size_t i = 0; i < loaded.documents.size(); ++i) {
    CHECK(loaded.documents[i].doc_id == SmallCorpus().documents[i].doc_id);
    CHECK(loaded.documents[i].text == SmallCorpus().documents[i].text);
    CHECK(loaded.documents[i].gold == SmallCorpus().documents[i].gold);
    CHECK(loaded.documents[i].sentences == SmallCorpus().documents[i].sentences);
  }

  WriteTextFile(dir / "annotations.jsonl",
                "{\"doc_id\":\"doc0001\",\"gold\":{\"1\":{\"value\":\"nope\",\"char_start\":0,"
                "\"char_end\":4}}}\n");
  CHECK_THROWS_AS(ReadCorpus(dir), DataError);
  WriteTextFile(dir / "annotations.jsonl", "{not json\n");
  CHECK_THROWS_AS(ReadCorpus(dir), DataError);
  WriteTextFile(dir / "schema.json", "[{\"tag_id\":1,\"name\":\"x\",\"dtype\":\"color\"}]");
  CHECK_THROWS_AS(ReadCorpus(dir), DataError);
}

TEST_CASE("split_corpus: deterministic disjoint split") {
  const Corpus corpus = GenerateCorpus(250, DefaultSchema(), 3);
  const CorpusSplit split = SplitCorpus(corpus, 0.8);
  CHECK(split.train.size() == 200);
  CHECK(split.test.size() == 50);
  std::set<std::string> ids;
  for (const auto* d : split.train) ids.insert(d->doc_id);
  for (const auto* d : split.test) CHECK(ids.insert(d->doc_id).second);
  CHECK(ids.size() == 250);
  const CorpusSplit again = SplitCorpus(corpus, 0.8);
  CHECK(again.test == split.test);
  CHECK(SplitCorpus(corpus, 0.78).train.size() == 195);
  CHECK_THROWS_AS(SplitCorpus(corpus, 1.5), ConfigError);
}

}  // namespace
}  // namespace spanfield
