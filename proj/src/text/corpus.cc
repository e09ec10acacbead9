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

#include "spanfield/text/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "spanfield/errors.h"

namespace spanfield {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kDTypeNames[] = {"date",  "address", "org_name",
                                            "phone", "money",   "code"};

int64_t GetInt(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key) || !obj[key].is_number_integer()) {
    throw DataError(where + ": missing integer field '" + key + "'");
  }
  return obj[key].get<int64_t>();
}

std::string GetString(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key) || !obj[key].is_string()) {
    throw DataError(where + ": missing string field '" + key + "'");
  }
  return obj[key].get<std::string>();
}

Json ParseJson(std::string_view text, const std::string& where) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw DataError(where + ": " + e.what());
  }
}

}  // namespace

std::string_view DTypeName(DType dtype) { return kDTypeNames[static_cast<int>(dtype)]; }

DType ParseDType(std::string_view name) {
  for (size_t i = 0; i < std::size(kDTypeNames); ++i) {
    if (kDTypeNames[i] == name) return static_cast<DType>(i);
  }
  throw DataError("unknown dtype '" + std::string(name) + "'");
}

void ValidateSchema(const std::vector<TagSpec>& schema) {
  if (schema.empty()) throw DataError("schema has no tags");
  std::set<int> seen;
  for (const auto& tag : schema) {
    if (!seen.insert(tag.tag_id).second) {
      throw DataError("duplicate tag_id " + std::to_string(tag.tag_id) + " in schema");
    }
    if (tag.name.empty()) throw DataError("tag " + std::to_string(tag.tag_id) + " has no name");
  }
}

const TagSpec& FindTag(const std::vector<TagSpec>& schema, int tag_id) {
  for (const auto& tag : schema) {
    if (tag.tag_id == tag_id) return tag;
  }
  throw DataError("unknown tag_id " + std::to_string(tag_id));
}

std::vector<CharRange> SplitSentences(const Utf8Text& text) {
  std::vector<CharRange> sentences;
  const int64_t n = text.char_count();
  int64_t line_start = 0;
  for (int64_t i = 0; i <= n; ++i) {
    if (i < n && text.char_at(i) != U'\n') continue;
    int64_t b = line_start;
    int64_t e = i;
    while (b < e && IsSpaceChar(text.char_at(b))) ++b;
    while (e > b && IsSpaceChar(text.char_at(e - 1))) --e;
    if (e > b) sentences.push_back({b, e});
    line_start = i + 1;
  }
  return sentences;
}

void ValidateDocument(const AnnotatedDocument& doc) {
  const Utf8Text text(doc.text);
  for (const auto& [tag_id, gold] : doc.gold) {
    if (!gold) continue;
    const std::string where =
        "document '" + doc.doc_id + "' tag " + std::to_string(tag_id) + ": ";
    if (gold->span.begin < 0 || gold->span.end <= gold->span.begin ||
        gold->span.end > text.char_count()) {
      throw DataError(where + "gold span [" + std::to_string(gold->span.begin) + "," +
                      std::to_string(gold->span.end) + ") outside text of length " +
                      std::to_string(text.char_count()));
    }
    if (text.Substr(gold->span) != gold->value) {
      throw DataError(where + "text at gold span is '" + text.Substr(gold->span) +
                      "', annotation says '" + gold->value + "'");
    }
  }
}

std::string ReadTextFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteTextFile(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

std::string SchemaToJson(const std::vector<TagSpec>& schema) {
  Json arr = Json::array();
  for (const auto& tag : schema) {
    arr.push_back(Json{{"tag_id", tag.tag_id}, {"name", tag.name}, {"dtype", DTypeName(tag.dtype)}});
  }
  return arr.dump(2) + "\n";
}

std::vector<TagSpec> SchemaFromJson(std::string_view json) {
  const Json arr = ParseJson(json, "schema");
  if (!arr.is_array()) throw DataError("schema: expected a JSON array");
  std::vector<TagSpec> schema;
  for (const auto& rec : arr) {
    TagSpec tag;
    tag.tag_id = static_cast<int>(GetInt(rec, "tag_id", "schema"));
    tag.name = GetString(rec, "name", "schema");
    tag.dtype = ParseDType(GetString(rec, "dtype", "schema"));
    schema.push_back(std::move(tag));
  }
  ValidateSchema(schema);
  return schema;
}

std::vector<TagSpec> ReadSchema(const fs::path& path) { return SchemaFromJson(ReadTextFile(path)); }

void WriteSchema(const std::vector<TagSpec>& schema, const fs::path& path) {
  WriteTextFile(path, SchemaToJson(schema));
}

AnnotatedDocument MakeDocument(std::string doc_id, std::string text) {
  AnnotatedDocument doc;
  doc.doc_id = std::move(doc_id);
  doc.text = std::move(text);
  doc.sentences = SplitSentences(Utf8Text(doc.text));
  return doc;
}

void WriteCorpus(const Corpus& corpus, const fs::path& dir) {
  ValidateSchema(corpus.schema);
  fs::create_directories(dir / "docs");
  WriteSchema(corpus.schema, dir / "schema.json");
  std::string annotations;
  for (const auto& doc : corpus.documents) {
    WriteTextFile(dir / "docs" / (doc.doc_id + ".txt"), doc.text);
    Json gold = Json::object();
    for (const auto& [tag_id, value] : doc.gold) {
      gold[std::to_string(tag_id)] =
          value ? Json{{"value", value->value},
                       {"char_start", value->span.begin},
                       {"char_end", value->span.end}}
                : Json(nullptr);
    }
    annotations += Json{{"doc_id", doc.doc_id}, {"gold", gold}}.dump() + "\n";
  }
  WriteTextFile(dir / "annotations.jsonl", annotations);
}

Corpus ReadCorpus(const fs::path& dir) {
  Corpus corpus;
  corpus.schema = ReadSchema(dir / "schema.json");
  std::istringstream lines(ReadTextFile(dir / "annotations.jsonl"));
  std::string line;
  int64_t line_no = 0;
  std::set<std::string> seen;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "annotations.jsonl line " + std::to_string(line_no);
    const Json rec = ParseJson(line, where);
    const std::string doc_id = GetString(rec, "doc_id", where);
    if (!seen.insert(doc_id).second) throw DataError(where + ": duplicate doc_id " + doc_id);
    AnnotatedDocument doc = MakeDocument(doc_id, ReadTextFile(dir / "docs" / (doc_id + ".txt")));
    if (!rec.contains("gold") || !rec["gold"].is_object()) {
      throw DataError(where + ": missing object field 'gold'");
    }
    for (const auto& [key, value] : rec["gold"].items()) {
      int tag_id = 0;
      try {
        size_t used = 0;
        tag_id = std::stoi(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        throw DataError(where + ": gold key '" + key + "' is not a tag id");
      }
      FindTag(corpus.schema, tag_id);
      if (value.is_null()) {
        doc.gold[tag_id] = std::nullopt;
      } else {
        doc.gold[tag_id] = GoldValue{GetString(value, "value", where),
                                     {GetInt(value, "char_start", where),
                                      GetInt(value, "char_end", where)}};
      }
    }
    ValidateDocument(doc);
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

uint64_t Fnv1a64(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

CorpusSplit SplitCorpus(const Corpus& corpus, double train_fraction) {
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) {
    throw ConfigError("train fraction must lie in [0, 1]");
  }
  std::vector<const AnnotatedDocument*> order;
  for (const auto& doc : corpus.documents) order.push_back(&doc);
  std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
    const uint64_t ha = Fnv1a64(a->doc_id);
    const uint64_t hb = Fnv1a64(b->doc_id);
    return ha != hb ? ha < hb : a->doc_id < b->doc_id;
  });
  const auto n_train = static_cast<size_t>(std::llround(train_fraction * order.size()));
  CorpusSplit split;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.test.assign(order.begin() + n_train, order.end());
  return split;
}

}  // namespace spanfield
