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

#ifndef SPANFIELD_TEXT_CORPUS_H_
#define SPANFIELD_TEXT_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spanfield/text/tokenizer.h"

namespace spanfield {

enum class DType { kDate, kAddress, kOrgName, kPhone, kMoney, kCode };

std::string_view DTypeName(DType dtype);
// Throws DataError for names outside the closed set.
DType ParseDType(std::string_view name);

struct TagSpec {
  int tag_id = 0;
  std::string name;
  DType dtype = DType::kDate;

  bool operator==(const TagSpec&) const = default;
};

// Throws DataError on duplicate tag ids or an empty schema.
void ValidateSchema(const std::vector<TagSpec>& schema);
const TagSpec& FindTag(const std::vector<TagSpec>& schema, int tag_id);

struct GoldValue {
  std::string value;
  CharRange span;

  bool operator==(const GoldValue&) const = default;
};

struct AnnotatedDocument {
  std::string doc_id;
  std::string text;
  std::vector<CharRange> sentences;
  // Keyed by tag id; nullopt marks a value absent from the document.
  std::map<int, std::optional<GoldValue>> gold;
};

// One sentence per line: each non-blank line, trimmed of surrounding
// whitespace, is a sentence.
std::vector<CharRange> SplitSentences(const Utf8Text& text);

// Checks span bounds and text[span] == value for every present gold value.
void ValidateDocument(const AnnotatedDocument& doc);

struct Corpus {
  std::vector<TagSpec> schema;
  std::vector<AnnotatedDocument> documents;
};

// Directory layout: schema.json, docs/<doc_id>.txt, annotations.jsonl.
void WriteCorpus(const Corpus& corpus, const std::filesystem::path& dir);
Corpus ReadCorpus(const std::filesystem::path& dir);

std::vector<TagSpec> ReadSchema(const std::filesystem::path& path);
void WriteSchema(const std::vector<TagSpec>& schema, const std::filesystem::path& path);
std::string SchemaToJson(const std::vector<TagSpec>& schema);
std::vector<TagSpec> SchemaFromJson(std::string_view json);

// Document without annotations, sentences derived from its lines.
AnnotatedDocument MakeDocument(std::string doc_id, std::string text);

std::string ReadTextFile(const std::filesystem::path& path);
// Writes atomically enough for our purposes: full overwrite, binary mode.
void WriteTextFile(const std::filesystem::path& path, std::string_view content);

struct CorpusSplit {
  std::vector<const AnnotatedDocument*> train;
  std::vector<const AnnotatedDocument*> test;
};

// Orders documents by (FNV-1a hash of doc_id, doc_id) and assigns the first
// round(train_fraction * n) to train.
CorpusSplit SplitCorpus(const Corpus& corpus, double train_fraction);

uint64_t Fnv1a64(std::string_view bytes);

}  // namespace spanfield

#endif  // SPANFIELD_TEXT_CORPUS_H_
