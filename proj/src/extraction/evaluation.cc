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

#include "spanfield/extraction/evaluation.h"

#include <algorithm>
#include <map>

#include "json.hpp"
#include "spanfield/errors.h"

namespace spanfield {
namespace {

using Json = nlohmann::ordered_json;

void Finish(Scores* s) {
  s->precision = s->predicted > 0 ? static_cast<double>(s->correct) / s->predicted : 0.0;
  s->recall = s->gold > 0 ? static_cast<double>(s->correct) / s->gold : 0.0;
  const double sum = s->precision + s->recall;
  s->f1 = sum > 0.0 ? 2.0 * s->precision * s->recall / sum : 0.0;
}

Json ScoresToJson(const Scores& s) {
  return Json{{"precision", s.precision}, {"recall", s.recall},     {"f1", s.f1},
              {"support", s.gold},        {"predicted", s.predicted}, {"correct", s.correct},
              {"abstained", s.abstained}};
}

}  // namespace

const Scores& EvalReport::ForTag(int tag_id) const {
  for (const auto& t : tags) {
    if (t.tag_id == tag_id) return t.scores;
  }
  throw DataError("report has no tag " + std::to_string(tag_id));
}

EvalReport Evaluate(std::span<const SpanPrediction> predictions,
                    const std::vector<const AnnotatedDocument*>& docs,
                    const std::vector<TagSpec>& schema) {
  std::map<std::string, const AnnotatedDocument*, std::less<>> by_id;
  for (const AnnotatedDocument* d : docs) by_id.emplace(d->doc_id, d);
  std::map<int, Scores> per_tag;
  for (const TagSpec& tag : schema) per_tag[tag.tag_id] = Scores{};

  auto gold_of = [](const AnnotatedDocument& doc, int tag_id) -> const GoldValue* {
    const auto it = doc.gold.find(tag_id);
    return it != doc.gold.end() && it->second ? &*it->second : nullptr;
  };
  for (const AnnotatedDocument* d : docs) {
    for (const TagSpec& tag : schema) {
      if (gold_of(*d, tag.tag_id) != nullptr) ++per_tag[tag.tag_id].gold;
    }
  }
  for (const SpanPrediction& p : predictions) {
    const auto doc = by_id.find(p.doc_id);
    if (doc == by_id.end()) throw DataError("prediction for unknown document '" + p.doc_id + "'");
    const auto tag = per_tag.find(p.tag_id);
    if (tag == per_tag.end()) {
      throw DataError("prediction for " + p.doc_id + " names unknown tag " +
                      std::to_string(p.tag_id));
    }
    Scores& s = tag->second;
    if (p.abstained) {
      ++s.abstained;
      continue;
    }
    ++s.predicted;
    const GoldValue* gold = gold_of(*doc->second, p.tag_id);
    if (gold != nullptr && NormalizeValue(p.value) == NormalizeValue(gold->value)) ++s.correct;
  }

  EvalReport report;
  for (const TagSpec& tag : schema) {
    Scores s = per_tag[tag.tag_id];
    Finish(&s);
    report.overall.predicted += s.predicted;
    report.overall.correct += s.correct;
    report.overall.gold += s.gold;
    report.overall.abstained += s.abstained;
    report.tags.push_back(TagScores{tag.tag_id, tag.name, s});
  }
  Finish(&report.overall);
  return report;
}

std::string PredictionsToJson(std::span<const SpanPrediction> predictions,
                              const std::vector<TagSpec>& schema) {
  std::vector<const SpanPrediction*> sorted;
  for (const auto& p : predictions) sorted.push_back(&p);
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    return a->doc_id != b->doc_id ? a->doc_id < b->doc_id : a->tag_id < b->tag_id;
  });
  Json documents = Json::array();
  for (size_t i = 0; i < sorted.size();) {
    const std::string& doc_id = sorted[i]->doc_id;
    Json fields = Json::array();
    for (; i < sorted.size() && sorted[i]->doc_id == doc_id; ++i) {
      const SpanPrediction& p = *sorted[i];
      Json field{{"tag_id", p.tag_id}, {"tag_name", FindTag(schema, p.tag_id).name}};
      if (p.abstained) {
        field["value"] = nullptr;
      } else {
        field["value"] = p.value;
        field["char_start"] = p.chars.begin;
        field["char_end"] = p.chars.end;
        field["score"] = p.score;
      }
      fields.push_back(std::move(field));
    }
    documents.push_back(Json{{"doc_id", doc_id}, {"fields", std::move(fields)}});
  }
  return Json{{"documents", std::move(documents)}}.dump() + "\n";
}

std::vector<SpanPrediction> PredictionsFromJson(std::string_view text) {
  std::vector<SpanPrediction> out;
  try {
    const Json json = Json::parse(text);
    for (const Json& doc : json.at("documents")) {
      const std::string doc_id = doc.at("doc_id").get<std::string>();
      for (const Json& field : doc.at("fields")) {
        SpanPrediction p;
        p.doc_id = doc_id;
        p.tag_id = field.at("tag_id").get<int>();
        if (!field.at("value").is_null()) {
          p.abstained = false;
          p.value = field.at("value").get<std::string>();
          p.chars = CharRange{field.at("char_start").get<int64_t>(),
                              field.at("char_end").get<int64_t>()};
          p.score = field.at("score").get<double>();
        }
        out.push_back(std::move(p));
      }
    }
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed predictions JSON: ") + e.what());
  }
  return out;
}

std::string ReportToJson(const EvalReport& report) {
  Json tags = Json::array();
  for (const TagScores& t : report.tags) {
    Json entry{{"tag_id", t.tag_id}, {"tag_name", t.tag_name}};
    entry.update(ScoresToJson(t.scores));
    tags.push_back(std::move(entry));
  }
  return Json{{"overall", ScoresToJson(report.overall)}, {"tags", std::move(tags)}}.dump(2) + "\n";
}

}  // namespace spanfield
