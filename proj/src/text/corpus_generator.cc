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

#include "spanfield/text/corpus_generator.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "spanfield/errors.h"
#include "spanfield/random.h"
#include "spanfield/text/tokenizer.h"
#include "spanfield/text/windowing.h"

namespace spanfield {

namespace {

using Strings = std::vector<std::string>;

// tasks[i] names items[i]; together they form one subject.
struct Theme {
  std::string title;
  Strings items;
  Strings tasks;
};

const std::vector<Theme>& Themes() {
  static const std::vector<Theme> kThemes = {
      {"Resurfacing of Prefectural Road Route",
       {"asphalt mixture", "road markings", "guard rails", "drainage covers"},
       {"spreading the asphalt mixture", "repainting the road markings",
        "replacing damaged guard rails", "cleaning the drainage covers"}},
      {"Replacement of the Records Management System",
       {"network switches", "server racks", "backup tapes", "client terminals"},
       {"configuring the network switches", "installing the server racks",
        "rotating the backup tapes", "upgrading the client terminals"}},
      {"Cleaning Services for Government Buildings",
       {"floor polish", "waste containers", "cleaning carts", "hand towels"},
       {"applying the floor polish", "emptying the waste containers",
        "restocking the cleaning carts", "replacing the hand towels"}},
      {"Procurement of Diagnostic Imaging Equipment",
       {"ultrasound scanners", "patient monitors", "infusion pumps", "examination beds"},
       {"installing the ultrasound scanners", "calibrating the patient monitors",
        "servicing the infusion pumps", "assembling the examination beds"}},
      {"Supply of Classroom Furniture",
       {"student desks", "steel chairs", "storage lockers", "whiteboards"},
       {"assembling the student desks", "delivering the steel chairs",
        "installing the storage lockers", "mounting the whiteboards"}},
      {"Seismic Reinforcement of River Bridges",
       {"steel bearings", "concrete jackets", "anchor bolts", "expansion joints"},
       {"replacing the steel bearings", "casting the concrete jackets",
        "tightening the anchor bolts", "sealing the expansion joints"}},
      {"School Lunch Catering Services",
       {"meal trays", "delivery vans", "food containers", "kitchen utensils"},
       {"washing the meal trays", "driving the delivery vans", "sealing the food containers",
        "sterilizing the kitchen utensils"}},
      {"Printing of Public Relations Materials",
       {"colour brochures", "printed posters", "paper stock", "binding materials"},
       {"printing the colour brochures", "distributing the printed posters",
        "ordering the paper stock", "storing the binding materials"}},
  };
  return kThemes;
}

const Strings kClauseTemplates = {
    "The contractor is responsible for {task}.",
    "All {item} shall conform to the approved specifications.",
    "The supplier must provide a warranty covering the {item}.",
    "Bidders shall submit a detailed plan for {task}.",
    "Progress reports on {task} are due every month.",
    "Defective {item} will be rejected at inspection.",
    "The contractor shall insure the {item} until acceptance.",
    "Subcontracting of {task} requires prior written approval.",
    "Staff engaged in {task} must follow the safety rules.",
    "Payment for the {item} will be made after inspection.",
    "Bidders must have completed similar work involving {item}.",
    "Samples of the {item} may be requested before award.",
    "Any change to the schedule for {task} must be reported.",
    "The quantity of {item} is listed in the attached table.",
    "Costs of {task} shall be included in the bid price.",
    "Joint ventures may bid for {task} subject to approval.",
    "The contractor shall dispose of packaging from the {item}.",
    "Instructions for {task} are available on request.",
};

const Strings kFillerTemplates = {
    "Note that {item} must be stored indoors.",
    "Further details on {task} appear in the annex.",
    "This clause applies equally to {item}.",
    "See the specifications for {item}.",
    "Questions about {task} will be answered in writing.",
};

const std::map<DType, Strings>& DistractorTemplates() {
  static const std::map<DType, Strings> kTemplates = {
      {DType::kDate,
       {"This notice was published on {v}.", "A briefing session for bidders was held on {v}.",
        "The previous contract was signed on {v}."}},
      {DType::kAddress,
       {"The briefing took place at {v}.", "Sample {item} can be viewed at {v}.",
        "Our former office was at {v}."}},
      {DType::kOrgName,
       {"The previous contract was held by the {v}.",
        "Technical advice was provided by the {v}."}},
      {DType::kPhone, {"The fax number is {v}.", "The general switchboard is {v}."}},
      {DType::kMoney, {"The previous contract was worth {v}.", "The bid security is {v}."}},
      {DType::kCode,
       {"Archive file {v} contains earlier notices.",
        "Internal memo {v} is not relevant to bidders."}},
  };
  return kTemplates;
}

const std::map<std::string, Strings>& CueTemplates() {
  static const std::map<std::string, Strings> kTemplates = {
      {"bid opening date",
       {"Bids will be opened on {v} in the main hall.", "The opening of bids is scheduled for {v}.",
        "Tenders shall be unsealed in public on {v}."}},
      {"contract end date",
       {"The contract period ends on {v}.",
        "All work on {task} must be completed by {v}.",
        "The agreement expires on {v} unless renewed."}},
      {"issuing office address",
       {"This notice is issued by the office located at {v}.",
        "The issuing office is situated at {v}.",
        "Submit tender documents to the issuing office at {v}."}},
      {"delivery site address",
       {"The {item} shall be delivered to the site at {v}.",
        "The delivery location for the {item} is {v}.",
        "Work on {task} will take place at {v}."}},
      {"procuring organization",
       {"This procurement is conducted by the {v}.", "The contracting authority is the {v}.",
        "The tender is administered by the {v}."}},
      {"contact phone number",
       {"For inquiries call {v} during office hours.", "The contact telephone number is {v}.",
        "Please phone {v} to arrange a site visit."}},
      {"budget amount",
       {"The estimated budget for this project is {v}.", "The ceiling price has been set at {v}.",
        "Funding of up to {v} has been allocated."}},
      {"reserved case code",
       {"The reserved case code is {v}.", "Quote reference {v} in all correspondence.",
        "This case is registered under code {v}."}},
  };
  return kTemplates;
}

const Strings kGenericCues = {"The {name} is {v}.", "The {name} shall be {v}.",
                              "Please note the {name}: {v}."};

const Strings kTowns = {"Kanda", "Sakae",  "Umeda", "Tenjin", "Nishiki", "Honcho",   "Motomachi",
                        "Ekimae", "Chuo",  "Minato", "Aoba",  "Midori",  "Asahi",    "Hikari",
                        "Sakura", "Kotobuki", "Izumi", "Hinode", "Shinmachi", "Kasuga"};
const Strings kWards = {"Chiyoda", "Naka",    "Nishi",   "Minami",   "Shiroishi", "Hakata",
                        "Sumiyoshi", "Tsurumi", "Kohoku", "Isogo",  "Atsuta",    "Higashi"};
const Strings kCities = {"Tokyo", "Osaka",  "Nagoya",  "Sapporo",   "Fukuoka", "Sendai",
                         "Kobe",  "Kyoto",  "Yokohama", "Hiroshima", "Niigata", "Kumamoto"};
const Strings kRegions = {"Hokuriku", "Kanto",   "Kinki",    "Tohoku", "Chubu",
                          "Kyushu",   "Shikoku", "Chugoku",  "Hokkaido", "Okinawa"};
const Strings kFields = {"Regional Development", "Water Resources", "Public Health", "Education",
                         "Transport",            "Forestry",        "Harbour",       "Housing"};
const Strings kSuffixes = {"Bureau", "Agency", "Office", "Authority", "Corporation"};
const Strings kAreaCodes = {"03", "06", "052", "092", "011", "022", "075", "082"};

std::string Format(const char* fmt, auto... args) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

std::string MakeValue(DType dtype, Rng& rng) {
  switch (dtype) {
    case DType::kDate:
      return Format("%04d/%02d/%02d", static_cast<int>(rng.UniformRange(2018, 2021)),
                    static_cast<int>(rng.UniformRange(1, 12)),
                    static_cast<int>(rng.UniformRange(1, 28)));
    case DType::kAddress: {
      std::string head = Format("%d-%d-%d", static_cast<int>(rng.UniformRange(1, 9)),
                                static_cast<int>(rng.UniformRange(1, 30)),
                                static_cast<int>(rng.UniformRange(1, 20)));
      return head + " " + rng.Pick(kTowns) + " " + rng.Pick(kWards) + ", " + rng.Pick(kCities);
    }
    case DType::kOrgName:
      return rng.Pick(kRegions) + " " + rng.Pick(kFields) + " " + rng.Pick(kSuffixes);
    case DType::kPhone: {
      const std::string& area = rng.Pick(kAreaCodes);
      const int middle_digits = area.size() == 2 ? 4 : 3;
      const int middle = static_cast<int>(rng.UniformInt(middle_digits == 4 ? 10000 : 1000));
      return area + "-" + Format(middle_digits == 4 ? "%04d" : "%03d", middle) + "-" +
             Format("%04d", static_cast<int>(rng.UniformInt(10000)));
    }
    case DType::kMoney: {
      const int64_t amount = rng.UniformRange(1, 999) * 100000;
      std::string digits = std::to_string(amount);
      std::string grouped;
      for (size_t i = 0; i < digits.size(); ++i) {
        if (i > 0 && (digits.size() - i) % 3 == 0) grouped += ',';
        grouped += digits[i];
      }
      return grouped + " yen";
    }
    case DType::kCode: {
      auto letter = [&rng] { return static_cast<char>('A' + rng.UniformInt(26)); };
      auto digit = [&rng] { return static_cast<char>('0' + rng.UniformInt(10)); };
      std::string code;
      code += letter();
      code += letter();
      code += '-';
      code += digit();
      code += digit();
      code += letter();
      code += digit();
      return code;
    }
  }
  throw DataError("unknown dtype");
}

std::string Fill(std::string_view tmpl, const std::map<std::string, std::string>& slots) {
  std::string out;
  size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const size_t close = tmpl.find('}', i);
      auto it = slots.find(std::string(tmpl.substr(i + 1, close - i - 1)));
      if (close != std::string_view::npos && it != slots.end()) {
        out += it->second;
        i = close + 1;
        continue;
      }
    }
    out += tmpl[i++];
  }
  return out;
}

int64_t CharLength(std::string_view s) { return Utf8Text(s).char_count(); }

struct DocumentBuilder {
  std::string text;
  int64_t chars = 0;

  // Appends one line; returns the character offset where `marker` (if any)
  // would begin, with the marker text replaced by `value`.
  int64_t AddLine(const std::string& prefix, std::string_view tmpl,
                  const std::map<std::string, std::string>& slots, const std::string* value) {
    std::string line = prefix;
    int64_t value_at = -1;
    const size_t pos = tmpl.find("{v}");
    if (value != nullptr && pos != std::string_view::npos) {
      line += Fill(tmpl.substr(0, pos), slots);
      value_at = chars + CharLength(line);
      line += *value;
      line += Fill(tmpl.substr(pos + 3), slots);
    } else {
      line += Fill(tmpl, slots);
    }
    text += line;
    text += '\n';
    chars += CharLength(line) + 1;
    return value_at;
  }
};

}  // namespace

std::vector<TagSpec> DefaultSchema() {
  return {
      {1, "bid opening date", DType::kDate},
      {2, "contract end date", DType::kDate},
      {3, "issuing office address", DType::kAddress},
      {4, "delivery site address", DType::kAddress},
      {5, "procuring organization", DType::kOrgName},
      {6, "contact phone number", DType::kPhone},
      {7, "budget amount", DType::kMoney},
      {8, "reserved case code", DType::kCode},
  };
}

void CheckGeneratorSchema(const std::vector<TagSpec>& schema) {
  ValidateSchema(schema);
  int dates = 0;
  int addresses = 0;
  int codes = 0;
  for (const auto& tag : schema) {
    dates += tag.dtype == DType::kDate;
    addresses += tag.dtype == DType::kAddress;
    codes += tag.dtype == DType::kCode;
  }
  if (dates < 2 || addresses < 2 || codes != 1) {
    throw DataError("generator schema needs >= 2 date tags, >= 2 address tags and exactly 1 code "
                    "tag; got " + std::to_string(dates) + ", " + std::to_string(addresses) +
                    ", " + std::to_string(codes));
  }
}

namespace {

AnnotatedDocument GenerateDocument(const std::string& doc_id, const std::vector<TagSpec>& schema,
                                   const GeneratorOptions& options, Rng& rng) {
  const Theme& theme = rng.Pick(Themes());
  // Index of the current subject: an item and the task that names it.
  size_t subject = rng.UniformInt(theme.items.size());
  auto slots = [&](std::map<std::string, std::string> extra = {}) {
    if (!rng.Bernoulli(options.topic_continuity)) subject = rng.UniformInt(theme.items.size());
    extra.emplace("item", theme.items[subject]);
    extra.emplace("task", theme.tasks[subject]);
    return extra;
  };
  auto AddPlainLine = [&](DocumentBuilder& builder, const std::string& prefix,
                          const Strings& templates) {
    const std::string& tmpl = rng.Pick(templates);
    builder.AddLine(prefix, tmpl, slots(), nullptr);
  };

  std::map<int, std::string> values;
  std::set<std::string> used;
  for (const auto& tag : schema) {
    if (rng.Bernoulli(options.absent_rate)) continue;
    std::string v;
    do {
      v = MakeValue(tag.dtype, rng);
    } while (used.count(v));
    used.insert(v);
    values[tag.tag_id] = v;
  }

  const int n_clauses =
      static_cast<int>(rng.UniformRange(options.min_clauses, options.max_clauses));
  if (n_clauses < static_cast<int>(schema.size())) {
    throw ConfigError("too few clauses to hold every tag");
  }
  // Clause slot of each tag; slot 0 is never a cue so documents open with
  // ordinary text.
  std::vector<int> cue_tag(n_clauses, -1);
  const std::vector<int64_t> slots_order = rng.Permutation(n_clauses - 1);
  for (size_t t = 0; t < schema.size(); ++t) cue_tag[slots_order[t] + 1] = static_cast<int>(t);

  DocumentBuilder b;
  AnnotatedDocument doc;
  doc.doc_id = doc_id;
  b.AddLine("", "Notice of Tender: {title}", {{"title", theme.title}}, nullptr);
  for (int c = 0; c < n_clauses; ++c) {
    const std::string prefix = std::to_string(c + 1) + ". ";
    if (cue_tag[c] >= 0) {
      const TagSpec& tag = schema[cue_tag[c]];
      auto found = values.find(tag.tag_id);
      if (found != values.end()) {
        auto cue = CueTemplates().find(tag.name);
        const Strings& templates = cue != CueTemplates().end() ? cue->second : kGenericCues;
        const std::string& tmpl = rng.Pick(templates);
        const auto fill = slots({{"name", tag.name}});
        const int64_t at = b.AddLine(prefix, tmpl, fill, &found->second);
        doc.gold[tag.tag_id] = GoldValue{found->second, {at, at + CharLength(found->second)}};
      } else {
        doc.gold[tag.tag_id] = std::nullopt;
        AddPlainLine(b, prefix, kClauseTemplates);
      }
    } else {
      AddPlainLine(b, prefix, kClauseTemplates);
    }
    if (!rng.Bernoulli(options.filler_rate)) continue;
    if (rng.Bernoulli(options.distractor_rate)) {
      const DType dtype = rng.Pick(schema).dtype;
      std::string v;
      do {
        v = MakeValue(dtype, rng);
      } while (used.count(v));
      const std::string& tmpl = rng.Pick(DistractorTemplates().at(dtype));
      b.AddLine("", tmpl, slots(), &v);
    } else {
      AddPlainLine(b, "", kFillerTemplates);
    }
  }
  doc.text = std::move(b.text);
  doc.sentences = SplitSentences(Utf8Text(doc.text));
  return doc;
}

// True when no gold value crosses a boundary of the default windows of its
// tag.
bool GoldsFitWindows(const AnnotatedDocument& doc, const std::vector<TagSpec>& schema,
                     int64_t window_length) {
  if (window_length <= 0) return true;
  const std::vector<Token> tokens = Tokenize(doc.text);
  for (const auto& tag : schema) {
    const auto& gold = doc.gold.at(tag.tag_id);
    if (!gold) continue;
    const int64_t capacity =
        WindowCapacity(window_length, static_cast<int64_t>(Tokenize(tag.name).size()));
    if (capacity < 1) continue;
    const TokenSpan span = CharSpanToTokens(tokens, gold->span, doc.doc_id, tag.tag_id);
    if (span.first / capacity != span.last / capacity) return false;
  }
  return true;
}

}  // namespace

Corpus GenerateCorpus(int64_t n_docs, const std::vector<TagSpec>& schema, uint64_t seed,
                      const GeneratorOptions& options) {
  if (n_docs < 1) throw ConfigError("corpus needs at least one document");
  CheckGeneratorSchema(schema);
  Corpus corpus;
  corpus.schema = schema;
  Rng rng(seed);
  for (int64_t d = 0; d < n_docs; ++d) {
    const std::string doc_id = Format("doc%04lld", static_cast<long long>(d + 1));
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000) throw DataError("could not place gold values inside windows");
      AnnotatedDocument doc = GenerateDocument(doc_id, schema, options, rng);
      if (!GoldsFitWindows(doc, schema, options.window_length)) continue;
      ValidateDocument(doc);
      corpus.documents.push_back(std::move(doc));
      break;
    }
  }
  return corpus;
}

}  // namespace spanfield
