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

#include "cli.h"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "spanfield/baseline/ngram_baseline.h"
#include "spanfield/errors.h"
#include "spanfield/extraction/evaluation.h"
#include "spanfield/extraction/extractor.h"
#include "spanfield/model/model_grad_check.h"
#include "spanfield/text/corpus_generator.h"
#include "spanfield/training/checkpoint.h"
#include "spanfield/training/trainer.h"

#ifndef SPANFIELD_VERSION
#define SPANFIELD_VERSION "unknown"
#endif

namespace spanfield {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using Settings = std::map<std::string, std::string>;

// Keys shared by the model-building commands. A key present in the resolved
// settings overrides the preset value.
const char* const kModelKeys[] = {"hidden_size",  "num_layers",   "num_heads",  "ff_size",
                                  "max_position", "conv_filters", "conv_width", "dropout_rate",
                                  "window_length", "mlp_hidden",  "use_conv",   "init_stddev"};
const char* const kTrainKeys[] = {"batch_size", "learning_rate", "warmup_fraction", "clip_norm",
                                  "max_steps",  "class_weights"};

// ------------------------------------------------------------- value parsing

std::string Trim(std::string_view s) {
  const size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  const size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

const std::string& Require(const Settings& s, const std::string& key) {
  const auto it = s.find(key);
  if (it == s.end() || it->second.empty()) throw UsageError("missing required setting '" + key + "'");
  return it->second;
}

int64_t GetInt(const Settings& s, const std::string& key) {
  const std::string& v = Require(s, key);
  int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw UsageError("setting '" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

uint64_t GetSeed(const Settings& s) {
  const int64_t v = GetInt(s, "seed");
  if (v < 0) throw UsageError("seed must be >= 0");
  return static_cast<uint64_t>(v);
}

double ParseDouble(const std::string& key, const std::string& v) {
  std::istringstream in(v);
  in.imbue(std::locale::classic());
  double out = 0.0;
  in >> out;
  if (in.fail() || !in.eof()) {
    throw UsageError("setting '" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

double GetDouble(const Settings& s, const std::string& key) {
  return ParseDouble(key, Require(s, key));
}

bool GetBool(const Settings& s, const std::string& key) {
  const std::string& v = Require(s, key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw UsageError("setting '" + key + "' expects true or false, got '" + v + "'");
}

bool Has(const Settings& s, const std::string& key) {
  const auto it = s.find(key);
  return it != s.end() && !it->second.empty();
}

// `key=value` lines; blank lines and lines starting with '#' are skipped.
Settings ReadConfigFile(const fs::path& path) {
  const std::string text = ReadTextFile(path);
  Utf8Text validate(text);  // DataError on malformed UTF-8
  Settings out;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = Trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos || Trim(t.substr(0, eq)).empty()) {
      throw UsageError(path.string() + ":" + std::to_string(number) + ": expected key=value");
    }
    out[Trim(t.substr(0, eq))] = Trim(t.substr(eq + 1));
  }
  return out;
}

// ------------------------------------------------------------------ options

// Binds command-line options to settings keys and resolves them with the
// documented precedence: flags > config file > defaults.
class Command {
 public:
  Command(CLI::App* app, Settings defaults) : app_(app), defaults_(std::move(defaults)) {
    app_->add_option("--config", config_path_, "key=value settings file");
  }

  Command& Option(const std::string& flag, const std::string& key, const std::string& help) {
    Entry& e = entries_.emplace_back();
    e.key = key;
    e.option = app_->add_option(flag, e.value, help);
    return *this;
  }

  Command& Flag(const std::string& flag, const std::string& key, const std::string& value,
                const std::string& help) {
    Entry& e = entries_.emplace_back();
    e.key = key;
    e.value = value;
    e.option = app_->add_flag(flag, help);
    return *this;
  }

  // Settings keys accepted from a config file beyond the bound options.
  Command& Keys(std::initializer_list<std::string> keys) {
    extra_keys_.insert(keys.begin(), keys.end());
    return *this;
  }
  template <size_t N>
  Command& Keys(const char* const (&keys)[N]) {
    for (const char* k : keys) extra_keys_.insert(k);
    return *this;
  }

  CLI::App* app() const { return app_; }

  Settings Resolve() const {
    Settings out = defaults_;
    if (!config_path_.empty()) {
      for (const auto& [key, value] : ReadConfigFile(config_path_)) {
        if (!Known(key)) throw UsageError("unknown setting '" + key + "' in " + config_path_);
        out[key] = value;
      }
    }
    for (const Entry& e : entries_) {
      if (e.option->count() > 0) out[e.key] = e.value;
    }
    return out;
  }

 private:
  struct Entry {
    std::string key;
    std::string value;
    CLI::Option* option = nullptr;
  };

  bool Known(const std::string& key) const {
    if (defaults_.count(key) || extra_keys_.count(key)) return true;
    for (const Entry& e : entries_) {
      if (e.key == key) return true;
    }
    return false;
  }

  CLI::App* app_;
  Settings defaults_;
  std::string config_path_;
  std::deque<Entry> entries_;
  std::set<std::string> extra_keys_;
};

// ------------------------------------------------------------------ manifest

std::string UtcNow() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path ManifestPath(const fs::path& artifact) {
  std::string p = artifact.string();
  while (p.size() > 1 && p.back() == '/') p.pop_back();
  return p + ".manifest.json";
}

struct Manifest {
  Manifest(std::string command_name, Settings resolved)
      : command(std::move(command_name)), settings(std::move(resolved)) {}

  std::string command;
  std::string started = UtcNow();
  Settings settings;
  Json extra = Json::object();
  std::map<std::string, std::string> inputs;
  std::map<std::string, std::string> outputs;

  void Write(const fs::path& artifact) const {
    Json j;
    j["command"] = command;
    j["version"] = SPANFIELD_VERSION;
    j["seed"] = Has(settings, "seed") ? Json(GetSeed(settings)) : Json(nullptr);
    j["config"] = Json(settings);
    for (const auto& [k, v] : extra.items()) j[k] = v;
    j["inputs"] = Json(inputs);
    j["outputs"] = Json(outputs);
    j["started"] = started;
    j["finished"] = UtcNow();
    WriteTextFile(ManifestPath(artifact), j.dump(2) + "\n");
  }
};

// ---------------------------------------------------------------- resolvers

ModelConfig ResolveModelConfig(ModelConfig base, const Settings& s) {
  auto set_int = [&](const char* key, int64_t* field) {
    if (Has(s, key)) *field = GetInt(s, key);
  };
  set_int("hidden_size", &base.hidden_size);
  set_int("num_layers", &base.num_layers);
  set_int("num_heads", &base.num_heads);
  set_int("ff_size", &base.ff_size);
  set_int("max_position", &base.max_position);
  set_int("conv_filters", &base.conv_filters);
  set_int("conv_width", &base.conv_width);
  set_int("window_length", &base.window_length);
  set_int("mlp_hidden", &base.mlp_hidden);
  if (Has(s, "dropout_rate")) base.dropout_rate = GetDouble(s, "dropout_rate");
  if (Has(s, "init_stddev")) base.init_stddev = GetDouble(s, "init_stddev");
  if (Has(s, "use_conv")) base.use_conv = GetBool(s, "use_conv");
  return base;
}

TrainConfig ResolveTrainConfig(Stage stage, const Settings& s) {
  TrainConfig c = TrainConfig::Defaults(stage);
  c.epochs = GetInt(s, "epochs");
  c.seed = GetSeed(s);
  if (Has(s, "batch_size")) c.batch_size = GetInt(s, "batch_size");
  if (Has(s, "learning_rate")) c.learning_rate = GetDouble(s, "learning_rate");
  if (Has(s, "warmup_fraction")) c.warmup_fraction = GetDouble(s, "warmup_fraction");
  if (Has(s, "clip_norm")) c.clip_norm = GetDouble(s, "clip_norm");
  if (Has(s, "max_steps")) c.max_steps = GetInt(s, "max_steps");
  if (Has(s, "mlm_enabled")) c.mlm_enabled = GetBool(s, "mlm_enabled");
  if (Has(s, "class_weights")) {
    const std::string& v = s.at("class_weights");
    std::array<double, 3> w{};
    std::istringstream in(v);
    std::string part;
    int n = 0;
    while (std::getline(in, part, ',')) {
      if (n == 3) throw UsageError("class_weights expects three comma-separated numbers");
      w[n++] = ParseDouble("class_weights", Trim(part));
    }
    if (n != 3) throw UsageError("class_weights expects three comma-separated numbers");
    c.class_weights = w;
  }
  c.Validate();
  return c;
}

std::vector<const AnnotatedDocument*> SelectSplit(const Corpus& corpus, const Settings& s) {
  const std::string& split = Require(s, "split");
  const CorpusSplit parts = SplitCorpus(corpus, GetDouble(s, "train_fraction"));
  if (split == "train") return parts.train;
  if (split == "test") return parts.test;
  if (split == "all") {
    std::vector<const AnnotatedDocument*> all;
    for (const auto& d : corpus.documents) all.push_back(&d);
    return all;
  }
  throw UsageError("split must be train, test or all; got '" + split + "'");
}

std::vector<const AnnotatedDocument*> TrainSplit(const Corpus& corpus, const Settings& s) {
  const double fraction = GetDouble(s, "train_fraction");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw UsageError("train_fraction must be in (0, 1]");
  return SplitCorpus(corpus, fraction).train;
}

struct LogSinks {
  std::ofstream file;
  TrainHooks hooks;

  LogSinks(const Settings& s, std::ostream& console) {
    hooks.log.console = &console;
    hooks.log.console_every = 0;
    if (Has(s, "log")) {
      file.open(s.at("log"), std::ios::binary | std::ios::trunc);
      if (!file) throw DataError("cannot open log file " + s.at("log"));
      hooks.log.file = &file;
    }
  }
};

Json ScoresJson(const Scores& s) {
  return Json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

// ------------------------------------------------------------------ commands

int GenCorpus(const Settings& s, std::ostream& out) {
  Manifest m("gen-corpus", s);
  const fs::path dir = Require(s, "out");
  std::vector<TagSpec> schema = DefaultSchema();
  if (Has(s, "schema")) {
    schema = ReadSchema(s.at("schema"));
    m.inputs["schema"] = s.at("schema");
  }
  const int64_t docs = GetInt(s, "docs");
  const Corpus corpus = GenerateCorpus(docs, schema, GetSeed(s));
  WriteCorpus(corpus, dir);
  m.outputs["corpus"] = dir.string();
  m.Write(dir);
  out << "wrote " << corpus.documents.size() << " documents to " << dir.string() << "\n";
  return kExitOk;
}

int PretrainCommand(const Settings& s, std::ostream& out) {
  Manifest m("pretrain", s);
  const Corpus corpus = ReadCorpus(Require(s, "corpus"));
  const fs::path path = Require(s, "out");
  const ModelConfig model_config = ResolveModelConfig(PresetConfig(Require(s, "preset"), 0), s);
  const TrainConfig config = ResolveTrainConfig(Stage::kPretrain, s);
  LogSinks sinks(s, out);
  TrainResult result;
  const Checkpoint ckpt = RunPretraining(TrainSplit(corpus, s), corpus.schema, model_config,
                                         config, sinks.hooks, &result);
  SaveCheckpoint(ckpt, path);
  m.inputs["corpus"] = s.at("corpus");
  m.outputs["checkpoint"] = path.string();
  if (Has(s, "log")) m.outputs["log"] = s.at("log");
  m.extra["model_config"] = ckpt.config.ToJson();
  m.extra["epoch_losses"] = result.epoch_losses;
  m.extra["nsp_accuracy"] = result.nsp_accuracy;
  m.Write(path);
  out << "saved " << path.string() << "\n";
  return kExitOk;
}

int FinetuneCommand(const Settings& s, std::ostream& out) {
  Manifest m("finetune", s);
  const Corpus corpus = ReadCorpus(Require(s, "corpus"));
  const fs::path path = Require(s, "out");
  const std::string& init_arg = Require(s, "init");
  std::optional<Checkpoint> init;
  ModelConfig base = PresetConfig(Require(s, "preset"), 0);
  if (init_arg != "fresh") {
    init = LoadCheckpoint(init_arg);
    base = init->config;
    m.inputs["init"] = init_arg;
  }
  const ModelConfig model_config = ResolveModelConfig(base, s);
  const TrainConfig config = ResolveTrainConfig(Stage::kFinetune, s);
  LogSinks sinks(s, out);
  TrainResult result;
  const Checkpoint ckpt =
      RunFinetune(TrainSplit(corpus, s), corpus.schema, init ? &*init : nullptr, model_config,
                  config, sinks.hooks, {}, &result);
  SaveCheckpoint(ckpt, path);
  m.inputs["corpus"] = s.at("corpus");
  m.outputs["checkpoint"] = path.string();
  if (Has(s, "log")) m.outputs["log"] = s.at("log");
  m.extra["model_config"] = ckpt.config.ToJson();
  m.extra["epoch_losses"] = result.epoch_losses;
  m.Write(path);
  out << "saved " << path.string() << "\n";
  return kExitOk;
}

int ExtractCommand(const Settings& s, std::ostream& out) {
  Manifest m("extract", s);
  const Checkpoint ckpt = LoadCheckpoint(Require(s, "model"));
  const Model<float> model = ModelFromCheckpoint(ckpt);
  const Vocab vocab = CheckpointVocab(ckpt);
  const std::vector<TagSpec> schema = ReadSchema(Require(s, "schema"));
  const fs::path doc_path = Require(s, "doc");
  const AnnotatedDocument doc = MakeDocument(doc_path.stem().string(), ReadTextFile(doc_path));
  ExtractOptions options;
  options.max_span = GetInt(s, "max_span");
  const auto preds = ExtractDocument(model, vocab, schema, doc, options);
  const fs::path path = Require(s, "out");
  WriteTextFile(path, PredictionsToJson(preds, schema));
  m.inputs = {{"model", s.at("model")}, {"doc", s.at("doc")}, {"schema", s.at("schema")}};
  m.outputs["predictions"] = path.string();
  m.Write(path);
  out << "wrote " << path.string() << "\n";
  return kExitOk;
}

void WriteEvaluation(const Settings& s, const std::vector<SpanPrediction>& preds,
                     const std::vector<TagSpec>& schema, const EvalReport& report, Manifest* m,
                     std::ostream& out) {
  const fs::path path = Require(s, "report");
  WriteTextFile(path, ReportToJson(report));
  m->outputs["report"] = path.string();
  if (Has(s, "predictions")) {
    WriteTextFile(s.at("predictions"), PredictionsToJson(preds, schema));
    m->outputs["predictions"] = s.at("predictions");
  }
  m->extra["overall"] = ScoresJson(report.overall);
  m->Write(path);
  char line[128];
  std::snprintf(line, sizeof(line), "precision=%.4f recall=%.4f f1=%.4f\n",
                report.overall.precision, report.overall.recall, report.overall.f1);
  out << line;
  for (const TagScores& t : report.tags) {
    std::snprintf(line, sizeof(line), "  tag %d %-28s f1=%.4f\n", t.tag_id, t.tag_name.c_str(),
                  t.scores.f1);
    out << line;
  }
}

int EvaluateCommand(const Settings& s, std::ostream& out) {
  Manifest m("evaluate", s);
  const Checkpoint ckpt = LoadCheckpoint(Require(s, "model"));
  const Model<float> model = ModelFromCheckpoint(ckpt);
  const Vocab vocab = CheckpointVocab(ckpt);
  const Corpus corpus = ReadCorpus(Require(s, "corpus"));
  const auto docs = SelectSplit(corpus, s);
  ExtractOptions options;
  options.max_span = GetInt(s, "max_span");
  const auto preds = ExtractAll(model, vocab, corpus.schema, docs, options);
  const EvalReport report = Evaluate(preds, docs, corpus.schema);
  m.inputs = {{"model", s.at("model")}, {"corpus", s.at("corpus")}};
  WriteEvaluation(s, preds, corpus.schema, report, &m, out);
  return kExitOk;
}

int BaselineTrainCommand(const Settings& s, std::ostream& out, std::ostream& err) {
  Manifest m("baseline train", s);
  const Corpus corpus = ReadCorpus(Require(s, "corpus"));
  SentenceMlpConfig config;
  config.epochs = GetInt(s, "epochs");
  config.batch_size = GetInt(s, "batch_size");
  config.learning_rate = GetDouble(s, "learning_rate");
  config.hidden = GetInt(s, "hidden");
  config.seed = GetSeed(s);
  BaselineTrainReport report;
  const BaselineModel model =
      TrainBaseline(TrainSplit(corpus, s), corpus.schema, config, GetInt(s, "dim"), &report, &err);
  const fs::path path = Require(s, "out");
  SaveBaseline(model, path);
  Json accuracy = Json::object();
  for (const auto& [tag_id, stats] : report.per_tag) {
    accuracy[std::to_string(tag_id)] = stats.train_accuracy;
  }
  m.inputs["corpus"] = s.at("corpus");
  m.outputs["model"] = path.string();
  m.extra["train_accuracy"] = accuracy;
  m.Write(path);
  out << "saved " << path.string() << "\n";
  return kExitOk;
}

int BaselineEvaluateCommand(const Settings& s, std::ostream& out) {
  Manifest m("baseline evaluate", s);
  const BaselineModel model = LoadBaseline(Require(s, "model"));
  const Corpus corpus = ReadCorpus(Require(s, "corpus"));
  const RegexBook book =
      Has(s, "regexbook") ? RegexBook::Load(s.at("regexbook")) : RegexBook::Default();
  const auto docs = SelectSplit(corpus, s);
  const auto preds = BaselineExtractAll(model, docs, book);
  const EvalReport report = Evaluate(preds, docs, corpus.schema);
  m.inputs = {{"model", s.at("model")}, {"corpus", s.at("corpus")}};
  if (Has(s, "regexbook")) m.inputs["regexbook"] = s.at("regexbook");
  WriteEvaluation(s, preds, corpus.schema, report, &m, out);
  return kExitOk;
}

int GradcheckCommand(const Settings& s, std::ostream& out) {
  const std::string& preset = Require(s, "preset");
  // "toy" names the reduced architecture that keeps a full 64-bit sweep
  // under a few thousand parameters.
  if (preset != "toy" && preset != "gradcheck") {
    throw UsageError("gradcheck supports --preset toy; got '" + preset + "'");
  }
  const ModelConfig config = PresetConfig("gradcheck", GetInt(s, "vocab_size"));
  const GradCheckReport report =
      CheckModelGradients(config, GetSeed(s), GetInt(s, "samples_per_param"));
  int64_t coordinates = 0;
  for (const auto& e : report.entries) coordinates += e.coordinates_checked;
  char line[160];
  for (const auto& e : report.entries) {
    std::snprintf(line, sizeof(line), "%-36s coords=%-5lld max_rel_err=%.3e %s\n", e.name.c_str(),
                  static_cast<long long>(e.coordinates_checked), e.max_relative_error,
                  e.passed ? "ok" : "FAIL");
    out << line;
  }
  std::snprintf(line, sizeof(line), "parameters=%lld checked=%lld max relative error %.3e\n",
                static_cast<long long>(Model<double>(config).params().TotalSize()),
                static_cast<long long>(coordinates), report.max_relative_error);
  out << line << (report.passed ? "PASS" : "FAIL") << "\n";
  return report.passed ? kExitOk : kExitNumeric;
}

// Adds the model and optimisation keys accepted by the training commands.
void AddTrainingOptions(Command& c) {
  c.Option("--corpus", "corpus", "corpus directory")
      .Option("--preset", "preset", "model preset: toy or paper")
      .Option("--epochs", "epochs", "training epochs")
      .Option("--seed", "seed", "run seed")
      .Option("--out", "out", "checkpoint to write")
      .Option("--log", "log", "per-step loss log file")
      .Option("--batch-size", "batch_size", "windows per batch")
      .Option("--lr", "learning_rate", "peak learning rate")
      .Option("--train-fraction", "train_fraction", "share of documents in the train split")
      .Keys(kModelKeys)
      .Keys(kTrainKeys);
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tag-conditioned span extraction: corpus generation, training and evaluation",
               "spanfield"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SPANFIELD_VERSION);

  const std::string fraction = "0.78";
  std::vector<std::pair<CLI::App*, std::function<int(const Settings&)>>> handlers;
  std::deque<Command> commands;

  {
    auto* sub = app.add_subcommand("gen-corpus", "write a synthetic annotated corpus");
    Command& c = commands.emplace_back(sub, Settings{{"docs", "200"}, {"seed", "0"}});
    c.Option("--out", "out", "corpus directory to write")
        .Option("--docs", "docs", "number of documents")
        .Option("--seed", "seed", "generator seed")
        .Option("--schema", "schema", "schema.json to use instead of the default tags");
    handlers.emplace_back(sub, [&out](const Settings& s) { return GenCorpus(s, out); });
  }
  {
    auto* sub = app.add_subcommand("pretrain", "next-sentence and masked-token pre-training");
    Command& c = commands.emplace_back(
        sub, Settings{{"preset", "toy"}, {"epochs", "5"}, {"seed", "0"},
                      {"mlm_enabled", "true"}, {"train_fraction", fraction}});
    AddTrainingOptions(c);
    c.Flag("--no-mlm", "mlm_enabled", "false", "next-sentence objective only");
    handlers.emplace_back(sub, [&out](const Settings& s) { return PretrainCommand(s, out); });
  }
  {
    auto* sub = app.add_subcommand("finetune", "span-label fine-tuning");
    Command& c = commands.emplace_back(
        sub, Settings{{"preset", "toy"}, {"epochs", "20"}, {"seed", "0"},
                      {"train_fraction", fraction}});
    AddTrainingOptions(c);
    c.Option("--init", "init", "pre-trained checkpoint or 'fresh'")
        .Flag("--no-conv", "use_conv", "false", "classify encoder outputs directly");
    handlers.emplace_back(sub, [&out](const Settings& s) { return FinetuneCommand(s, out); });
  }
  {
    auto* sub = app.add_subcommand("extract", "extract every tag from one document");
    Command& c = commands.emplace_back(sub, Settings{{"max_span", "30"}});
    c.Option("--model", "model", "fine-tuned checkpoint")
        .Option("--doc", "doc", "UTF-8 document, one sentence per line")
        .Option("--schema", "schema", "schema.json")
        .Option("--out", "out", "predictions JSON to write")
        .Option("--max-span", "max_span", "longest span in tokens");
    handlers.emplace_back(sub, [&out](const Settings& s) { return ExtractCommand(s, out); });
  }
  {
    auto* sub = app.add_subcommand("evaluate", "exact-match scores of a checkpoint");
    Command& c = commands.emplace_back(
        sub, Settings{{"split", "test"}, {"max_span", "30"}, {"train_fraction", fraction}});
    c.Option("--model", "model", "fine-tuned checkpoint")
        .Option("--corpus", "corpus", "corpus directory")
        .Option("--split", "split", "train, test or all")
        .Option("--report", "report", "report JSON to write")
        .Option("--predictions", "predictions", "optional predictions JSON to write")
        .Option("--max-span", "max_span", "longest span in tokens")
        .Option("--train-fraction", "train_fraction", "share of documents in the train split");
    handlers.emplace_back(sub, [&out](const Settings& s) { return EvaluateCommand(s, out); });
  }
  {
    auto* sub = app.add_subcommand("baseline", "n-gram sentence classifier with regexes");
    sub->require_subcommand(1);
    auto* train = sub->add_subcommand("train", "train one sentence classifier per tag");
    Command& t = commands.emplace_back(
        train, Settings{{"seed", "0"}, {"epochs", "10"}, {"batch_size", "128"},
                        {"learning_rate", "0.001"}, {"hidden", "64"},
                        {"dim", std::to_string(kDefaultHashDim)}, {"train_fraction", fraction}});
    t.Option("--corpus", "corpus", "corpus directory")
        .Option("--out", "out", "baseline model to write")
        .Option("--seed", "seed", "run seed")
        .Option("--epochs", "epochs", "training epochs")
        .Option("--batch-size", "batch_size", "sentences per batch")
        .Option("--lr", "learning_rate", "Adam learning rate")
        .Option("--train-fraction", "train_fraction", "share of documents in the train split");
    handlers.emplace_back(train,
                          [&out, &err](const Settings& s) { return BaselineTrainCommand(s, out, err); });
    auto* eval = sub->add_subcommand("evaluate", "exact-match scores of a baseline model");
    Command& e = commands.emplace_back(eval,
                                       Settings{{"split", "test"}, {"train_fraction", fraction}});
    e.Option("--model", "model", "baseline model")
        .Option("--corpus", "corpus", "corpus directory")
        .Option("--split", "split", "train, test or all")
        .Option("--report", "report", "report JSON to write")
        .Option("--predictions", "predictions", "optional predictions JSON to write")
        .Option("--regexbook", "regexbook", "regex book JSON (default: shipped book)")
        .Option("--train-fraction", "train_fraction", "share of documents in the train split");
    handlers.emplace_back(eval, [&out](const Settings& s) { return BaselineEvaluateCommand(s, out); });
  }
  {
    auto* sub = app.add_subcommand("gradcheck", "64-bit finite-difference check of the model");
    Command& c = commands.emplace_back(
        sub, Settings{{"preset", "toy"}, {"seed", "0"}, {"vocab_size", "23"},
                      {"samples_per_param", "0"}});
    c.Option("--preset", "preset", "architecture to check (toy)")
        .Option("--seed", "seed", "initialization and input seed");
    handlers.emplace_back(sub, [&out](const Settings& s) { return GradcheckCommand(s, out); });
  }

  std::vector<char*> argv;
  std::vector<std::string> storage = args.empty() ? std::vector<std::string>{"spanfield"} : args;
  for (auto& a : storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << SPANFIELD_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    for (size_t i = 0; i < handlers.size(); ++i) {
      if (handlers[i].first->parsed()) {
        const Command& command = *std::find_if(
            commands.begin(), commands.end(),
            [&](const Command& c) { return c.app() == handlers[i].first; });
        return handlers[i].second(command.Resolve());
      }
    }
    err << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace spanfield
