/* Copyright 2026 The rnsx Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "rnsx/train.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rnsx/checkpoint.h"
#include "rnsx/error.h"

namespace rnsx {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// ---- configuration -----------------------------------------------------------

double TrainConfig::effective_learning_rate() const {
  return learning_rate > 0.0 ? learning_rate : DefaultLearningRate(optimizer);
}

void TrainConfig::Validate() const {
  EncoderConfig e = encoder;
  e.dropout = dropout;
  e.Validate();
  if (learning_rate < 0.0 || !std::isfinite(learning_rate)) {
    Fail(ErrorKind::kUsage, "learning_rate must be > 0 (or 0 for the optimizer default)");
  }
  if (patience < 1) Fail(ErrorKind::kUsage, "patience must be >= 1");
  if (batch_size < 1) Fail(ErrorKind::kUsage, "batch_size must be >= 1");
  if (max_epochs < 1) Fail(ErrorKind::kUsage, "max_epochs must be >= 1");
  if (!(clip_norm > 0.0)) Fail(ErrorKind::kUsage, "clip_norm must be positive");
  if (vocabulary.min_frequency < 1) Fail(ErrorKind::kUsage, "min_frequency must be >= 1");
}

namespace {

json EncoderToJson(const EncoderConfig& e) {
  return json{{"variant", VariantName(e.variant)},
              {"tree_mode", TreeModeName(e.tree_mode)},
              {"root_mode", RootModeName(e.root_mode)},
              {"aggregation", AggregationName(e.aggregation)},
              {"pooling", "max"},
              {"embedding_dim", e.embedding_dim},
              {"lstm_hidden", e.lstm_hidden},
              {"relation_hidden", e.relation_hidden},
              {"output_hidden", e.output_hidden},
              {"attention_dim", e.attention_dim},
              {"mlp_layers", e.mlp_layers},
              {"recurrent_steps", e.recurrent_steps}};
}

json ConfigToJson(const TrainConfig& c) {
  json axes = json::object();
  for (const auto& [k, v] : c.grid_axes) axes[k] = json::parse(v);
  return json{{"encoder", EncoderToJson(c.encoder)},
              {"head_hidden", c.head_hidden},
              {"optimizer", OptimizerName(c.optimizer)},
              {"learning_rate", c.learning_rate},
              {"dropout", c.dropout},
              {"batch_size", c.batch_size},
              {"max_epochs", c.max_epochs},
              {"patience", c.patience},
              {"clip_norm", c.clip_norm},
              {"seed", c.seed},
              {"task", c.task == TaskKind::kPair ? "pair" : "single"},
              {"train_file", c.train_file},
              {"dev_file", c.dev_file},
              {"test_file", c.test_file},
              {"validation_size", c.validation_size},
              {"allow_empty_dev", c.allow_empty_dev},
              {"labels", c.labels},
              {"min_frequency", c.vocabulary.min_frequency},
              {"lowercase", c.vocabulary.lowercase},
              {"embeddings_file", c.embeddings_file},
              {"grid_axes", axes}};
}

template <typename T>
void Read(const json& j, const char* key, T* out) {
  if (!j.contains(key)) return;
  try {
    *out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    Fail(ErrorKind::kUsage, std::string("config field '") + key + "': " + e.what());
  }
}

void CheckKeys(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) Fail(ErrorKind::kUsage, "unknown config field '" + where + it.key() + "'");
  }
}

EncoderConfig EncoderFromJson(const json& j) {
  if (!j.is_object()) Fail(ErrorKind::kUsage, "config field 'encoder' must be an object");
  CheckKeys(j, {"variant", "tree_mode", "root_mode", "aggregation", "pooling", "embedding_dim",
                "lstm_hidden", "relation_hidden", "output_hidden", "attention_dim", "mlp_layers",
                "recurrent_steps"},
            "encoder.");
  EncoderConfig e;
  std::string s;
  if (j.contains("variant")) { Read(j, "variant", &s); e.variant = ParseVariant(s); }
  if (j.contains("tree_mode")) { Read(j, "tree_mode", &s); e.tree_mode = ParseTreeMode(s); }
  if (j.contains("root_mode")) { Read(j, "root_mode", &s); e.root_mode = ParseRootMode(s); }
  if (j.contains("aggregation")) { Read(j, "aggregation", &s); e.aggregation = ParseAggregation(s); }
  if (j.contains("pooling")) {
    Read(j, "pooling", &s);
    if (s != "max") Fail(ErrorKind::kUsage, "only max pooling is supported");
  }
  Read(j, "embedding_dim", &e.embedding_dim);
  Read(j, "lstm_hidden", &e.lstm_hidden);
  Read(j, "relation_hidden", &e.relation_hidden);
  Read(j, "output_hidden", &e.output_hidden);
  Read(j, "attention_dim", &e.attention_dim);
  Read(j, "mlp_layers", &e.mlp_layers);
  Read(j, "recurrent_steps", &e.recurrent_steps);
  return e;
}

TrainConfig ConfigFromJson(const json& j) {
  if (!j.is_object()) Fail(ErrorKind::kUsage, "config must be a JSON object");
  CheckKeys(j, {"encoder", "head_hidden", "optimizer", "learning_rate", "dropout", "batch_size",
                "max_epochs", "patience", "clip_norm", "seed", "task", "train_file", "dev_file",
                "test_file", "validation_size", "allow_empty_dev", "labels", "min_frequency",
                "lowercase", "embeddings_file", "grid_axes"},
            "");
  TrainConfig c;
  if (j.contains("encoder")) c.encoder = EncoderFromJson(j.at("encoder"));
  std::string s;
  Read(j, "head_hidden", &c.head_hidden);
  if (j.contains("optimizer")) { Read(j, "optimizer", &s); c.optimizer = ParseOptimizer(s); }
  Read(j, "learning_rate", &c.learning_rate);
  Read(j, "dropout", &c.dropout);
  Read(j, "batch_size", &c.batch_size);
  Read(j, "max_epochs", &c.max_epochs);
  Read(j, "patience", &c.patience);
  Read(j, "clip_norm", &c.clip_norm);
  Read(j, "seed", &c.seed);
  if (j.contains("task")) {
    Read(j, "task", &s);
    if (s == "single") c.task = TaskKind::kSingle;
    else if (s == "pair") c.task = TaskKind::kPair;
    else Fail(ErrorKind::kUsage, "task must be 'single' or 'pair'");
  }
  Read(j, "train_file", &c.train_file);
  Read(j, "dev_file", &c.dev_file);
  Read(j, "test_file", &c.test_file);
  Read(j, "validation_size", &c.validation_size);
  Read(j, "allow_empty_dev", &c.allow_empty_dev);
  Read(j, "labels", &c.labels);
  Read(j, "min_frequency", &c.vocabulary.min_frequency);
  Read(j, "lowercase", &c.vocabulary.lowercase);
  Read(j, "embeddings_file", &c.embeddings_file);
  if (j.contains("grid_axes")) {
    const json& axes = j.at("grid_axes");
    if (!axes.is_object()) Fail(ErrorKind::kUsage, "grid_axes must map field names to lists");
    for (auto it = axes.begin(); it != axes.end(); ++it) {
      if (!it.value().is_array()) {
        Fail(ErrorKind::kUsage, "grid axis '" + it.key() + "' must be a list");
      }
      c.grid_axes.emplace_back(it.key(), it.value().dump());
    }
  }
  c.encoder.dropout = c.dropout;
  c.Validate();
  return c;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorKind::kIo, "cannot write '" + path + "'");
  out << text;
}

}  // namespace

TrainConfig ParseTrainConfig(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    Fail(ErrorKind::kUsage, std::string("config is not valid JSON: ") + e.what());
  }
  return ConfigFromJson(j);
}

TrainConfig LoadTrainConfig(const std::string& path) { return ParseTrainConfig(ReadFile(path)); }

std::string TrainConfigToJson(const TrainConfig& c) { return ConfigToJson(c).dump(2); }

std::uint64_t DeriveSeed(std::uint64_t master, SeedStream stream) {
  // splitmix64 finalizer over (master, stream)
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(stream) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// ---- data --------------------------------------------------------------------

namespace {

std::vector<std::string> ScanLabels(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot open '" + path + "'");
  std::set<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    std::size_t tab = line.find('\t');
    if (tab != std::string::npos) labels.insert(line.substr(0, tab));
  }
  return {labels.begin(), labels.end()};
}

}  // namespace

std::vector<Example> ReadCorpus(const TrainConfig& c, const std::string& path,
                                const LabelSet& labels) {
  std::vector<Example> exs = c.task == TaskKind::kPair ? ReadPairTsv(path, labels)
                                                       : ReadSingleSentenceTsv(path, labels);
  fs::path trees = fs::path(path).replace_extension(".conllu");
  if (fs::exists(trees)) AttachTrees(exs, ReadConlluHeads(trees.string()));
  return exs;
}

Dataset LoadDataset(const TrainConfig& c, const std::string& data_dir) {
  fs::path dir(data_dir);
  std::string train_path = (dir / c.train_file).string();
  Dataset d;
  d.labels = LabelSet(c.labels.empty() ? ScanLabels(train_path) : c.labels);
  if (d.labels.size() < 2) Fail(ErrorKind::kFormat, "training data needs at least two labels");
  std::vector<Example> train = ReadCorpus(c, train_path, d.labels);
  if (train.empty()) Fail(ErrorKind::kFormat, "training file '" + train_path + "' is empty");
  if (!c.dev_file.empty()) {
    d.train = std::move(train);
    d.dev = ReadCorpus(c, (dir / c.dev_file).string(), d.labels);
  } else {
    Split s = SplitValidation(train, c.validation_size, DeriveSeed(c.seed, SeedStream::kSplit),
                              c.allow_empty_dev);
    d.train = std::move(s.train);
    d.dev = std::move(s.dev);
  }
  if (!c.test_file.empty()) d.test = ReadCorpus(c, (dir / c.test_file).string(), d.labels);
  if (!c.embeddings_file.empty()) d.embeddings_path = (dir / c.embeddings_file).string();
  return d;
}

// ---- reports -----------------------------------------------------------------

namespace {

json ReportJson(const RunReport& r) {
  json epochs = json::array();
  for (const auto& e : r.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"dev_accuracy", e.dev_accuracy},
                      {"seconds", e.seconds}});
  }
  json j{{"epochs", epochs},
         {"best_epoch", r.best_epoch},
         {"best_dev_accuracy", r.best_dev_accuracy},
         {"checkpoint", r.checkpoint},
         {"test_accuracy", r.test_accuracy < 0 ? json(nullptr) : json(r.test_accuracy)},
         {"predictions", r.predictions},
         {"wall_seconds", r.wall_seconds},
         {"parameters", r.parameters},
         {"embedding_hits", r.embedding_hits}};
  j["config"] = r.config_json.empty() ? json(nullptr) : json::parse(r.config_json);
  return j;
}

std::string Fixed(double v, int prec) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

// Right-aligned columns sized to their widest cell.
std::string Table(const std::vector<std::string>& header,
                  const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> w(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) w[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) w[c] = std::max(w[c], r[c].size());
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) os << "  ";
      os << std::setw(static_cast<int>(w[c])) << r[c];
    }
    os << "\n";
  };
  line(header);
  std::vector<std::string> rule;
  for (auto x : w) rule.push_back(std::string(x, '-'));
  line(rule);
  for (const auto& r : rows) line(r);
  return os.str();
}

}  // namespace

std::string RunReportToJson(const RunReport& r) { return ReportJson(r).dump(2); }

std::string RunReportTable(const RunReport& r) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& e : r.epochs) {
    rows.push_back({std::to_string(e.epoch), Fixed(e.train_loss, 4), Fixed(100 * e.dev_accuracy, 2),
                    Fixed(e.seconds, 1), e.epoch == r.best_epoch ? "*" : ""});
  }
  std::ostringstream os;
  os << Table({"epoch", "train_loss", "dev_acc", "sec", "best"}, rows);
  os << "\nbest epoch      " << r.best_epoch << "\n";
  os << "best dev acc    " << Fixed(100 * r.best_dev_accuracy, 2) << "\n";
  os << "test acc        " << (r.test_accuracy < 0 ? "n/a" : Fixed(100 * r.test_accuracy, 2))
     << "\n";
  os << "parameters      " << r.parameters << "\n";
  os << "checkpoint      " << r.checkpoint << "\n";
  os << "wall clock (s)  " << Fixed(r.wall_seconds, 1) << "\n";
  return os.str();
}

// ---- checkpoints -------------------------------------------------------------

void SaveModel(const std::string& path, const TrainConfig& c, const LabelSet& labels,
               const Vocabulary& vocab, const ParameterStore& store) {
  SaveParameters(path, store);
  json meta{{"format", kCheckpointMagic},
            {"config", ConfigToJson(c)},
            {"labels", labels.labels()},
            {"vocabulary", vocab.tokens()}};
  WriteFile(path + ".json", meta.dump());
}

LoadedModel LoadModel(const std::string& path) {
  json meta;
  try {
    meta = json::parse(ReadFile(path + ".json"));
  } catch (const json::exception& e) {
    Fail(ErrorKind::kFormat, "checkpoint metadata '" + path + ".json' is unreadable: " + e.what());
  }
  LoadedModel m;
  try {
    if (meta.at("format") != kCheckpointMagic) Fail(ErrorKind::kFormat, "unknown checkpoint format");
    json cfg = meta.at("config");
    cfg["grid_axes"] = json::object();
    m.config = ConfigFromJson(cfg);
    m.labels = LabelSet(meta.at("labels").get<std::vector<std::string>>());
    m.vocab = std::make_unique<Vocabulary>(meta.at("vocabulary").get<std::vector<std::string>>(),
                                           m.config.vocabulary);
  } catch (const json::exception& e) {
    Fail(ErrorKind::kFormat, "checkpoint metadata '" + path + ".json': " + e.what());
  } catch (const Error& e) {
    Fail(ErrorKind::kFormat, "checkpoint metadata '" + path + ".json': " + e.what());
  }
  ModelShape shape;
  shape.encoder = m.config.encoder;
  shape.encoder.dropout = m.config.dropout;
  shape.vocab_size = m.vocab->size();
  shape.classes = m.labels.size();
  shape.head_hidden = m.config.head_hidden;
  shape.pair = m.config.task == TaskKind::kPair;
  m.store = std::make_unique<ParameterStore>();
  std::mt19937_64 rng(0);
  m.model = std::make_unique<TextClassifier>(shape, *m.store, rng);
  LoadParameters(path, *m.store);
  return m;
}

// ---- training ----------------------------------------------------------------

Evaluation Evaluate(const TextClassifier& model, std::span<const Example> examples,
                    const Vocabulary& vocab, const LabelSet& labels, std::size_t batch_size) {
  Evaluation ev;
  if (examples.empty()) return ev;
  std::vector<std::size_t> pred, gold;
  for (const Batch& b : MakeBatches(examples, batch_size, vocab, labels)) {
    auto probs = model.Predict(b);
    for (std::size_t i = 0; i < b.size(); ++i) {
      PredictionRow r{examples[b.examples[i]].id, b.labels[i], std::move(probs[i])};
      pred.push_back(r.predicted());
      gold.push_back(r.gold);
      ev.rows.push_back(std::move(r));
    }
  }
  ev.accuracy = Accuracy(pred, gold);
  return ev;
}

namespace {

[[noreturn]] void NonFinite(const Tape& t, const std::string& where) {
  auto bad = t.FirstNonFinite();
  std::string what = bad ? "op '" + bad->second + "' (node " + std::to_string(bad->first) + ")"
                         : "an unknown operation";
  Fail(ErrorKind::kNumeric, "non-finite loss at " + where + "; first non-finite value from " + what);
}

void CheckGradients(const Tape& t, const ParameterStore& store, const std::string& where) {
  for (const auto& p : store.all()) {
    if (p->grad.AllFinite()) continue;
    // Backward runs from the highest id down, so the first bad gradient
    // is the highest-numbered node holding one.
    std::string op = "?";
    for (std::size_t id = t.size(); id-- > 0;) {
      if (t.requires_grad(id) && !t.grad(id).empty() && !t.grad(id).AllFinite()) {
        op = t.op(id);
        break;
      }
    }
    Fail(ErrorKind::kNumeric, "non-finite gradient for '" + p->name + "' at " + where +
                                  "; first produced in the backward pass of op '" + op + "'");
  }
}

void WritePredictions(const std::string& path, const LabelSet& labels,
                      const std::vector<PredictionRow>& rows) {
  std::ofstream out(path);
  if (!out) Fail(ErrorKind::kIo, "cannot write '" + path + "'");
  WritePredictionsTsv(out, labels, rows);
}

}  // namespace

RunReport Train(const TrainConfig& c, const Dataset& data, const std::string& out_dir) {
  c.Validate();
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  if (data.train.empty()) Fail(ErrorKind::kFormat, "no training examples");
  fs::create_directories(out_dir);

  RunReport report;
  report.config_json = TrainConfigToJson(c);
  Vocabulary vocab = Vocabulary::Build(data.train, c.vocabulary);
  ModelShape shape;
  shape.encoder = c.encoder;
  shape.encoder.dropout = c.dropout;
  shape.vocab_size = vocab.size();
  shape.classes = data.labels.size();
  shape.head_hidden = c.head_hidden;
  shape.pair = c.task == TaskKind::kPair;

  std::mt19937_64 init_rng(DeriveSeed(c.seed, SeedStream::kInit));
  ParameterStore store;
  TextClassifier model(shape, store, init_rng);
  if (!data.embeddings_path.empty()) {
    EmbeddingTable e =
        LoadPretrainedEmbeddings(data.embeddings_path, vocab, c.encoder.embedding_dim, init_rng);
    model.embeddings().value = e.table;
    report.embedding_hits = e.hits;
  }
  report.parameters = store.NumValues();

  Optimizer opt(c.optimizer, c.effective_learning_rate());
  std::mt19937_64 shuffle_rng(DeriveSeed(c.seed, SeedStream::kShuffle));
  std::mt19937_64 dropout_rng(DeriveSeed(c.seed, SeedStream::kDropout));
  // Without a dev set, checkpoints are chosen by training accuracy.
  std::span<const Example> dev = data.dev.empty() ? std::span<const Example>(data.train)
                                                  : std::span<const Example>(data.dev);
  report.checkpoint = (fs::path(out_dir) / "model.rnsx").string();

  std::vector<std::size_t> order(data.train.size());
  std::size_t since_best = 0;
  bool have_best = false;
  for (std::size_t epoch = 1; epoch <= c.max_epochs; ++epoch) {
    const auto epoch_start = Clock::now();
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t seen = 0, batch_no = 0;
    for (const Batch& b : MakeBatches(data.train, c.batch_size, vocab, data.labels, order)) {
      ++batch_no;
      const std::string where =
          "epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_no);
      Tape t;
      t.set_training(true);
      t.Seed(dropout_rng());
      Var loss = model.Loss(t, b);
      double l = loss.value().Item();
      if (!std::isfinite(l)) NonFinite(t, where);
      t.Backward(loss);
      CheckGradients(t, store, where);
      ClipGradientNorm(store, c.clip_norm);
      opt.Step(store);
      loss_sum += l * static_cast<double>(b.size());
      seen += b.size();
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(seen);
    rec.dev_accuracy = Evaluate(model, dev, vocab, data.labels).accuracy;
    rec.seconds = std::chrono::duration<double>(Clock::now() - epoch_start).count();
    report.epochs.push_back(rec);
    if (!have_best || rec.dev_accuracy > report.best_dev_accuracy) {
      have_best = true;
      report.best_dev_accuracy = rec.dev_accuracy;
      report.best_epoch = epoch;
      SaveModel(report.checkpoint, c, data.labels, vocab, store);
      since_best = 0;
    } else if (++since_best >= c.patience) {
      break;
    }
  }

  LoadParameters(report.checkpoint, store);
  if (!data.test.empty()) {
    Evaluation ev = Evaluate(model, data.test, vocab, data.labels);
    report.test_accuracy = ev.accuracy;
    report.predictions = (fs::path(out_dir) / "test_predictions.tsv").string();
    WritePredictions(report.predictions, data.labels, ev.rows);
  }
  report.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  WriteFile((fs::path(out_dir) / "report.json").string(), RunReportToJson(report));
  WriteFile((fs::path(out_dir) / "report.txt").string(), RunReportTable(report));
  return report;
}

// ---- grid search -------------------------------------------------------------

namespace {

void SetPath(json& j, const std::string& dotted, const json& value) {
  json* cur = &j;
  std::size_t start = 0;
  while (true) {
    std::size_t dot = dotted.find('.', start);
    std::string key = dotted.substr(start, dot - start);
    if (dot == std::string::npos) {
      if (!cur->contains(key)) Fail(ErrorKind::kUsage, "grid axis '" + dotted + "' names no field");
      (*cur)[key] = value;
      return;
    }
    if (!cur->contains(key) || !(*cur)[key].is_object()) {
      Fail(ErrorKind::kUsage, "grid axis '" + dotted + "' names no field");
    }
    cur = &(*cur)[key];
    start = dot + 1;
  }
}

}  // namespace

GridResult GridSearch(const TrainConfig& c, const Dataset& data, const std::string& out_dir) {
  std::vector<std::pair<std::string, json>> axes;
  for (const auto& [k, v] : c.grid_axes) axes.emplace_back(k, json::parse(v));
  if (axes.empty()) {
    // The two optimizers, each at its default learning rate.
    axes.emplace_back("optimizer", json::array({"adam", "adagrad"}));
    axes.emplace_back("learning_rate", json::array({0.0}));
  }
  std::size_t cells = 1;
  for (const auto& [k, v] : axes) {
    if (v.empty()) Fail(ErrorKind::kUsage, "grid axis '" + k + "' has no candidates");
    cells *= v.size();
  }
  json base = ConfigToJson(c);
  base["grid_axes"] = json::object();
  GridResult g;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    json cfg = base;
    std::size_t rest = cell;
    for (std::size_t a = axes.size(); a-- > 0;) {
      const json& cand = axes[a].second;
      SetPath(cfg, axes[a].first, cand[rest % cand.size()]);
      rest /= cand.size();
    }
    TrainConfig cell_config = ConfigFromJson(cfg);
    g.cell_configs.push_back(cfg.dump());
    g.reports.push_back(
        Train(cell_config, data, (fs::path(out_dir) / ("cell_" + std::to_string(cell))).string()));
    if (g.reports.back().best_dev_accuracy > g.reports[g.best].best_dev_accuracy) g.best = cell;
  }
  fs::create_directories(out_dir);
  WriteFile((fs::path(out_dir) / "grid.json").string(), GridResultToJson(g));
  WriteFile((fs::path(out_dir) / "grid.txt").string(), GridResultTable(g));
  return g;
}

std::string GridResultToJson(const GridResult& g) {
  json cells = json::array();
  for (std::size_t i = 0; i < g.reports.size(); ++i) cells.push_back(ReportJson(g.reports[i]));
  return json{{"best", g.best}, {"cells", cells}}.dump(2);
}

std::string GridResultTable(const GridResult& g) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < g.reports.size(); ++i) {
    const RunReport& r = g.reports[i];
    json cfg = json::parse(g.cell_configs[i]);
    rows.push_back({std::to_string(i), cfg["optimizer"].get<std::string>(),
                    cfg["learning_rate"].get<double>() > 0
                        ? Fixed(cfg["learning_rate"].get<double>(), 6)
                        : "default",
                    std::to_string(r.best_epoch), Fixed(100 * r.best_dev_accuracy, 2),
                    r.test_accuracy < 0 ? "n/a" : Fixed(100 * r.test_accuracy, 2),
                    i == g.best ? "*" : ""});
  }
  return Table({"cell", "optimizer", "lr", "best_epoch", "dev_acc", "test_acc", "best"}, rows);
}

}  // namespace rnsx
