#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"
#include "rnsx/error.h"
#include "rnsx/train.h"

using namespace rnsx;
namespace fs = std::filesystem;

namespace {

fs::path TempDir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("rnsx_train_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// "pos" iff the sentence contains "good".
void WriteToyCorpus(const fs::path& path, std::size_t n, std::uint64_t seed) {
  const char* filler[] = {"the", "a", "movie", "was", "plot", "it", "very", "and", "actor"};
  std::mt19937_64 rng(seed);
  std::ofstream out(path);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t len = 3 + rng() % 4;
    bool pos = rng() % 2 == 0;
    std::size_t at = rng() % len;
    out << (pos ? "pos" : "neg") << '\t';
    for (std::size_t k = 0; k < len; ++k) {
      if (k) out << ' ';
      out << (pos && k == at ? "good" : filler[rng() % 9]);
    }
    out << '\n';
  }
}

std::string ToyConfig(const std::string& extra = "") {
  return R"({"encoder": {"variant": "bilstm-max", "tree_mode": "none", "embedding_dim": 8,
             "lstm_hidden": 6}, "optimizer": "adagrad", "learning_rate": 0.1,
             "dropout": 0.0, "batch_size": 8, "max_epochs": 12, "patience": 12,
             "validation_size": 20, "seed": 7)" +
         extra + "}";
}

std::string ReadAll(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("config parsing") {
  TrainConfig c = ParseTrainConfig("{}");
  CHECK(c.optimizer == OptimizerKind::kAdam);
  CHECK(c.effective_learning_rate() == 1e-4);
  CHECK(c.dropout == 0.5);

  c = ParseTrainConfig(
      R"({"encoder": {"variant": "flat-rn", "aggregation": "sum"}, "optimizer": "adagrad",
          "grid_axes": {"encoder.aggregation": ["sum", "max"], "dropout": [0.1]}})");
  CHECK(c.encoder.variant == Variant::kFlatRn);
  CHECK(c.encoder.aggregation == Aggregation::kSum);
  CHECK(c.effective_learning_rate() == 0.01);
  REQUIRE(c.grid_axes.size() == 2);
  CHECK(c.grid_axes[0].first == "encoder.aggregation");

  TrainConfig back = ParseTrainConfig(TrainConfigToJson(c));
  CHECK(TrainConfigToJson(back) == TrainConfigToJson(c));

  auto kind = [](const std::string& text) {
    try {
      ParseTrainConfig(text);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kIo;
  };
  CHECK(kind("{") == ErrorKind::kUsage);
  CHECK(kind(R"({"lerning_rate": 1})") == ErrorKind::kUsage);
  CHECK(kind(R"({"encoder": {"widht": 1}})") == ErrorKind::kUsage);
  CHECK(kind(R"({"batch_size": "big"})") == ErrorKind::kUsage);
  CHECK(kind(R"({"patience": 0})") == ErrorKind::kUsage);
  CHECK(kind(R"({"optimizer": "sgd"})") == ErrorKind::kUsage);
  CHECK(kind(R"({"grid_axes": {"dropout": 0.1}})") == ErrorKind::kUsage);
}

TEST_CASE("seed streams are distinct and stable") {
  CHECK(DeriveSeed(1, SeedStream::kInit) == DeriveSeed(1, SeedStream::kInit));
  CHECK(DeriveSeed(1, SeedStream::kInit) != DeriveSeed(1, SeedStream::kDropout));
  CHECK(DeriveSeed(1, SeedStream::kSplit) != DeriveSeed(2, SeedStream::kSplit));
}

TEST_CASE("dataset loading") {
  fs::path dir = TempDir("load");
  WriteToyCorpus(dir / "train.tsv", 60, 1);
  WriteToyCorpus(dir / "test.tsv", 10, 2);
  TrainConfig c = ParseTrainConfig(ToyConfig());
  Dataset d = LoadDataset(c, dir.string());
  CHECK(d.labels.size() == 2);
  CHECK(d.labels.Name(0) == "neg");
  CHECK(d.train.size() == 40);
  CHECK(d.dev.size() == 20);
  CHECK(d.test.size() == 10);
  // The split depends only on the seed.
  Dataset again = LoadDataset(c, dir.string());
  for (std::size_t i = 0; i < d.dev.size(); ++i) CHECK(again.dev[i].id == d.dev[i].id);

  c.train_file = "missing.tsv";
  CHECK_THROWS_AS(LoadDataset(c, dir.string()), Error);
}

TEST_CASE("training learns a keyword task, is deterministic and checkpoints") {
  fs::path dir = TempDir("toy");
  WriteToyCorpus(dir / "train.tsv", 200, 3);
  WriteToyCorpus(dir / "test.tsv", 60, 4);
  TrainConfig c = ParseTrainConfig(ToyConfig());
  Dataset d = LoadDataset(c, dir.string());

  RunReport r = Train(c, d, (dir / "run1").string());
  CHECK(r.best_dev_accuracy >= 0.9);
  CHECK(r.test_accuracy >= 0.9);
  CHECK(r.parameters > 0);
  CHECK(fs::exists(dir / "run1" / "model.rnsx"));
  CHECK(fs::exists(dir / "run1" / "model.rnsx.json"));
  CHECK(fs::exists(dir / "run1" / "report.json"));
  CHECK(ReadAll(dir / "run1" / "report.txt").find("best epoch") != std::string::npos);

  std::ifstream preds(dir / "run1" / "test_predictions.tsv");
  LabelSet labels = d.labels;
  std::vector<PredictionRow> rows = ReadPredictionsTsv(preds, &labels);
  CHECK(rows.size() == 60);

  RunReport r2 = Train(c, d, (dir / "run2").string());
  REQUIRE(r2.epochs.size() == r.epochs.size());
  for (std::size_t i = 0; i < r.epochs.size(); ++i) {
    CHECK(r2.epochs[i].train_loss == r.epochs[i].train_loss);
    CHECK(r2.epochs[i].dev_accuracy == r.epochs[i].dev_accuracy);
  }

  LoadedModel m = LoadModel(r.checkpoint);
  CHECK(m.labels.size() == 2);
  Evaluation dev = Evaluate(*m.model, d.dev, *m.vocab, m.labels);
  CHECK(dev.accuracy == r.best_dev_accuracy);
  Evaluation test = Evaluate(*m.model, d.test, *m.vocab, m.labels);
  CHECK(test.accuracy == r.test_accuracy);
}

TEST_CASE("early stopping honours patience") {
  fs::path dir = TempDir("patience");
  WriteToyCorpus(dir / "train.tsv", 40, 5);
  WriteToyCorpus(dir / "test.tsv", 5, 6);
  TrainConfig c = ParseTrainConfig(ToyConfig());
  c.learning_rate = 1e-12;  // nothing changes, so dev accuracy never improves
  c.patience = 2;
  RunReport r = Train(c, LoadDataset(c, dir.string()), (dir / "run").string());
  CHECK(r.best_epoch == 1);
  CHECK(r.epochs.size() == 3);
}

TEST_CASE("divergence is reported as a numeric error") {
  fs::path dir = TempDir("nan");
  WriteToyCorpus(dir / "train.tsv", 40, 5);
  WriteToyCorpus(dir / "test.tsv", 5, 6);
  TrainConfig c = ParseTrainConfig(ToyConfig());
  c.learning_rate = 1e200;
  c.max_epochs = 5;
  Dataset d = LoadDataset(c, dir.string());
  try {
    Train(c, d, (dir / "run").string());
    FAIL("expected a numeric error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNumeric);
    CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
    CHECK(std::string(e.what()).find("op '") != std::string::npos);
  }
}

TEST_CASE("grid search enumerates the product and picks the best cell") {
  fs::path dir = TempDir("grid");
  WriteToyCorpus(dir / "train.tsv", 60, 7);
  WriteToyCorpus(dir / "test.tsv", 10, 8);
  TrainConfig c = ParseTrainConfig(ToyConfig(
      R"(, "max_epochs": 2, "grid_axes": {"learning_rate": [1e-12, 0.1], "batch_size": [4, 8]})"));
  GridResult g = GridSearch(c, LoadDataset(c, dir.string()), (dir / "grid").string());
  REQUIRE(g.reports.size() == 4);
  CHECK(g.cell_configs[1].find("\"batch_size\":8") != std::string::npos);
  CHECK(g.cell_configs[2].find("\"learning_rate\":0.1") != std::string::npos);
  for (const RunReport& r : g.reports) CHECK(g.reports[g.best].best_dev_accuracy >= r.best_dev_accuracy);
  for (std::size_t i = 0; i < g.best; ++i) {
    CHECK(g.reports[i].best_dev_accuracy < g.reports[g.best].best_dev_accuracy);
  }
  CHECK(fs::exists(dir / "grid" / "grid.json"));
  CHECK(GridResultTable(g).find("dev_acc") != std::string::npos);

  c.grid_axes = {{"dropout", "[]"}};
  CHECK_THROWS_AS(GridSearch(c, LoadDataset(c, dir.string()), (dir / "g2").string()), Error);
  c.grid_axes = {{"encoder.nope", "[1]"}};
  CHECK_THROWS_AS(GridSearch(c, LoadDataset(c, dir.string()), (dir / "g3").string()), Error);
}
