#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"
#include "rnsx/rnsx.h"

namespace fs = std::filesystem;

namespace {

fs::path Dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("rnsx_c_api_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void WriteText(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string ReadText(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// "yes" iff the sentence contains "good".
void WriteCorpus(const fs::path& path, std::size_t n, std::uint64_t seed) {
  const char* filler[] = {"the", "a", "film", "was", "plot", "it", "so"};
  std::mt19937_64 rng(seed);
  std::ofstream out(path);
  for (std::size_t i = 0; i < n; ++i) {
    bool pos = rng() % 2;
    std::size_t len = 3 + rng() % 3, at = rng() % len;
    out << (pos ? "yes" : "no") << '\t';
    for (std::size_t k = 0; k < len; ++k) out << (k ? " " : "") << (pos && k == at ? "good" : filler[rng() % 7]);
    out << '\n';
  }
}

std::string Config(const std::string& encoder, std::size_t epochs) {
  return R"({"encoder": )" + encoder +
         R"(, "optimizer": "adagrad", "learning_rate": 0.1, "dropout": 0.0, "batch_size": 8,
             "max_epochs": )" +
         std::to_string(epochs) + R"(, "validation_size": 20, "seed": 3})";
}

const char* kPlain = R"({"variant": "bilstm-max", "tree_mode": "none", "embedding_dim": 8, "lstm_hidden": 6})";
const char* kLatent = R"({"variant": "recurrent-rn", "tree_mode": "latent", "embedding_dim": 6,
    "lstm_hidden": 3, "relation_hidden": 6, "output_hidden": 6, "attention_dim": 6})";

struct Str {
  char* p = nullptr;
  ~Str() { rnsx_free_string(p); }
  std::string s() const { return p ? p : ""; }
};

}  // namespace

TEST_CASE("train, load, evaluate and compare through the C interface") {
  fs::path d = Dir("train");
  WriteCorpus(d / "train.tsv", 120, 1);
  WriteCorpus(d / "test.tsv", 30, 2);
  WriteText(d / "cfg.json", Config(kPlain, 8));
  Str json, table;
  REQUIRE(rnsx_train((d / "cfg.json").c_str(), d.c_str(), (d / "out").c_str(), &json.p, &table.p) ==
          RNSX_OK);
  CHECK(json.s().find("\"best_epoch\"") != std::string::npos);
  CHECK(table.s().find("best dev acc") != std::string::npos);

  rnsx_model* m = nullptr;
  REQUIRE(rnsx_model_load((d / "out" / "model.rnsx").c_str(), &m) == RNSX_OK);
  double acc = -1;
  Str ej;
  CHECK(rnsx_evaluate(m, (d / "test.tsv").c_str(), (d / "preds.tsv").c_str(), &acc, &ej.p, nullptr) ==
        RNSX_OK);
  CHECK(acc >= 0.9);
  CHECK(ej.s().find("\"accuracy\"") != std::string::npos);
  CHECK(ReadText(d / "preds.tsv").rfind("id\tgold\tpred\tp_no\tp_yes\n", 0) == 0);

  // parse-dump needs a latent-tree model
  WriteText(d / "sents.txt", "the good film\n");
  CHECK(rnsx_dump_trees(m, (d / "sents.txt").c_str(), (d / "t.conllu").c_str(), nullptr, nullptr) ==
        RNSX_ERR_USAGE);
  CHECK(std::string(rnsx_last_error()).find("tree_mode") != std::string::npos);
  rnsx_model_free(m);

  double p = 0;
  CHECK(rnsx_sigtest((d / "preds.tsv").c_str(), (d / "preds.tsv").c_str(), 1000, 1, &p, nullptr,
                     nullptr) == RNSX_OK);
  CHECK(p == 1.0);
  CHECK(rnsx_sigtest((d / "preds.tsv").c_str(), (d / "missing.tsv").c_str(), 1000, 1, &p, nullptr,
                     nullptr) == RNSX_ERR_DATA);
}

TEST_CASE("tree dumps through the C interface") {
  fs::path d = Dir("dump");
  WriteCorpus(d / "train.tsv", 60, 3);
  WriteCorpus(d / "test.tsv", 10, 4);
  WriteText(d / "cfg.json", Config(kLatent, 1));
  REQUIRE(rnsx_train((d / "cfg.json").c_str(), d.c_str(), (d / "out").c_str(), nullptr, nullptr) ==
          RNSX_OK);
  rnsx_model* m = nullptr;
  REQUIRE(rnsx_model_load((d / "out" / "model.rnsx").c_str(), &m) == RNSX_OK);
  WriteText(d / "sents.txt", "good\nthe film was good\nyes\tit was so good\n");
  std::size_t n = 0;
  CHECK(rnsx_dump_trees(m, (d / "sents.txt").c_str(), (d / "t.conllu").c_str(),
                        (d / "m.tsv").c_str(), &n) == RNSX_OK);
  CHECK(n == 3);
  std::string trees = ReadText(d / "t.conllu");
  CHECK(trees.find("1\tgood\t_\t_\t_\t_\t0\troot") != std::string::npos);
  CHECK(ReadText(d / "m.tsv").find("# sent_id = 3") != std::string::npos);
  rnsx_model_free(m);
}

TEST_CASE("status codes") {
  fs::path d = Dir("status");
  WriteCorpus(d / "train.tsv", 40, 5);
  WriteCorpus(d / "test.tsv", 5, 6);
  WriteText(d / "bad.json", "{\"encoder\": ");
  CHECK(rnsx_train((d / "bad.json").c_str(), d.c_str(), (d / "o").c_str(), nullptr, nullptr) ==
        RNSX_ERR_USAGE);
  CHECK(std::string(rnsx_last_error()).find("JSON") != std::string::npos);
  WriteText(d / "unknown.json", "{\"epochs\": 3}");
  CHECK(rnsx_train((d / "unknown.json").c_str(), d.c_str(), (d / "o").c_str(), nullptr, nullptr) ==
        RNSX_ERR_USAGE);
  WriteText(d / "ok.json", Config(kPlain, 1));
  CHECK(rnsx_train((d / "ok.json").c_str(), (d / "nowhere").c_str(), (d / "o").c_str(), nullptr,
                   nullptr) == RNSX_ERR_DATA);
  WriteText(d / "train.tsv", "yes\tgood\nno\tbad\nno\n");
  CHECK(rnsx_train((d / "ok.json").c_str(), d.c_str(), (d / "o").c_str(), nullptr, nullptr) ==
        RNSX_ERR_DATA);
  CHECK(std::string(rnsx_last_error()).find(":3:") != std::string::npos);

  WriteCorpus(d / "train.tsv", 40, 5);
  WriteText(d / "diverge.json",
            R"({"encoder": )" + std::string(kPlain) +
                R"(, "optimizer": "adagrad", "learning_rate": 1e200, "validation_size": 10})");
  CHECK(rnsx_train((d / "diverge.json").c_str(), d.c_str(), (d / "o").c_str(), nullptr, nullptr) ==
        RNSX_ERR_NUMERIC);
  CHECK(std::string(rnsx_last_error()).find("non-finite") != std::string::npos);

  rnsx_model* m = nullptr;
  CHECK(rnsx_model_load((d / "missing.rnsx").c_str(), &m) == RNSX_ERR_DATA);
  CHECK(m == nullptr);
  CHECK(rnsx_model_load(nullptr, &m) == RNSX_ERR_USAGE);

  double a[] = {1, 0, 1}, b[] = {1, 0, 1}, p = 0;
  CHECK(rnsx_randomization_test(a, b, 3, 100, 1, &p) == RNSX_OK);
  CHECK(p == 1.0);
  CHECK(rnsx_randomization_test(a, nullptr, 3, 100, 1, &p) == RNSX_ERR_USAGE);
  CHECK(std::string(rnsx_version()).size() > 0);
}
