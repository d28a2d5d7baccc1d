#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "rnsx/data.h"
#include "rnsx/error.h"

using namespace rnsx;

namespace {

std::string TempFile(const std::string& name, const std::string& content) {
  auto dir = std::filesystem::temp_directory_path() / "rnsx_data_test";
  std::filesystem::create_directories(dir);
  auto path = (dir / name).string();
  std::ofstream(path) << content;
  return path;
}

Example Ex(std::vector<std::string> toks, std::string label = "a") {
  Example e;
  e.tokens = std::move(toks);
  e.label = std::move(label);
  return e;
}

}  // namespace

TEST_CASE("vocabulary") {
  std::vector<Example> exs = {Ex({"the", "cat", "sat"}), Ex({"the", "dog", "The"})};
  Vocabulary v = Vocabulary::Build(exs);
  CHECK(v.Token(Vocabulary::kPad) == "<pad>");
  CHECK(v.Token(Vocabulary::kUnk) == "<unk>");
  CHECK(v.size() == 7);
  CHECK(v.Index("the") == 2);
  CHECK(v.Index("zebra") == Vocabulary::kUnk);
  CHECK(v.Frequency("the") == 2);
  std::vector<std::string> s = {"dog", "sat", "The"};
  CHECK(v.Decode(v.Encode(s)) == s);

  Vocabulary cut = Vocabulary::Build(exs, {2, false});
  CHECK(cut.size() == 3);
  Vocabulary lower = Vocabulary::Build(exs, {1, true});
  CHECK(lower.Frequency("THE") == 3);
  CHECK(lower.size() == 6);

  Vocabulary back(v.tokens(), v.options());
  CHECK(back.tokens() == v.tokens());
  CHECK_THROWS_AS(Vocabulary(std::vector<std::string>{"x"}, {}), Error);
}

TEST_CASE("pretrained embeddings") {
  std::vector<Example> exs = {Ex({"cat", "dog"})};
  Vocabulary v = Vocabulary::Build(exs);  // <pad> <unk> cat dog
  std::mt19937_64 rng(1);
  SUBCASE("hits and misses") {
    auto path = TempFile("emb1.txt", "cat 1 2 3\nfish 0 0 0\ndog 4 5 6\ncat 7 8 9\n");
    EmbeddingTable e = LoadPretrainedEmbeddings(path, v, 3, rng);
    CHECK(e.hits == 2);
    CHECK(e.misses == 2);
    CHECK(e.table(2, 0) == 1.0);  // first occurrence wins
    CHECK(e.table(3, 2) == 6.0);
    CHECK(e.warnings.size() == 1);
    for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(e.table(1, c)) <= 0.05);
  }
  SUBCASE("empty file") {
    auto path = TempFile("emb2.txt", "");
    EmbeddingTable e = LoadPretrainedEmbeddings(path, v, 3, rng);
    CHECK(e.hits == 0);
    CHECK(e.warnings.size() == 1);
  }
  SUBCASE("inconsistent width names the line") {
    auto path = TempFile("emb3.txt", "cat 1 2 3\ndog 1 2\n");
    try {
      LoadPretrainedEmbeddings(path, v, 3, rng);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kFormat);
      CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
  }
}

TEST_CASE("single-sentence corpus") {
  LabelSet labels = LabelSet::Trec();
  std::istringstream ok("LOC\tWhere is the Orinoco River ?  \r\nNUM\tHow many ?\n\n");
  auto exs = ReadSingleSentenceTsv(ok, labels);
  REQUIRE(exs.size() == 2);
  CHECK(exs[0].tokens.size() == 6);
  CHECK(exs[0].label == "LOC");
  CHECK(exs[1].id == "2");
  std::istringstream empty("LOC\t   \n");
  CHECK_THROWS_AS(ReadSingleSentenceTsv(empty, labels), Error);
  std::istringstream unknown("XYZ\tfoo\n");
  CHECK_THROWS_AS(ReadSingleSentenceTsv(unknown, labels), Error);
  std::istringstream notab("LOC where\n");
  try {
    ReadSingleSentenceTsv(notab, labels, "c.tsv");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("c.tsv:1:") != std::string::npos);
  }
}

TEST_CASE("pair corpus") {
  LabelSet nli({"entailment", "neutral", "contradiction"});
  std::istringstream ok("entailment\tA man sleeps .\tA person rests .\n");
  auto exs = ReadPairTsv(ok, nli);
  REQUIRE(exs.size() == 1);
  CHECK(exs[0].is_pair());
  CHECK(exs[0].tokens2.size() == 4);
  LabelSet quora({"0", "1"});
  std::istringstream dup("1\tHow do I learn C++ ?\tWhat is the best way to learn C++ ?\n");
  CHECK(ReadPairTsv(dup, quora).size() == 1);
  std::istringstream missing("1\tonly one sentence\n");
  CHECK_THROWS_AS(ReadPairTsv(missing, quora), Error);
}

TEST_CASE("treebank heads") {
  std::istringstream ok(
      "# sent_id = s1\n# text = Hello world\n"
      "1\tHello\t_\t_\t_\t_\t2\tdep\t_\t_\n"
      "2\tworld\t_\t_\t_\t_\t0\troot\t_\t_\n"
      "\n"
      "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "1\tdo\t_\t_\t_\t_\t0\troot\t_\t_\n"
      "2\tn't\t_\t_\t_\t_\t1\tdep\t_\t_\n"
      "2.1\tgap\t_\t_\t_\t_\t_\t_\t_\t_\n");
  auto s = ReadConlluHeads(ok);
  REQUIRE(s.size() == 2);
  CHECK(s[0].id == "s1");
  CHECK(s[0].heads == std::vector<int>{2, 0});
  CHECK(s[1].id == "2");
  CHECK(s[1].heads == std::vector<int>{0, 1});
  std::istringstream cyclic("1\ta\t_\t_\t_\t_\t2\tdep\t_\t_\n2\tb\t_\t_\t_\t_\t1\tdep\t_\t_\n");
  CHECK_THROWS_AS(ReadConlluHeads(cyclic), Error);
  std::istringstream nonint("1\ta\t_\t_\t_\t_\tx\tdep\t_\t_\n");
  CHECK_THROWS_AS(ReadConlluHeads(nonint), Error);
  std::istringstream range("1\ta\t_\t_\t_\t_\t5\tdep\t_\t_\n");
  CHECK_THROWS_AS(ReadConlluHeads(range), Error);

  std::ostringstream os;
  std::vector<std::string> forms = {"Hello", "world"};
  WriteConllu(os, forms, DependencyTree{{2, 0}}, "s1");
  std::istringstream back(os.str());
  auto again = ReadConlluHeads(back);
  REQUIRE(again.size() == 1);
  CHECK(again[0].heads == std::vector<int>{2, 0});
  CHECK(again[0].forms == forms);
}

TEST_CASE("attaching trees") {
  std::vector<Example> exs = {Ex({"a", "b"}), Ex({"c"})};
  std::vector<TreebankSentence> trees = {{"1", {"a", "b"}, {0, 1}}, {"2", {"c"}, {0}}};
  AttachTrees(exs, trees);
  CHECK(exs[0].heads == std::vector<int>{0, 1});
  trees.pop_back();
  CHECK_THROWS_AS(AttachTrees(exs, trees), Error);
}

TEST_CASE("validation split") {
  std::vector<Example> exs;
  for (int i = 0; i < 5452; ++i) exs.push_back(Ex({"w"}, std::to_string(i)));
  Split a = SplitValidation(exs, 500, 7);
  CHECK(a.train.size() == 4952);
  CHECK(a.dev.size() == 500);
  Split b = SplitValidation(exs, 500, 7);
  for (std::size_t i = 0; i < a.dev.size(); ++i) CHECK(a.dev[i].label == b.dev[i].label);
  std::set<std::string> dev;
  for (const auto& e : a.dev) dev.insert(e.label);
  for (const auto& e : a.train) CHECK(dev.count(e.label) == 0);
  CHECK_THROWS_AS(SplitValidation(exs, 0, 7), Error);
  CHECK(SplitValidation(exs, 0, 7, true).dev.empty());
  CHECK_THROWS_AS(SplitValidation(exs, 5452, 7), Error);
  Split c = SplitValidation(exs, 500, 8);
  bool differs = false;
  for (std::size_t i = 0; i < c.dev.size(); ++i) differs |= c.dev[i].label != a.dev[i].label;
  CHECK(differs);
}

TEST_CASE("batches") {
  LabelSet labels({"a", "b"});
  std::vector<Example> exs = {Ex({"x", "y", "z"}), Ex({"x", "y", "z", "w", "v"}, "b"), Ex({"q"})};
  exs[0].heads = {0, 1, 1};
  exs[1].heads = {0, 1, 2, 3, 4};
  exs[2].heads = {0};
  Vocabulary v = Vocabulary::Build(exs);
  auto batches = MakeBatches(exs, 2, v, labels);
  REQUIRE(batches.size() == 2);
  const Batch& b = batches[0];
  CHECK(b.first.width == 5);
  CHECK(std::vector<std::uint8_t>(b.first.mask.begin(), b.first.mask.begin() + 5) ==
        std::vector<std::uint8_t>{1, 1, 1, 0, 0});
  CHECK(std::vector<std::uint8_t>(b.first.mask.begin() + 5, b.first.mask.end()) ==
        std::vector<std::uint8_t>{1, 1, 1, 1, 1});
  CHECK(b.first.ids[3] == Vocabulary::kPad);
  CHECK(b.first.heads[3] == kHeadPad);
  CHECK(b.first.Tree(0).heads == std::vector<int>{0, 1, 1});
  CHECK(b.labels == std::vector<std::size_t>{0, 1});
  CHECK(batches[1].first.width == 1);
  CHECK(batches[1].first.mask == std::vector<std::uint8_t>{1});
  CHECK(!b.is_pair());
  const std::size_t order[] = {2, 0};
  auto ordered = MakeBatches(exs, 8, v, labels, order);
  CHECK(ordered[0].examples == std::vector<std::size_t>{2, 0});
}
