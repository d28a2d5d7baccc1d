#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "rnsx/analysis.h"
#include "rnsx/error.h"

using namespace rnsx;

namespace {

// Exact p-value by enumerating all 2^n swap patterns.
double ExactRandomizationP(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double obs = 0.0;
  for (std::size_t i = 0; i < n; ++i) obs += a[i] - b[i];
  obs = std::abs(obs);
  std::size_t extreme = 0, total = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask, ++total) {
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d += (mask >> i & 1) ? b[i] - a[i] : a[i] - b[i];
    if (std::abs(d) >= obs - 1e-12) ++extreme;
  }
  return static_cast<double>(extreme) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("randomization test: identical inputs give p = 1") {
  std::vector<double> a{1, 0, 1, 1, 0, 1};
  CHECK(ApproxRandomizationTest(a, a, 500, 3) == 1.0);
}

TEST_CASE("randomization test: all correct vs all wrong") {
  std::vector<double> a(20, 1.0), b(20, 0.0);
  double p = ApproxRandomizationTest(a, b, 10000, 1);
  CHECK(p < 0.01);
  // Only the two all-or-nothing swap patterns reach the observed difference.
  CHECK(p == doctest::Approx((1.0 + 10000 * std::ldexp(1.0, -19)) / 10001).epsilon(0.5));
}

TEST_CASE("randomization test agrees with exact enumeration") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<double> a(10), b(10);
    for (auto& v : a) v = static_cast<double>(rng() % 2);
    for (auto& v : b) v = static_cast<double>(rng() % 2);
    double exact = ExactRandomizationP(a, b);
    double approx = ApproxRandomizationTest(a, b, 20000, 7 + rep);
    CAPTURE(exact);
    CHECK(std::abs(approx - exact) < 0.02);
  }
}

TEST_CASE("randomization test is deterministic and checks lengths") {
  std::vector<double> a{1, 0, 1, 1, 0}, b{0, 0, 1, 0, 1};
  CHECK(ApproxRandomizationTest(a, b, 1000, 9) == ApproxRandomizationTest(a, b, 1000, 9));
  std::vector<double> c{1, 0};
  CHECK_THROWS_AS(ApproxRandomizationTest(a, c), Error);
}

TEST_CASE("prediction comparison") {
  std::vector<PredictionRow> a{{"1", 0, {0.9, 0.1}}, {"2", 1, {0.2, 0.8}}};
  std::vector<PredictionRow> b{{"1", 0, {0.3, 0.7}}, {"2", 1, {0.2, 0.8}}};
  SignificanceReport r = ComparePredictions(a, b, 100, 1);
  CHECK(r.examples == 2);
  CHECK(r.accuracy_a == 1.0);
  CHECK(r.accuracy_b == 0.5);
  CHECK(SignificanceReportTable(r).find("p-value") != std::string::npos);
  b[1].id = "3";
  CHECK_THROWS_AS(ComparePredictions(a, b), Error);
  b.pop_back();
  CHECK_THROWS_AS(ComparePredictions(a, b), Error);
}

TEST_CASE("sentence reader") {
  std::istringstream in("a b c\n\nLOC\tx y\n");
  auto s = ReadSentences(in);
  REQUIRE(s.size() == 2);
  CHECK(s[0].size() == 3);
  CHECK(s[1] == std::vector<std::string>{"x", "y"});
}

TEST_CASE("keyword corpus") {
  KeywordTaskOptions o;
  KeywordCorpus k = GenerateKeywordCorpus(o, 200, 3);
  CHECK(k.labels.size() == o.classes);
  REQUIRE(k.examples.size() == 200);
  for (std::size_t i = 0; i < k.examples.size(); ++i) {
    const Example& e = k.examples[i];
    CHECK(e.tokens.size() >= o.min_length);
    CHECK(e.tokens.size() <= o.max_length);
    std::size_t keys = 0;
    for (const auto& tok : e.tokens) keys += tok.rfind("key", 0) == 0;
    CHECK(keys == 1);
    const std::string& kw = e.tokens[k.keyword_position[i] - 1];
    CHECK(kw.substr(3, kw.find('_') - 3) == e.label.substr(1));
  }
  KeywordCorpus again = GenerateKeywordCorpus(o, 200, 3);
  CHECK(again.examples[17].tokens == k.examples[17].tokens);
  std::ostringstream os;
  WriteSingleSentenceTsv(os, k.examples);
  std::istringstream is(os.str());
  CHECK(ReadSingleSentenceTsv(is, k.labels).size() == 200);
}

TEST_CASE("tree dumps") {
  EncoderConfig c;
  c.variant = Variant::kRecurrentRn;
  c.tree_mode = TreeMode::kLatent;
  c.embedding_dim = c.lstm_hidden = c.relation_hidden = c.output_hidden = c.attention_dim = 4;
  ModelShape shape{c, 6, 2, 0, false};
  ParameterStore store;
  std::mt19937_64 rng(1);
  TextClassifier model(shape, store, rng);
  Vocabulary vocab({"<pad>", "<unk>", "a", "b", "c", "d"}, {});
  std::vector<std::vector<std::string>> sents{{"a"}, {"a", "b", "c"}, {"d", "zz", "a", "b", "c"}};
  std::ostringstream trees, marg;
  auto out = DumpTrees(model, vocab, sents, trees, marg);
  REQUIRE(out.size() == 3);
  CHECK(out[0].tree.heads == std::vector<int>{0});
  for (const auto& a : out) CHECK(IsValidTree(a.tree));
  std::istringstream back(trees.str());
  auto read = ReadConlluHeads(back);
  REQUIRE(read.size() == 3);
  CHECK(read[2].heads == out[2].tree.heads);
  CHECK(marg.str().find("# sent_id = 3") != std::string::npos);

  EncoderConfig plain = c;
  plain.variant = Variant::kBiLstmMax;
  plain.tree_mode = TreeMode::kNone;
  ParameterStore s2;
  TextClassifier m2(ModelShape{plain, 6, 2, 0, false}, s2, rng);
  try {
    DumpTrees(m2, vocab, sents, trees, marg);
    FAIL("expected a usage error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kUsage);
    CHECK(std::string(e.what()).find("tree_mode") != std::string::npos);
  }
}
