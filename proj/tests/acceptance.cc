// Acceptance checks; prints one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.h"
#include "rnsx/analysis.h"
#include "rnsx/encoders.h"
#include "rnsx/error.h"
#include "rnsx/model.h"
#include "rnsx/struct_inference.h"
#include "rnsx/train.h"

using namespace rnsx;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome Guarded(const std::function<Outcome()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {false, std::string("exception: ") + e.what()};
  }
}

// 1. Matrix-tree marginals and log partition against enumeration.
Outcome MatrixTree() {
  auto start = Clock::now();
  std::mt19937_64 rng(101);
  double worst_m = 0.0, worst_z = 0.0;
  for (RootMode mode : {RootMode::kMultiRoot, RootMode::kSingleRoot}) {
    for (std::size_t n = 1; n <= 6; ++n) {
      for (int k = 0; k < 50; ++k) {
        Tensor psi = oracle::Random({n + 1, n}, rng, -2.0, 2.0);
        for (auto& v : psi.data()) v = std::exp(v);
        auto brute = oracle::BruteForce(psi, mode == RootMode::kSingleRoot);
        worst_m = std::max(worst_m, MaxAbsDiff(TreeMarginals(EdgePotentials{psi}, mode).p,
                                               brute.marginals));
        worst_z = std::max(worst_z, std::abs(LogPartition(EdgePotentials{psi}, mode) - brute.log_z));
      }
    }
  }
  double secs = Seconds(start);
  return {worst_m <= 1e-8 && worst_z <= 1e-8 && secs < 60,
          "max marginal err " + Fmt("%.2e", worst_m) + ", max log Z err " + Fmt("%.2e", worst_z) +
              ", " + Fmt("%.1f", secs) + " s"};
}

// 2. CLE against the exhaustive maximum.
Outcome Cle() {
  auto start = Clock::now();
  std::mt19937_64 rng(102);
  std::size_t mismatches = 0, total = 0;
  for (RootMode mode : {RootMode::kMultiRoot, RootMode::kSingleRoot}) {
    for (int n = 1; n <= 7; ++n) {
      auto trees = oracle::AllTrees(n, mode == RootMode::kSingleRoot);
      for (int k = 0; k < 100; ++k) {
        Tensor s = oracle::Random({std::size_t(n) + 1, std::size_t(n)}, rng, -5.0, 5.0);
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& t : trees) {
          double v = 0.0;
          for (int m = 1; m <= n; ++m) v += s(t[m - 1], m - 1);
          best = std::max(best, v);
        }
        DependencyTree d = CleDecode(s, mode);
        ++total;
        if (!IsValidTree(d, mode) || TreeScore(s, d) != best) ++mismatches;
      }
    }
  }
  double secs = Seconds(start);
  return {mismatches == 0 && secs < 60, std::to_string(total - mismatches) + "/" +
                                            std::to_string(total) + " exact, " +
                                            Fmt("%.1f", secs) + " s"};
}

// 3. d log Z / d log psi equals the marginals.
Outcome MomentIdentity() {
  std::mt19937_64 rng(103);
  double worst = 0.0;
  for (RootMode mode : {RootMode::kMultiRoot, RootMode::kSingleRoot}) {
    for (std::size_t n = 1; n <= 6; ++n) {
      for (int k = 0; k < 10; ++k) {
        Parameter scores{"s", oracle::Random({n + 1, n}, rng, -2, 2), Tensor({n + 1, n})};
        Tape t;
        Var psi = Exp(t.Param(scores));
        t.Backward(LogPartition(psi, mode));
        Tensor marg = TreeMarginals(EdgePotentials{psi.value()}, mode).p;
        worst = std::max(worst, MaxAbsDiff(scores.grad, marg));
      }
    }
  }
  return {worst <= 1e-6, "max |grad - marginal| " + Fmt("%.2e", worst)};
}

EncoderConfig Reduced(Variant v, TreeMode m) {
  EncoderConfig c;
  c.embedding_dim = 8;
  c.lstm_hidden = 8;
  c.relation_hidden = 8;
  c.output_hidden = 8;
  c.attention_dim = 8;
  c.recurrent_steps = 3;
  c.variant = v;
  c.tree_mode = m;
  c.dropout = 0.0;
  return c;
}

// 4. Full-model gradients against central differences.
Outcome GradientSuite() {
  auto start = Clock::now();
  struct Case {
    const char* name;
    Variant v;
    TreeMode m;
  };
  const Case cases[] = {
      {"flat RN", Variant::kFlatRn, TreeMode::kNone},
      {"supervised-tree RN", Variant::kFlatRn, TreeMode::kSupervised},
      {"latent-tree RN", Variant::kFlatRn, TreeMode::kLatent},
      {"intra-attn supervised", Variant::kIntraAttn, TreeMode::kSupervised},
      {"intra-attn latent", Variant::kIntraAttn, TreeMode::kLatent},
      {"recurrent RN supervised", Variant::kRecurrentRn, TreeMode::kSupervised},
      {"recurrent RN latent", Variant::kRecurrentRn, TreeMode::kLatent},
  };
  LabelSet labels({"a", "b", "c"});
  std::vector<Example> exs(4);
  const char* words[] = {"the", "cat", "sat", "on", "a", "mat", "today"};
  const std::vector<std::vector<int>> heads = {{0, 1}, {2, 0, 2}, {0, 1, 2, 2}, {3, 3, 0, 3, 4}};
  for (std::size_t i = 0; i < exs.size(); ++i) {
    exs[i].id = std::to_string(i);
    exs[i].label = labels.Name(i % 3);
    exs[i].heads = heads[i];
    for (std::size_t k = 0; k < heads[i].size(); ++k) exs[i].tokens.push_back(words[(i + 2 * k) % 7]);
  }
  Vocabulary vocab = Vocabulary::Build(exs);
  Batch batch = MakeBatches(exs, exs.size(), vocab, labels)[0];
  double worst = 0.0;
  std::size_t floored = 0, entries = 0;
  std::string worst_case, worst_param;
  for (const Case& c : cases) {
    ParameterStore store;
    std::mt19937_64 rng(104);
    TextClassifier model(ModelShape{Reduced(c.v, c.m), vocab.size(), labels.size(), 0, false},
                         store, rng);
    GradCheckResult r = FiniteDifferenceCheck([&](Tape& t) { return model.Loss(t, batch); }, store);
    floored += r.zero_entries;
    entries += store.NumValues();
    if (r.max_rel_error >= worst) {
      worst = r.max_rel_error;
      worst_case = c.name;
      worst_param = r.worst_parameter;
    }
  }
  double secs = Seconds(start);
  return {worst <= 1e-4 && secs < 600, "7 encoders, worst rel err " + Fmt("%.2e", worst) + " (" +
                                           worst_case + ", " + worst_param + "), " +
                                           std::to_string(floored) + "/" + std::to_string(entries) +
                                           " entries below the FD resolution floor, " +
                                           Fmt("%.1f", secs) + " s"};
}

DependencyTree RandomTree(std::size_t n, RootMode mode, std::mt19937_64& rng) {
  std::vector<int> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i) + 1;
  std::shuffle(order.begin(), order.end(), rng);
  DependencyTree t{std::vector<int>(n, 0)};
  for (std::size_t k = 1; k < n; ++k) {
    // attach to the root or any word placed earlier
    std::size_t lo = mode == RootMode::kSingleRoot ? 1 : 0;
    std::size_t j = std::uniform_int_distribution<std::size_t>(lo, k)(rng);
    t.heads[order[k] - 1] = j == 0 ? 0 : order[j - 1];
  }
  return t;
}

SequenceEncoding FromObjects(Tape& t, ParameterStore& store, const Tensor& objects) {
  SequenceEncoding e;
  e.objects = t.Constant(objects);
  e.root = Reshape(t.Param(store.Get("enc.root")), {1, objects.cols()});
  e.with_root = Concat({e.root, e.objects}, 0);
  return e;
}

// 5. Latent encoders at one-hot marginals reduce to the supervised ones.
Outcome Bridge() {
  std::mt19937_64 rng(105);
  auto pair = [](Variant v, std::uint64_t seed) {
    auto latent = std::make_unique<ParameterStore>();
    auto sup = std::make_unique<ParameterStore>();
    std::mt19937_64 r1(seed), r2(seed + 1);
    auto a = std::make_unique<SentenceEncoder>(Reduced(v, TreeMode::kLatent), *latent, r1);
    auto b = std::make_unique<SentenceEncoder>(Reduced(v, TreeMode::kSupervised), *sup, r2);
    sup->CopyValuesFrom(*latent);
    return std::make_tuple(std::move(latent), std::move(sup), std::move(a), std::move(b));
  };
  auto [rn_l, rn_s, rn_a, rn_b] = pair(Variant::kFlatRn, 1);
  auto [ia_l, ia_s, ia_a, ia_b] = pair(Variant::kIntraAttn, 3);
  auto [rr_l, rr_s, rr_a, rr_b] = pair(Variant::kRecurrentRn, 5);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    std::size_t n = 1 + k % 6;
    RootMode mode = k % 2 ? RootMode::kSingleRoot : RootMode::kMultiRoot;
    DependencyTree tree = RandomTree(n, mode, rng);
    Tensor o = oracle::Random({n, 16}, rng, -1, 1);
    Tensor states = oracle::Random({n + 1, 16}, rng, -1, 1);
    Tape t;
    Var onehot = t.Constant(MarginalsFromTree(tree).p);
    worst = std::max(worst, MaxAbsDiff(rn_a->RnLatentTree(t, FromObjects(t, *rn_l, o), onehot).value(),
                                       rn_b->RnSupervisedTree(t, FromObjects(t, *rn_s, o), tree).value()));
    worst = std::max(
        worst,
        MaxAbsDiff(ia_a->IntraAttentionLatent(t, FromObjects(t, *ia_l, o), onehot).parent_context.value(),
                   ia_b->IntraAttentionSupervised(t, FromObjects(t, *ia_s, o), tree).parent_context.value()));
    worst = std::max(worst, MaxAbsDiff(rr_a->LatentParentMessages(t, t.Constant(states), onehot).value(),
                                       rr_b->TreeParentMessages(t, t.Constant(states), tree).value()));
    RecurrentTrace ta, tb;
    rr_a->RecurrentLatent(t, FromObjects(t, *rr_l, o), onehot, 3, &ta);
    rr_b->RecurrentSupervised(t, FromObjects(t, *rr_s, o), tree, 3, &tb);
    worst = std::max(worst, MaxAbsDiff(ta.parent_messages[0].value(), tb.parent_messages[0].value()));
  }
  return {worst <= 1e-10, "100 random trees, max diff " + Fmt("%.2e", worst)};
}

// 6. Batched encoding equals per-sentence encoding.
Outcome Batching() {
  const Variant variants[] = {Variant::kFlatRn, Variant::kIntraAttn, Variant::kRecurrentRn,
                              Variant::kStructuredAttn, Variant::kBow, Variant::kBiLstmMax};
  std::mt19937_64 rng(106);
  std::vector<DependencyTree> trees;
  for (std::size_t n : {3, 7, 1, 5, 4, 2}) trees.push_back(RandomTree(n, RootMode::kMultiRoot, rng));
  double worst = 0.0;
  int configs = 0;
  for (Variant v : variants) {
    for (TreeMode mode : {TreeMode::kNone, TreeMode::kSupervised, TreeMode::kLatent}) {
      if (v == Variant::kRecurrentRn && mode == TreeMode::kNone) continue;
      if (v == Variant::kStructuredAttn && mode != TreeMode::kLatent) continue;
      if ((v == Variant::kBow || v == Variant::kBiLstmMax) && mode != TreeMode::kNone) continue;
      ++configs;
      ParameterStore store;
      std::mt19937_64 init(107);
      SentenceEncoder enc(Reduced(v, mode), store, init);
      Tape t;
      std::vector<Var> xs;
      std::vector<const DependencyTree*> tp;
      for (const auto& tree : trees) {
        xs.push_back(t.Constant(oracle::Random({tree.size(), 8}, rng, -1, 1)));
        tp.push_back(&tree);
      }
      std::vector<Var> batched = enc.EncodeBatch(t, xs, tp);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        Tape single;
        Var s = enc.Encode(single, single.Constant(xs[i].value()), tp[i]);
        worst = std::max(worst, MaxAbsDiff(batched[i].value(), s.value()));
      }
    }
  }
  return {worst <= 1e-10, std::to_string(configs) + " encoder configurations, max diff " +
                              Fmt("%.2e", worst)};
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

// 7. Synthetic keyword task: accuracy and keyword-at-root rate, median of
// three seeds.
Outcome KeywordTask() {
  auto start = Clock::now();
  fs::path dir = fs::temp_directory_path() / "rnsx_acceptance_keyword";
  fs::remove_all(dir);
  fs::create_directories(dir);
  KeywordTaskOptions o;
  KeywordCorpus train = GenerateKeywordCorpus(o, 1000, 71);
  KeywordCorpus test = GenerateKeywordCorpus(o, 200, 72);
  {
    std::ofstream f(dir / "train.tsv");
    WriteSingleSentenceTsv(f, train.examples);
    std::ofstream g(dir / "test.tsv");
    WriteSingleSentenceTsv(g, test.examples);
  }
  std::vector<std::vector<std::string>> sentences;
  for (const auto& e : test.examples) sentences.push_back(e.tokens);
  std::vector<double> acc, root;
  for (std::uint64_t seed : {1, 2, 3}) {
    TrainConfig c = ParseTrainConfig(R"({"encoder": {"variant": "recurrent-rn",
        "tree_mode": "latent", "root_mode": "single-root", "embedding_dim": 16,
        "lstm_hidden": 8, "relation_hidden": 16, "output_hidden": 16, "attention_dim": 16,
        "recurrent_steps": 3}, "optimizer": "adam", "learning_rate": 0.01, "dropout": 0.2,
        "batch_size": 16, "max_epochs": 20, "patience": 20, "validation_size": 100})");
    c.seed = seed;
    RunReport r = Train(c, LoadDataset(c, dir.string()), (dir / ("run" + std::to_string(seed))).string());
    LoadedModel m = LoadModel(r.checkpoint);
    std::ostringstream trees, marg;
    auto analyses = DumpTrees(*m.model, *m.vocab, sentences, trees, marg);
    std::size_t at_root = 0;
    for (std::size_t i = 0; i < analyses.size(); ++i)
      at_root += analyses[i].tree.head(test.keyword_position[i]) == 0;
    acc.push_back(r.test_accuracy);
    root.push_back(static_cast<double>(at_root) / static_cast<double>(analyses.size()));
  }
  double secs = Seconds(start);
  double a = Median(acc), k = Median(root);
  std::string per_seed;
  for (std::size_t i = 0; i < acc.size(); ++i)
    per_seed += (i ? ", " : "") + Fmt("%.3f", acc[i]) + "/" + Fmt("%.3f", root[i]);
  return {a >= 0.95 && k >= 0.80 && secs < 900,
          "median test acc " + Fmt("%.3f", a) + ", median keyword-at-root " + Fmt("%.3f", k) +
              " (per seed acc/root: " + per_seed + "), " + Fmt("%.1f", secs) + " s"};
}

// 9. Randomization test sanity.
Outcome Significance() {
  std::vector<double> a{1, 0, 1, 1, 0, 1, 1, 0, 1, 1};
  double same = ApproxRandomizationTest(a, a, 10000, 1);
  std::vector<double> right(20, 1.0), wrong(20, 0.0);
  double contrast = ApproxRandomizationTest(right, wrong, 10000, 1);
  return {same == 1.0 && contrast < 0.01,
          "identical p = " + Fmt("%.4f", same) + ", all-right vs all-wrong p = " +
              Fmt("%.2e", contrast)};
}

}  // namespace

int main(int argc, char** argv) {
  // Usage: acceptance [--only 1,4,7] [--known-failing 7]
  // A criterion listed as known-failing still prints its real PASS/FAIL
  // line, but does not make the exit status nonzero.
  std::string only, known;
  for (int i = 1; i + 1 < argc; i += 2) {
    std::string flag = argv[i];
    if (flag == "--only") only = argv[i + 1];
    else if (flag == "--known-failing") known = argv[i + 1];
  }
  auto listed = [](const std::string& list, int id) {
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty() && std::stoi(item) == id) return true;
    return false;
  };
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "matrix-tree oracle equivalence", MatrixTree},
      {2, "CLE oracle equivalence", Cle},
      {3, "CRF moment identity", MomentIdentity},
      {4, "end-to-end gradient suite", GradientSuite},
      {5, "one-hot bridge", Bridge},
      {6, "batching equivalence", Batching},
      {7, "synthetic keyword task", KeywordTask},
      {9, "significance test sanity", Significance},
  };
  int unexpected = 0;
  for (const Criterion& c : criteria) {
    if (c.id == 9 && (only.empty() || listed(only, 8))) {
      std::cout << "BLOCKED criterion 8: TREC desk-scale reproduction -- needs the TREC corpus; "
                   "the trec_acceptance test runs it when RNSX_TREC_DIR is set"
                << std::endl;
    }
    if (!only.empty() && !listed(only, c.id)) continue;
    Outcome o = Guarded(c.run);
    bool excused = !o.pass && listed(known, c.id);
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.id << ": " << c.name << " -- "
              << o.detail << (excused ? " [known failure]" : "") << std::endl;
    unexpected += !o.pass && !excused;
  }
  return unexpected == 0 ? 0 : 1;
}
