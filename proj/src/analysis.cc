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

#include "rnsx/analysis.h"

#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "json.hpp"
#include "rnsx/error.h"

namespace rnsx {

double ApproxRandomizationTest(std::span<const double> a, std::span<const double> b,
                               std::size_t rounds, std::uint64_t seed) {
  if (a.size() != b.size()) {
    Fail(ErrorKind::kDimension, "significance test needs equal lengths, got " +
                                    std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  if (a.empty()) Fail(ErrorKind::kUsage, "significance test needs at least one example");
  if (rounds == 0) Fail(ErrorKind::kUsage, "significance test needs at least one round");
  const double n = static_cast<double>(a.size());
  double observed = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) observed += a[i] - b[i];
  observed = std::abs(observed) / n;
  // Shuffled statistics equal to the observed one must count despite
  // summation-order roundoff.
  const double tol = 1e-12 * (1.0 + observed);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution swap(0.5);
  std::size_t extreme = 0;
  for (std::size_t r = 0; r < rounds; ++r) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += swap(rng) ? b[i] - a[i] : a[i] - b[i];
    if (std::abs(d) / n >= observed - tol) ++extreme;
  }
  return static_cast<double>(1 + extreme) / static_cast<double>(1 + rounds);
}

std::vector<double> CorrectnessScores(std::span<const PredictionRow> rows) {
  std::vector<double> s;
  s.reserve(rows.size());
  for (const auto& r : rows) s.push_back(r.predicted() == r.gold ? 1.0 : 0.0);
  return s;
}

SignificanceReport ComparePredictions(std::span<const PredictionRow> a,
                                      std::span<const PredictionRow> b, std::size_t rounds,
                                      std::uint64_t seed) {
  if (a.size() != b.size()) {
    Fail(ErrorKind::kFormat, "prediction files cover " + std::to_string(a.size()) + " and " +
                                 std::to_string(b.size()) + " examples");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].id != b[i].id || a[i].gold != b[i].gold) {
      Fail(ErrorKind::kFormat, "prediction files disagree at row " + std::to_string(i + 1) +
                                   " (id '" + a[i].id + "' vs '" + b[i].id + "')");
    }
  }
  SignificanceReport r;
  r.examples = a.size();
  std::vector<double> sa = CorrectnessScores(a), sb = CorrectnessScores(b);
  for (std::size_t i = 0; i < sa.size(); ++i) {
    r.accuracy_a += sa[i];
    r.accuracy_b += sb[i];
  }
  r.accuracy_a /= static_cast<double>(r.examples);
  r.accuracy_b /= static_cast<double>(r.examples);
  r.p_value = ApproxRandomizationTest(sa, sb, rounds, seed);
  return r;
}

std::string SignificanceReportToJson(const SignificanceReport& r) {
  return nlohmann::ordered_json{{"examples", r.examples},
                                {"accuracy_a", r.accuracy_a},
                                {"accuracy_b", r.accuracy_b},
                                {"p_value", r.p_value}}
      .dump(2);
}

std::string SignificanceReportTable(const SignificanceReport& r) {
  std::ostringstream os;
  os << std::fixed;
  os << "examples    " << std::setw(8) << r.examples << "\n";
  os << "accuracy a  " << std::setw(8) << std::setprecision(2) << 100 * r.accuracy_a << "\n";
  os << "accuracy b  " << std::setw(8) << std::setprecision(2) << 100 * r.accuracy_b << "\n";
  os << "p-value     " << std::setw(8) << std::setprecision(4) << r.p_value << "\n";
  return os.str();
}

std::vector<std::vector<std::string>> ReadSentences(std::istream& is, const std::string& source) {
  std::vector<std::vector<std::string>> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(is, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t tab = line.rfind('\t');
    if (tab != std::string::npos) line = line.substr(tab + 1);
    std::vector<std::string> tokens = SplitTokens(line);
    if (tokens.empty()) Fail(ErrorKind::kFormat, source + ":" + std::to_string(no) + ": no tokens");
    out.push_back(std::move(tokens));
  }
  return out;
}

std::vector<TreeAnalysis> DumpTrees(const TextClassifier& model, const Vocabulary& vocab,
                                    std::span<const std::vector<std::string>> sentences,
                                    std::ostream& trees, std::ostream& marginals) {
  std::vector<TreeAnalysis> out;
  out.reserve(sentences.size());
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    TreeAnalysis a = model.AnalyzeTree(vocab.Encode(sentences[s]));
    const std::string id = std::to_string(s + 1);
    WriteConllu(trees, sentences[s], a.tree, id);
    marginals << "# sent_id = " << id << "\n";
    WriteArcMatrixTsv(marginals, a.marginals);
    out.push_back(std::move(a));
  }
  return out;
}

KeywordCorpus GenerateKeywordCorpus(const KeywordTaskOptions& o, std::size_t size,
                                    std::uint64_t seed) {
  if (o.classes < 2 || o.keywords_per_class < 1 || o.filler_vocabulary < 1 ||
      o.min_length < 1 || o.max_length < o.min_length) {
    Fail(ErrorKind::kUsage, "invalid keyword task options");
  }
  std::vector<std::string> names;
  for (std::size_t c = 0; c < o.classes; ++c) names.push_back("c" + std::to_string(c));
  KeywordCorpus k{LabelSet(names), {}, {}};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> cls(0, o.classes - 1);
  std::uniform_int_distribution<std::size_t> kw(0, o.keywords_per_class - 1);
  std::uniform_int_distribution<std::size_t> filler(0, o.filler_vocabulary - 1);
  std::uniform_int_distribution<std::size_t> len(o.min_length, o.max_length);
  for (std::size_t i = 0; i < size; ++i) {
    Example e;
    e.id = std::to_string(i + 1);
    std::size_t c = cls(rng);
    e.label = names[c];
    std::size_t n = len(rng);
    std::size_t at = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    for (std::size_t p = 0; p < n; ++p) {
      e.tokens.push_back(p == at ? "key" + std::to_string(c) + "_" + std::to_string(kw(rng))
                                 : "w" + std::to_string(filler(rng)));
    }
    k.examples.push_back(std::move(e));
    k.keyword_position.push_back(at + 1);
  }
  return k;
}

void WriteSingleSentenceTsv(std::ostream& os, std::span<const Example> examples) {
  for (const auto& e : examples) {
    os << e.label << '\t';
    for (std::size_t i = 0; i < e.tokens.size(); ++i) os << (i ? " " : "") << e.tokens[i];
    os << '\n';
  }
}

}  // namespace rnsx
