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

#include "rnsx/data.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include "rnsx/error.h"

namespace rnsx {

namespace {

std::ifstream OpenInput(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot open '" + path + "'");
  return in;
}

std::string Where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

void StripLineEnd(std::string& line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
    line.pop_back();
}

std::vector<std::string> SplitOn(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

bool ParseInt(const std::string& s, int* out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && p == s.data() + s.size();
}

bool ParseDouble(const std::string& s, double* out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

std::vector<std::string> SplitTokens(const std::string& sentence) {
  std::vector<std::string> out;
  std::istringstream is(sentence);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

// ---- vocabulary --------------------------------------------------------------

Vocabulary::Vocabulary(VocabularyOptions options) : options_(options) {
  Add(kPadToken);
  Add(kUnkToken);
}

Vocabulary::Vocabulary(const std::vector<std::string>& tokens, VocabularyOptions options)
    : options_(options) {
  if (tokens.size() < 2 || tokens[kPad] != kPadToken || tokens[kUnk] != kUnkToken) {
    Fail(ErrorKind::kFormat, "vocabulary must start with <pad> and <unk>");
  }
  for (const auto& t : tokens) {
    if (index_.count(t)) Fail(ErrorKind::kFormat, "duplicate vocabulary entry '" + t + "'");
    Add(t);
  }
}

std::size_t Vocabulary::Add(const std::string& token) {
  auto [it, inserted] = index_.emplace(token, tokens_.size());
  if (inserted) tokens_.push_back(token);
  return it->second;
}

std::string Vocabulary::Normalize(const std::string& token) const {
  if (!options_.lowercase) return token;
  std::string s = token;
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

Vocabulary Vocabulary::Build(std::span<const Example> examples, VocabularyOptions options) {
  if (options.min_frequency == 0) Fail(ErrorKind::kUsage, "min_frequency must be >= 1");
  Vocabulary v(options);
  std::vector<std::string> order;
  auto count = [&](const std::vector<std::string>& tokens) {
    for (const auto& raw : tokens) {
      std::string t = v.Normalize(raw);
      if (v.frequency_[t]++ == 0) order.push_back(t);
    }
  };
  for (const auto& ex : examples) {
    count(ex.tokens);
    count(ex.tokens2);
  }
  for (const auto& t : order)
    if (v.frequency_[t] >= options.min_frequency) v.Add(t);
  return v;
}

std::size_t Vocabulary::Index(const std::string& token) const {
  auto it = index_.find(Normalize(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::Contains(const std::string& token) const {
  return index_.count(Normalize(token)) > 0;
}

std::size_t Vocabulary::Frequency(const std::string& token) const {
  auto it = frequency_.find(Normalize(token));
  return it == frequency_.end() ? 0 : it->second;
}

std::vector<std::size_t> Vocabulary::Encode(std::span<const std::string> tokens) const {
  std::vector<std::size_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(Index(t));
  return ids;
}

std::vector<std::string> Vocabulary::Decode(std::span<const std::size_t> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (auto i : ids) out.push_back(Token(i));
  return out;
}

// ---- embeddings --------------------------------------------------------------

EmbeddingTable RandomEmbeddings(const Vocabulary& vocab, std::size_t dim, std::mt19937_64& rng) {
  if (dim == 0) Fail(ErrorKind::kUsage, "embedding dimension must be positive");
  EmbeddingTable e;
  e.table = Tensor({vocab.size(), dim});
  std::uniform_real_distribution<double> u(-kEmbeddingInitRange, kEmbeddingInitRange);
  for (auto& x : e.table.data()) x = u(rng);
  e.pretrained.assign(vocab.size(), false);
  e.misses = vocab.size();
  return e;
}

EmbeddingTable LoadPretrainedEmbeddings(const std::string& path, const Vocabulary& vocab,
                                        std::size_t dim, std::mt19937_64& rng) {
  EmbeddingTable e = RandomEmbeddings(vocab, dim, rng);
  std::ifstream in = OpenInput(path);
  std::string line;
  std::size_t lineno = 0, lines = 0;
  while (std::getline(in, line)) {
    ++lineno;
    StripLineEnd(line);
    if (line.empty()) continue;
    ++lines;
    auto fields = SplitOn(line, ' ');
    if (fields.size() != dim + 1) {
      Fail(ErrorKind::kFormat, Where(path, lineno) + "expected " + std::to_string(dim) +
                                   " values, found " + std::to_string(fields.size() - 1));
    }
    std::vector<double> row(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      if (!ParseDouble(fields[k + 1], &row[k])) {
        Fail(ErrorKind::kFormat, Where(path, lineno) + "bad number '" + fields[k + 1] + "'");
      }
    }
    if (!vocab.Contains(fields[0])) continue;
    std::size_t idx = vocab.Index(fields[0]);
    if (e.pretrained[idx]) {
      e.warnings.push_back(Where(path, lineno) + "duplicate vector for '" + fields[0] +
                           "' ignored (first occurrence wins)");
      continue;
    }
    e.pretrained[idx] = true;
    std::copy(row.begin(), row.end(), e.table.data().begin() + idx * dim);
  }
  if (lines == 0) e.warnings.push_back(path + ": no vectors; all rows are random");
  e.hits = static_cast<std::size_t>(std::count(e.pretrained.begin(), e.pretrained.end(), true));
  e.misses = vocab.size() - e.hits;
  return e;
}

// ---- corpora -----------------------------------------------------------------

std::vector<Example> ReadSingleSentenceTsv(std::istream& is, const LabelSet& labels,
                                           const std::string& source) {
  std::vector<Example> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(is, line); ++lineno) {
    StripLineEnd(line);
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      Fail(ErrorKind::kFormat, Where(source, lineno) + "expected label<TAB>sentence");
    }
    Example ex;
    ex.id = std::to_string(lineno);
    ex.label = line.substr(0, tab);
    if (!labels.Contains(ex.label)) {
      Fail(ErrorKind::kFormat, Where(source, lineno) + "unknown label '" + ex.label + "'");
    }
    ex.tokens = SplitTokens(line.substr(tab + 1));
    if (ex.tokens.empty()) Fail(ErrorKind::kFormat, Where(source, lineno) + "empty sentence");
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<Example> ReadSingleSentenceTsv(const std::string& path, const LabelSet& labels) {
  std::ifstream in = OpenInput(path);
  return ReadSingleSentenceTsv(in, labels, path);
}

std::vector<Example> ReadPairTsv(std::istream& is, const LabelSet& labels,
                                 const std::string& source) {
  std::vector<Example> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(is, line); ++lineno) {
    StripLineEnd(line);
    if (line.empty()) continue;
    auto f = SplitOn(line, '\t');
    if (f.size() != 3) {
      Fail(ErrorKind::kFormat, Where(source, lineno) + "expected 3 tab-separated fields, found " +
                                   std::to_string(f.size()));
    }
    Example ex;
    ex.id = std::to_string(lineno);
    ex.label = f[0];
    if (!labels.Contains(ex.label)) {
      Fail(ErrorKind::kFormat, Where(source, lineno) + "unknown label '" + ex.label + "'");
    }
    ex.tokens = SplitTokens(f[1]);
    ex.tokens2 = SplitTokens(f[2]);
    if (ex.tokens.empty() || ex.tokens2.empty()) {
      Fail(ErrorKind::kFormat, Where(source, lineno) + "empty sentence");
    }
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<Example> ReadPairTsv(const std::string& path, const LabelSet& labels) {
  std::ifstream in = OpenInput(path);
  return ReadPairTsv(in, labels, path);
}

// ---- treebank ----------------------------------------------------------------

std::vector<TreebankSentence> ReadConlluHeads(std::istream& is, const std::string& source) {
  std::vector<TreebankSentence> out;
  TreebankSentence cur;
  std::size_t start_line = 0;
  auto flush = [&]() {
    if (cur.heads.empty()) {
      cur = {};
      return;
    }
    if (cur.id.empty()) cur.id = std::to_string(out.size() + 1);
    for (int h : cur.heads) {
      if (h < 0 || h > static_cast<int>(cur.heads.size())) {
        Fail(ErrorKind::kFormat, Where(source, start_line) + "head " + std::to_string(h) +
                                     " out of range in sentence '" + cur.id + "'");
      }
    }
    if (!IsValidTree(cur.heads)) {
      Fail(ErrorKind::kFormat, Where(source, start_line) + "sentence '" + cur.id +
                                   "' is not a valid tree");
    }
    out.push_back(std::move(cur));
    cur = {};
  };
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      const std::string key = "# sent_id = ";
      if (line.rfind(key, 0) == 0) cur.id = line.substr(key.size());
      continue;
    }
    auto f = SplitOn(line, '\t');
    if (f.size() != 10) {
      Fail(ErrorKind::kFormat, Where(source, lineno) + "expected 10 columns, found " +
                                   std::to_string(f.size()));
    }
    if (f[0].find_first_of("-.") != std::string::npos) continue;
    int id = 0, head = 0;
    if (!ParseInt(f[0], &id)) Fail(ErrorKind::kFormat, Where(source, lineno) + "bad token id");
    if (cur.heads.empty()) start_line = lineno;
    if (id != static_cast<int>(cur.heads.size()) + 1) {
      Fail(ErrorKind::kFormat, Where(source, lineno) + "token ids must be consecutive");
    }
    if (!ParseInt(f[6], &head)) {
      Fail(ErrorKind::kFormat, Where(source, lineno) + "non-integer head '" + f[6] + "'");
    }
    cur.forms.push_back(f[1]);
    cur.heads.push_back(head);
  }
  flush();
  return out;
}

std::vector<TreebankSentence> ReadConlluHeads(const std::string& path) {
  std::ifstream in = OpenInput(path);
  return ReadConlluHeads(in, path);
}

void WriteConllu(std::ostream& os, std::span<const std::string> forms, const DependencyTree& tree,
                 const std::string& sent_id) {
  if (forms.size() != tree.size()) Fail(ErrorKind::kDimension, "forms and tree differ in length");
  if (!sent_id.empty()) os << "# sent_id = " << sent_id << "\n";
  for (std::size_t m = 1; m <= tree.size(); ++m) {
    int h = tree.head(m);
    os << m << "\t" << forms[m - 1] << "\t_\t_\t_\t_\t" << h << "\t" << (h == 0 ? "root" : "dep")
       << "\t_\t_\n";
  }
  os << "\n";
}

void AttachTrees(std::vector<Example>& examples, std::span<const TreebankSentence> trees) {
  std::size_t k = 0;
  auto take = [&](const Example& ex, const std::vector<std::string>& tokens) {
    if (k >= trees.size()) {
      Fail(ErrorKind::kFormat, "treebank ends before example '" + ex.id + "'");
    }
    const auto& s = trees[k++];
    if (s.heads.size() != tokens.size()) {
      Fail(ErrorKind::kFormat, "tree '" + s.id + "' has " + std::to_string(s.heads.size()) +
                                   " tokens but example '" + ex.id + "' has " +
                                   std::to_string(tokens.size()));
    }
    return s.heads;
  };
  for (auto& ex : examples) {
    ex.heads = take(ex, ex.tokens);
    if (ex.is_pair()) ex.heads2 = take(ex, ex.tokens2);
  }
  if (k != trees.size()) Fail(ErrorKind::kFormat, "treebank has more sentences than the corpus");
}

// ---- splits and batches ------------------------------------------------------

Split SplitValidation(std::span<const Example> train, std::size_t k, std::uint64_t seed,
                      bool allow_empty_dev) {
  if (k == 0 && !allow_empty_dev) {
    Fail(ErrorKind::kUsage, "validation size 0 requires allowing an empty dev set");
  }
  if (k >= train.size()) {
    Fail(ErrorKind::kUsage, "validation size " + std::to_string(k) + " must be below " +
                                std::to_string(train.size()) + " training examples");
  }
  std::vector<std::size_t> idx(train.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<char> is_dev(train.size(), 0);
  for (std::size_t i = 0; i < k; ++i) is_dev[idx[i]] = 1;
  Split s;
  for (std::size_t i = 0; i < train.size(); ++i) (is_dev[i] ? s.dev : s.train).push_back(train[i]);
  return s;
}

DependencyTree PaddedSentences::Tree(std::size_t b) const {
  if (!has_trees()) Fail(ErrorKind::kUsage, "batch carries no trees");
  const int* h = heads.data() + b * width;
  return DependencyTree{std::vector<int>(h, h + lengths[b])};
}

namespace {

PaddedSentences Pad(std::span<const Example* const> exs, bool second, const Vocabulary& vocab) {
  PaddedSentences p;
  bool trees = true;
  for (const Example* ex : exs) {
    const auto& toks = second ? ex->tokens2 : ex->tokens;
    p.width = std::max(p.width, toks.size());
    p.lengths.push_back(toks.size());
    trees = trees && !(second ? ex->heads2 : ex->heads).empty();
  }
  const std::size_t rows = exs.size();
  p.ids.assign(rows * p.width, Vocabulary::kPad);
  p.mask.assign(rows * p.width, 0);
  if (trees) p.heads.assign(rows * p.width, kHeadPad);
  for (std::size_t b = 0; b < rows; ++b) {
    const auto& toks = second ? exs[b]->tokens2 : exs[b]->tokens;
    const auto& heads = second ? exs[b]->heads2 : exs[b]->heads;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      p.ids[b * p.width + i] = vocab.Index(toks[i]);
      p.mask[b * p.width + i] = 1;
      if (trees) p.heads[b * p.width + i] = heads[i];
    }
  }
  return p;
}

}  // namespace

std::vector<Batch> MakeBatches(std::span<const Example> examples, std::size_t batch_size,
                               const Vocabulary& vocab, const LabelSet& labels,
                               std::span<const std::size_t> order) {
  if (batch_size == 0) Fail(ErrorKind::kUsage, "batch size must be positive");
  std::vector<std::size_t> all;
  if (order.empty()) {
    all.resize(examples.size());
    std::iota(all.begin(), all.end(), 0);
    order = all;
  }
  std::vector<Batch> out;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    std::size_t end = std::min(order.size(), start + batch_size);
    Batch b;
    std::vector<const Example*> exs;
    for (std::size_t i = start; i < end; ++i) {
      const Example& ex = examples[order[i]];
      if (ex.is_pair() != examples[order[start]].is_pair()) {
        Fail(ErrorKind::kFormat, "batch mixes single-sentence and pair examples");
      }
      b.examples.push_back(order[i]);
      b.labels.push_back(labels.Index(ex.label));
      exs.push_back(&ex);
    }
    b.first = Pad(exs, false, vocab);
    if (exs.front()->is_pair()) b.second = Pad(exs, true, vocab);
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace rnsx
