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

// Corpus readers, vocabulary, pretrained embeddings and padded batches.
//
// Corpora are pre-tokenized on single spaces. Dependency trees come from
// the 10-column treebank format and are attached to examples by position.

#ifndef RNSX_DATA_H_
#define RNSX_DATA_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rnsx/struct_inference.h"
#include "rnsx/tasks.h"
#include "rnsx/tensor.h"

namespace rnsx {

struct Example {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<std::string> tokens2;  // second sentence of a pair task
  std::string label;
  std::vector<int> heads;   // optional supervised tree, 0 = root
  std::vector<int> heads2;
  bool is_pair() const { return !tokens2.empty(); }
};

struct VocabularyOptions {
  std::size_t min_frequency = 1;
  bool lowercase = false;
};

class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr const char* kPadToken = "<pad>";
  static constexpr const char* kUnkToken = "<unk>";

  explicit Vocabulary(VocabularyOptions options = {});
  // Restores a vocabulary from its token list (index order, specials first).
  Vocabulary(const std::vector<std::string>& tokens, VocabularyOptions options);

  // Tokens reaching min_frequency, in order of first appearance.
  static Vocabulary Build(std::span<const Example> examples, VocabularyOptions options = {});

  std::size_t Index(const std::string& token) const;  // kUnk when absent
  bool Contains(const std::string& token) const;
  const std::string& Token(std::size_t index) const { return tokens_.at(index); }
  std::size_t Frequency(const std::string& token) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const VocabularyOptions& options() const { return options_; }

  std::vector<std::size_t> Encode(std::span<const std::string> tokens) const;
  std::vector<std::string> Decode(std::span<const std::size_t> ids) const;

 private:
  std::string Normalize(const std::string& token) const;
  std::size_t Add(const std::string& token);

  VocabularyOptions options_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::string, std::size_t> frequency_;
};

struct EmbeddingTable {
  Tensor table;                 // [|V| x d]
  std::vector<bool> pretrained; // per row
  std::size_t hits = 0;
  std::size_t misses = 0;
  std::vector<std::string> warnings;
};

inline constexpr double kEmbeddingInitRange = 0.05;

// Every row uniform in [-0.05, 0.05].
EmbeddingTable RandomEmbeddings(const Vocabulary& vocab, std::size_t dim, std::mt19937_64& rng);
// Text format "token v1 ... vd" per line. Rows for tokens in the file are
// copied (first occurrence wins); the rest are random as above. A line
// whose width differs from `dim` is a format error naming the line.
EmbeddingTable LoadPretrainedEmbeddings(const std::string& path, const Vocabulary& vocab,
                                        std::size_t dim, std::mt19937_64& rng);

// "label<TAB>sentence" per line; ids are 1-based line numbers.
std::vector<Example> ReadSingleSentenceTsv(const std::string& path, const LabelSet& labels);
std::vector<Example> ReadSingleSentenceTsv(std::istream& is, const LabelSet& labels,
                                           const std::string& source = "<stream>");
// "label<TAB>sentence1<TAB>sentence2" per line.
std::vector<Example> ReadPairTsv(const std::string& path, const LabelSet& labels);
std::vector<Example> ReadPairTsv(std::istream& is, const LabelSet& labels,
                                 const std::string& source = "<stream>");

struct TreebankSentence {
  std::string id;  // "# sent_id = ..." when present, else the 1-based ordinal
  std::vector<std::string> forms;
  std::vector<int> heads;
};

// Skips comments, multi-word token ranges (1-2) and empty nodes (1.1).
// Every tree is checked for validity.
std::vector<TreebankSentence> ReadConlluHeads(const std::string& path);
std::vector<TreebankSentence> ReadConlluHeads(std::istream& is,
                                              const std::string& source = "<stream>");
// Ten columns per token; deprel is "root" for root children, "dep" otherwise.
void WriteConllu(std::ostream& os, std::span<const std::string> forms, const DependencyTree& tree,
                 const std::string& sent_id = "");

// Attaches trees by position: one per example, or two per pair example.
void AttachTrees(std::vector<Example>& examples, std::span<const TreebankSentence> trees);

struct Split {
  std::vector<Example> train;
  std::vector<Example> dev;
};

// Uniform sample of k dev examples; both parts keep corpus order. k = 0
// needs allow_empty_dev.
Split SplitValidation(std::span<const Example> train, std::size_t k, std::uint64_t seed,
                      bool allow_empty_dev = false);

inline constexpr int kHeadPad = -1;

// One padded side of a batch: row b holds lengths[b] real tokens, then pad.
struct PaddedSentences {
  std::size_t width = 0;
  std::vector<std::size_t> ids;      // [batch x width], Vocabulary::kPad past the end
  std::vector<std::size_t> lengths;
  std::vector<std::uint8_t> mask;    // 1 exactly on real tokens
  std::vector<int> heads;            // kHeadPad past the end; empty without trees

  std::size_t rows() const { return lengths.size(); }
  std::span<const std::size_t> Row(std::size_t b) const {
    return {ids.data() + b * width, lengths[b]};
  }
  bool has_trees() const { return !heads.empty(); }
  DependencyTree Tree(std::size_t b) const;
};

struct Batch {
  std::vector<std::size_t> examples;  // indices into the source list
  std::vector<std::size_t> labels;
  PaddedSentences first;
  PaddedSentences second;  // empty unless the task has sentence pairs
  bool is_pair() const { return second.rows() > 0; }
  std::size_t size() const { return examples.size(); }
};

// Consecutive batches over `order` (all examples in corpus order if empty).
std::vector<Batch> MakeBatches(std::span<const Example> examples, std::size_t batch_size,
                               const Vocabulary& vocab, const LabelSet& labels,
                               std::span<const std::size_t> order = {});

std::vector<std::string> SplitTokens(const std::string& sentence);

}  // namespace rnsx

#endif  // RNSX_DATA_H_
