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

// Post-hoc analysis: paired significance testing, tree dumps from trained
// latent-tree models, and a synthetic keyword corpus.

#ifndef RNSX_ANALYSIS_H_
#define RNSX_ANALYSIS_H_

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rnsx/data.h"
#include "rnsx/model.h"
#include "rnsx/tasks.h"

namespace rnsx {

// Paired approximate randomization on per-example scores. Each of the
// `rounds` shuffles swaps every pair with probability 1/2; the statistic is
// the absolute difference of means. Returns (1 + #{|d_shuffled| >= |d_obs|})
// / (1 + rounds).
double ApproxRandomizationTest(std::span<const double> a, std::span<const double> b,
                               std::size_t rounds = 10000, std::uint64_t seed = 1);

// 1 for a correct prediction, 0 otherwise.
std::vector<double> CorrectnessScores(std::span<const PredictionRow> rows);

struct SignificanceReport {
  std::size_t examples = 0;
  double accuracy_a = 0.0;
  double accuracy_b = 0.0;
  double p_value = 1.0;
};

// Compares two prediction files over the same examples (ids and gold labels
// must agree row by row).
SignificanceReport ComparePredictions(std::span<const PredictionRow> a,
                                      std::span<const PredictionRow> b,
                                      std::size_t rounds = 10000, std::uint64_t seed = 1);
std::string SignificanceReportToJson(const SignificanceReport& r);
std::string SignificanceReportTable(const SignificanceReport& r);

// Sentences for dumping: one per line, tokens separated by spaces. Lines
// with tabs are read as corpus rows and the last column is used.
std::vector<std::vector<std::string>> ReadSentences(std::istream& is,
                                                    const std::string& source = "<stream>");

// Decodes the maximum-score tree of each sentence and writes it in the
// ten-column treebank format to `trees`; `marginals` receives, per
// sentence, a "# sent_id = k" line and the marginal matrix as TSV.
std::vector<TreeAnalysis> DumpTrees(const TextClassifier& model, const Vocabulary& vocab,
                                    std::span<const std::vector<std::string>> sentences,
                                    std::ostream& trees, std::ostream& marginals);

// Synthetic keyword task. Each sentence holds filler tokens and exactly one
// keyword; the label is the class that owns the keyword.
struct KeywordTaskOptions {
  std::size_t classes = 4;
  std::size_t keywords_per_class = 2;
  std::size_t filler_vocabulary = 30;
  std::size_t min_length = 4;
  std::size_t max_length = 8;
};

struct KeywordCorpus {
  LabelSet labels;
  std::vector<Example> examples;
  std::vector<std::size_t> keyword_position;  // 1-based word index per example
};

KeywordCorpus GenerateKeywordCorpus(const KeywordTaskOptions& options, std::size_t size,
                                    std::uint64_t seed);
// Writes "label<TAB>sentence" rows readable by ReadSingleSentenceTsv.
void WriteSingleSentenceTsv(std::ostream& os, std::span<const Example> examples);

}  // namespace rnsx

#endif  // RNSX_ANALYSIS_H_
