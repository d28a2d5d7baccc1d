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

// Classification heads, losses and metrics for single-sentence and
// sentence-pair tasks.

#ifndef RNSX_TASKS_H_
#define RNSX_TASKS_H_

#include <cstddef>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rnsx/autodiff.h"
#include "rnsx/nn.h"

namespace rnsx {

class LabelSet {
 public:
  LabelSet() = default;
  // Labels keep their order; duplicates are a usage error.
  explicit LabelSet(std::vector<std::string> labels);

  // The six coarse TREC question classes, in their conventional short form.
  static LabelSet Trec();

  std::size_t Index(const std::string& label) const;  // format error if unknown
  bool Contains(const std::string& label) const { return index_.count(label) > 0; }
  const std::string& Name(std::size_t i) const { return labels_.at(i); }
  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

// [s1; s2; s1*s2; |s1-s2|] along the last axis. Accepts vectors or matrices
// with one sentence per row.
Var PairFeatures(Var s1, Var s2);

// One hidden ReLU layer followed by the output layer; produces logits.
class ClassifierHead {
 public:
  ClassifierHead() = default;
  ClassifierHead(ParameterStore& store, const std::string& name, std::size_t in,
                 std::size_t hidden, std::size_t classes, std::mt19937_64& rng);
  // q: [in] -> [classes], or [rows x in] -> [rows x classes].
  Var Logits(Tape& t, Var q) const;
  std::size_t in() const { return hidden_.in(); }
  std::size_t classes() const { return out_.out(); }

 private:
  Linear hidden_, out_;
};

// Softmax over the last axis.
Var Probabilities(Var logits);

// -log p(gold) from logits [classes]; out-of-range gold is a usage error.
Var CrossEntropy(Var logits, std::size_t gold);
// Mean over rows of [rows x classes] logits.
Var CrossEntropy(Var logits, std::span<const std::size_t> gold);

std::size_t Argmax(std::span<const double> values);
// Fraction of equal entries; equal non-zero lengths required.
double Accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> gold);

struct PredictionRow {
  std::string id;
  std::size_t gold = 0;
  std::vector<double> probabilities;
  std::size_t predicted() const { return Argmax(probabilities); }
};

// Columns: id, gold, pred, then p_<label> for every label.
void WritePredictionsTsv(std::ostream& os, const LabelSet& labels,
                         std::span<const PredictionRow> rows);
// Reads the file written above; labels come from the header.
std::vector<PredictionRow> ReadPredictionsTsv(std::istream& is, LabelSet* labels = nullptr);

}  // namespace rnsx

#endif  // RNSX_TASKS_H_
