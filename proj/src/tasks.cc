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

#include "rnsx/tasks.h"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "rnsx/error.h"

namespace rnsx {

LabelSet::LabelSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!index_.emplace(labels_[i], i).second) {
      Fail(ErrorKind::kUsage, "duplicate label '" + labels_[i] + "'");
    }
  }
}

LabelSet LabelSet::Trec() { return LabelSet({"ABBR", "ENTY", "DESC", "HUM", "LOC", "NUM"}); }

std::size_t LabelSet::Index(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) Fail(ErrorKind::kFormat, "unknown label '" + label + "'");
  return it->second;
}

Var PairFeatures(Var s1, Var s2) {
  if (s1.shape() != s2.shape()) {
    Fail(ErrorKind::kDimension, "pair features need equal widths, got " +
                                    ShapeString(s1.shape()) + " and " + ShapeString(s2.shape()));
  }
  std::size_t axis = s1.value().rank() - 1;
  return Concat({s1, s2, Mul(s1, s2), Abs(Sub(s1, s2))}, axis);
}

ClassifierHead::ClassifierHead(ParameterStore& store, const std::string& name, std::size_t in,
                               std::size_t hidden, std::size_t classes, std::mt19937_64& rng)
    : hidden_(store, name + ".hidden", in, hidden, rng),
      out_(store, name + ".out", hidden, classes, rng) {}

Var ClassifierHead::Logits(Tape& t, Var q) const {
  bool vector = q.value().rank() == 1;
  Var x = vector ? Reshape(q, {1, q.value().size()}) : q;
  Var logits = out_.Forward(t, Relu(hidden_.Forward(t, x)));
  return vector ? Reshape(logits, {classes()}) : logits;
}

Var Probabilities(Var logits) { return Softmax(logits, logits.value().rank() - 1); }

Var CrossEntropy(Var logits, std::size_t gold) {
  if (logits.value().rank() != 1) Fail(ErrorKind::kDimension, "expected a logit vector");
  std::size_t c = logits.value().size();
  if (gold >= c) {
    Fail(ErrorKind::kUsage, "gold index " + std::to_string(gold) + " out of range for " +
                                std::to_string(c) + " classes");
  }
  Var logp = LogSoftmax(logits, 0);
  const std::size_t idx[] = {gold};
  return Scale(GatherRows(logp, idx), -1.0);
}

Var CrossEntropy(Var logits, std::span<const std::size_t> gold) {
  const Tensor& v = logits.value();
  if (v.rank() != 2 || v.rows() != gold.size() || gold.empty()) {
    Fail(ErrorKind::kDimension, "logits " + ShapeString(v.shape()) + " do not match " +
                                    std::to_string(gold.size()) + " gold labels");
  }
  Tensor pick(v.shape());
  for (std::size_t r = 0; r < gold.size(); ++r) {
    if (gold[r] >= v.cols()) {
      Fail(ErrorKind::kUsage, "gold index " + std::to_string(gold[r]) + " out of range for " +
                                  std::to_string(v.cols()) + " classes");
    }
    pick(r, gold[r]) = 1.0;
  }
  Tape& t = *logits.tape();
  Var picked = SumAll(Mul(LogSoftmax(logits, 1), t.Constant(std::move(pick))));
  return Scale(picked, -1.0 / static_cast<double>(gold.size()));
}

std::size_t Argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

double Accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> gold) {
  if (predicted.size() != gold.size()) Fail(ErrorKind::kDimension, "accuracy: length mismatch");
  if (gold.empty()) Fail(ErrorKind::kUsage, "accuracy of an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hits += predicted[i] == gold[i];
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

void WritePredictionsTsv(std::ostream& os, const LabelSet& labels,
                         std::span<const PredictionRow> rows) {
  os << "id\tgold\tpred";
  for (const auto& l : labels.labels()) os << "\tp_" << l;
  os << "\n";
  os << std::setprecision(17);
  for (const auto& r : rows) {
    if (r.probabilities.size() != labels.size()) {
      Fail(ErrorKind::kDimension, "prediction for '" + r.id + "' has wrong class count");
    }
    os << r.id << "\t" << labels.Name(r.gold) << "\t" << labels.Name(r.predicted());
    for (double p : r.probabilities) os << "\t" << p;
    os << "\n";
  }
}

namespace {

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

}  // namespace

std::vector<PredictionRow> ReadPredictionsTsv(std::istream& is, LabelSet* labels_out) {
  std::string line;
  if (!std::getline(is, line)) Fail(ErrorKind::kFormat, "prediction file is empty");
  auto header = SplitTabs(line);
  if (header.size() < 4 || header[0] != "id" || header[1] != "gold" || header[2] != "pred") {
    Fail(ErrorKind::kFormat, "prediction header must start with id, gold, pred");
  }
  std::vector<std::string> names;
  for (std::size_t i = 3; i < header.size(); ++i) {
    if (header[i].rfind("p_", 0) != 0) Fail(ErrorKind::kFormat, "bad column '" + header[i] + "'");
    names.push_back(header[i].substr(2));
  }
  LabelSet labels(names);
  std::vector<PredictionRow> rows;
  for (std::size_t lineno = 2; std::getline(is, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = SplitTabs(line);
    if (f.size() != header.size()) {
      Fail(ErrorKind::kFormat, "line " + std::to_string(lineno) + ": expected " +
                                   std::to_string(header.size()) + " fields");
    }
    PredictionRow r;
    r.id = f[0];
    r.gold = labels.Index(f[1]);
    for (std::size_t i = 3; i < f.size(); ++i) {
      try {
        r.probabilities.push_back(std::stod(f[i]));
      } catch (const std::exception&) {
        Fail(ErrorKind::kFormat, "line " + std::to_string(lineno) + ": bad probability");
      }
    }
    rows.push_back(std::move(r));
  }
  if (labels_out) *labels_out = labels;
  return rows;
}

}  // namespace rnsx
