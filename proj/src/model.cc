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

#include "rnsx/model.h"

#include "rnsx/error.h"

namespace rnsx {

namespace {

std::size_t HeadInput(const ModelShape& s) {
  return (s.pair ? 4 : 1) * s.encoder.sentence_dim();
}

Parameter* MakeEmbeddings(const ModelShape& s, ParameterStore& store, std::mt19937_64& rng) {
  if (s.vocab_size == 0 || s.classes < 2) {
    Fail(ErrorKind::kUsage, "model needs a vocabulary and at least two classes");
  }
  Tensor e({s.vocab_size, s.encoder.embedding_dim});
  std::uniform_real_distribution<double> u(-kEmbeddingInitRange, kEmbeddingInitRange);
  for (auto& x : e.data()) x = u(rng);
  return &store.Add("embeddings", std::move(e));
}

}  // namespace

TextClassifier::TextClassifier(const ModelShape& shape, ParameterStore& store,
                               std::mt19937_64& rng)
    : shape_(shape),
      embeddings_(MakeEmbeddings(shape, store, rng)),
      encoder_(shape.encoder, store, rng),
      head_(store, "head", HeadInput(shape),
            shape.head_hidden ? shape.head_hidden : shape.encoder.sentence_dim(), shape.classes,
            rng) {}

Var TextClassifier::Embed(Tape& t, std::span<const std::size_t> ids) const {
  for (auto id : ids) {
    if (id >= shape_.vocab_size) Fail(ErrorKind::kFormat, "token id out of vocabulary range");
  }
  return GatherRows(t.Param(*embeddings_), ids);
}

std::vector<Var> TextClassifier::Sentences(Tape& t, const PaddedSentences& side) const {
  std::vector<Var> xs;
  std::vector<DependencyTree> trees;
  std::vector<const DependencyTree*> tp;
  for (std::size_t b = 0; b < side.rows(); ++b) {
    if (side.lengths[b] == 0) Fail(ErrorKind::kFormat, "empty sentence in batch");
    xs.push_back(Embed(t, side.Row(b)));
  }
  if (shape_.encoder.needs_supervised_tree()) {
    if (!side.has_trees()) {
      Fail(ErrorKind::kFormat, "tree_mode supervised needs dependency trees for every sentence");
    }
    trees.reserve(side.rows());
    for (std::size_t b = 0; b < side.rows(); ++b) trees.push_back(side.Tree(b));
    for (const auto& tr : trees) tp.push_back(&tr);
  }
  return encoder_.EncodeBatch(t, xs, tp);
}

Var TextClassifier::Logits(Tape& t, const Batch& batch) const {
  if (batch.is_pair() != shape_.pair) {
    Fail(ErrorKind::kFormat, shape_.pair ? "model expects sentence pairs"
                                         : "model expects single sentences");
  }
  std::vector<Var> s1 = Sentences(t, batch.first);
  std::vector<Var> rows;
  if (shape_.pair) {
    std::vector<Var> s2 = Sentences(t, batch.second);
    for (std::size_t b = 0; b < s1.size(); ++b) rows.push_back(PairFeatures(s1[b], s2[b]));
  } else {
    rows = s1;
  }
  for (auto& r : rows) r = Reshape(r, {1, r.value().size()});
  return head_.Logits(t, rows.size() == 1 ? rows[0] : Concat(rows, 0));
}

Var TextClassifier::Loss(Tape& t, const Batch& batch) const {
  return CrossEntropy(Logits(t, batch), batch.labels);
}

std::vector<std::vector<double>> TextClassifier::Predict(const Batch& batch) const {
  Tape t;
  Tensor p = Probabilities(Logits(t, batch)).value();
  std::vector<std::vector<double>> out(p.rows());
  for (std::size_t r = 0; r < p.rows(); ++r) {
    auto row = p.Row(r).values();
    out[r].assign(row.begin(), row.end());
  }
  return out;
}

bool TextClassifier::scores_arcs() const {
  const EncoderConfig& c = shape_.encoder;
  if (c.variant == Variant::kStructuredAttn) return true;
  if (c.variant == Variant::kBow || c.variant == Variant::kBiLstmMax) return false;
  return c.tree_mode == TreeMode::kLatent;
}

TreeAnalysis TextClassifier::AnalyzeTree(std::span<const std::size_t> ids) const {
  if (!scores_arcs()) {
    const EncoderConfig& c = shape_.encoder;
    Fail(ErrorKind::kUsage, "tree dumps need a latent-tree model; this checkpoint is " +
                                VariantName(c.variant) + " with tree_mode " +
                                TreeModeName(c.tree_mode) +
                                " and has no arc scorer to decode");
  }
  if (ids.empty()) Fail(ErrorKind::kFormat, "cannot analyze an empty sentence");
  Tape t;
  SequenceEncoding enc = encoder_.EncodeSequence(t, Embed(t, ids));
  TreeAnalysis a;
  a.scores = encoder_.ArcScores(t, enc).value();
  a.marginals = encoder_.Marginals(t, enc).value();
  a.tree = CleDecode(a.scores, shape_.encoder.root_mode);
  return a;
}

}  // namespace rnsx
