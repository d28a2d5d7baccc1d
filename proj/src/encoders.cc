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

#include "rnsx/encoders.h"

#include <algorithm>

#include "rnsx/error.h"

namespace rnsx {

namespace {

template <typename E>
struct Names {
  E value;
  const char* name;
};

constexpr Names<Variant> kVariants[] = {
    {Variant::kFlatRn, "flat-rn"},
    {Variant::kIntraAttn, "intra-attn"},
    {Variant::kRecurrentRn, "recurrent-rn"},
    {Variant::kStructuredAttn, "structured-attn-baseline"},
    {Variant::kBow, "bow"},
    {Variant::kBiLstmMax, "bilstm-max"},
};
constexpr Names<TreeMode> kTreeModes[] = {
    {TreeMode::kNone, "none"},
    {TreeMode::kSupervised, "supervised"},
    {TreeMode::kLatent, "latent"},
};
constexpr Names<Aggregation> kAggregations[] = {
    {Aggregation::kSum, "sum"},
    {Aggregation::kMax, "max"},
};

template <typename E, std::size_t N>
std::string NameOf(const Names<E> (&table)[N], E v) {
  for (const auto& e : table)
    if (e.value == v) return e.name;
  return "?";
}

// Accepts both "flat-rn" and "flat_rn".
template <typename E, std::size_t N>
E Parse(const Names<E> (&table)[N], std::string s, const char* what) {
  std::replace(s.begin(), s.end(), '_', '-');
  for (const auto& e : table)
    if (s == e.name) return e.value;
  Fail(ErrorKind::kUsage, std::string("unknown ") + what + " '" + s + "'");
}

}  // namespace

std::string VariantName(Variant v) { return NameOf(kVariants, v); }
Variant ParseVariant(const std::string& s) { return Parse(kVariants, s, "variant"); }
std::string TreeModeName(TreeMode m) { return NameOf(kTreeModes, m); }
TreeMode ParseTreeMode(const std::string& s) { return Parse(kTreeModes, s, "tree mode"); }
std::string AggregationName(Aggregation a) { return NameOf(kAggregations, a); }
Aggregation ParseAggregation(const std::string& s) {
  return Parse(kAggregations, s, "aggregation");
}

void EncoderConfig::Validate() const {
  if (embedding_dim == 0 || lstm_hidden == 0 || relation_hidden == 0 || output_hidden == 0 ||
      attention_dim == 0 || mlp_layers == 0) {
    Fail(ErrorKind::kUsage, "encoder dimensions must be positive");
  }
  if (recurrent_steps < 1) Fail(ErrorKind::kUsage, "recurrent_steps must be >= 1");
  if (variant == Variant::kRecurrentRn && tree_mode == TreeMode::kNone) {
    Fail(ErrorKind::kUsage, "recurrent-rn requires tree_mode supervised or latent");
  }
  if (dropout < 0.0 || dropout >= 1.0) Fail(ErrorKind::kUsage, "dropout must be in [0, 1)");
}

std::size_t EncoderConfig::sentence_dim() const {
  switch (variant) {
    case Variant::kFlatRn: return output_hidden;
    case Variant::kIntraAttn: return attention_dim;
    case Variant::kRecurrentRn: return object_dim();
    case Variant::kStructuredAttn: return attention_dim;
    case Variant::kBow: return embedding_dim;
    case Variant::kBiLstmMax: return object_dim();
  }
  return 0;
}

bool EncoderConfig::uses_tree() const {
  if (variant == Variant::kStructuredAttn) return true;
  if (variant == Variant::kBow || variant == Variant::kBiLstmMax) return false;
  return tree_mode != TreeMode::kNone;
}

bool EncoderConfig::needs_supervised_tree() const {
  return uses_tree() && variant != Variant::kStructuredAttn && tree_mode == TreeMode::kSupervised;
}

SentenceEncoder::SentenceEncoder(const EncoderConfig& config, ParameterStore& store,
                                 std::mt19937_64& rng, const std::string& prefix)
    : config_(config) {
  config_.Validate();
  const Variant v = config_.variant;
  if (v == Variant::kBow) return;
  const std::size_t d = config_.object_dim();
  const std::size_t G = config_.relation_hidden;
  const std::size_t F = config_.output_hidden;
  bilstm_ = BiLstm(store, prefix + ".bilstm", config_.embedding_dim, config_.lstm_hidden, rng);
  if (v == Variant::kBiLstmMax) return;

  const bool latent = v == Variant::kStructuredAttn || config_.tree_mode == TreeMode::kLatent;
  if (config_.uses_tree()) {
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    Tensor root({d});
    for (auto& x : root.data()) x = u(rng);
    root_ = &store.Add(prefix + ".root", std::move(root));
  }
  if (latent) {
    arc_w_ = &store.Add(prefix + ".arc.w", GlorotUniform(d, d, rng));
    arc_u_ = &store.Add(prefix + ".arc.u", GlorotUniform(d, 1, rng));
    arc_v_ = &store.Add(prefix + ".arc.v", GlorotUniform(d, 1, rng));
    arc_b_ = &store.Add(prefix + ".arc.b", Tensor({1}));
  }
  if (v == Variant::kStructuredAttn) {
    attn_ = Linear(store, prefix + ".attn", 3 * d, config_.attention_dim, rng, /*bias=*/false);
    return;
  }
  g_ = Mlp(store, prefix + ".g", 2 * d, G, config_.mlp_layers, rng);
  if (v == Variant::kFlatRn || v == Variant::kIntraAttn) {
    f_ = Mlp(store, prefix + ".f", G, F, config_.mlp_layers, rng);
  }
  if (v == Variant::kIntraAttn) {
    std::size_t ctx = config_.tree_mode == TreeMode::kSupervised ? F : 2 * F;
    attn_ = Linear(store, prefix + ".attn", ctx + d, config_.attention_dim, rng, /*bias=*/false);
  }
  if (v == Variant::kRecurrentRn) {
    std::size_t msg = config_.tree_mode == TreeMode::kSupervised ? G : 2 * G;
    recurrent_cell_ = LstmCell(store, prefix + ".cell", d + msg, d, rng);
  }
}

SequenceEncoding SentenceEncoder::EncodeSequence(Tape& t, Var embedded) const {
  if (embedded.value().rank() != 2 || embedded.value().rows() == 0) {
    Fail(ErrorKind::kDimension, "cannot encode an empty sentence");
  }
  Var x = Dropout(embedded, config_.dropout);
  return WithRoot(t, Dropout(bilstm_.Forward(t, x), config_.dropout));
}

SequenceEncoding SentenceEncoder::WithRoot(Tape& t, Var objects) const {
  SequenceEncoding enc;
  enc.objects = objects;
  if (root_) {
    enc.root = Reshape(t.Param(*root_), {1, config_.object_dim()});
    enc.with_root = Concat({enc.root, objects}, 0);
  }
  return enc;
}

Var SentenceEncoder::Relation(Tape& t, Var heads, Var mods) const {
  const Shape& a = heads.shape();
  const Shape& b = mods.shape();
  if (a.size() != 2 || a != b || a[1] * 2 != g_.in()) {
    Fail(ErrorKind::kDimension, "relation inputs " + ShapeString(a) + " and " + ShapeString(b) +
                                    " do not match width " + std::to_string(g_.in() / 2));
  }
  return g_.Forward(t, Concat({heads, mods}, 1));
}

Var SentenceEncoder::ArcScores(Tape& t, const SequenceEncoding& enc) const {
  if (!arc_w_) Fail(ErrorKind::kUsage, "encoder has no arc scorer (tree mode is not latent)");
  const std::size_t n = enc.n();
  Var all = enc.with_root;
  Var bilinear = MatMul(MatMul(all, t.Param(*arc_w_)), Transpose(enc.objects));
  Var head_term = MatMul(MatMul(all, t.Param(*arc_u_)), t.Constant(Tensor({1, n}, 1.0)));
  Var mod_term = Add(MatMul(enc.objects, t.Param(*arc_v_)), t.Param(*arc_b_));
  Var mod_rows = MatMul(t.Constant(Tensor({n + 1, 1}, 1.0)), Transpose(mod_term));
  return Clamp(Add(Add(bilinear, head_term), mod_rows), -30.0, 30.0);
}

Var SentenceEncoder::ArcPotentials(Tape& t, const SequenceEncoding& enc) const {
  return Exp(ArcScores(t, enc));
}

Var SentenceEncoder::Marginals(Tape& t, const SequenceEncoding& enc) const {
  return TreeMarginals(ArcPotentials(t, enc), config_.root_mode);
}

// ---- pair bookkeeping --------------------------------------------------------

SentenceEncoder::PairSet SentenceEncoder::AllArcs(std::size_t n) {
  PairSet p;
  for (std::size_t h = 0; h <= n; ++h) {
    for (std::size_t m = 1; m <= n; ++m) {
      if (h == m) continue;
      p.heads.push_back(h);
      p.mods.push_back(m);
      p.arc_index.push_back(h * n + (m - 1));
    }
  }
  return p;
}

SentenceEncoder::PairSet SentenceEncoder::WordPairs(std::size_t n) {
  PairSet p;
  for (std::size_t h = 1; h <= n; ++h) {
    for (std::size_t m = 1; m <= n; ++m) {
      if (h == m) continue;
      p.heads.push_back(h);
      p.mods.push_back(m);
      p.arc_index.push_back(h * n + (m - 1));
    }
  }
  return p;
}

SentenceEncoder::PairSet SentenceEncoder::TreeArcs(const DependencyTree& tree) {
  PairSet p;
  std::size_t n = tree.size();
  for (std::size_t m = 1; m <= n; ++m) {
    std::size_t h = static_cast<std::size_t>(tree.head(m));
    p.heads.push_back(h);
    p.mods.push_back(m);
    p.arc_index.push_back(h * n + (m - 1));
  }
  return p;
}

void SentenceEncoder::CheckTree(const DependencyTree& tree, std::size_t n) const {
  if (tree.size() != n) {
    Fail(ErrorKind::kFormat, "tree has " + std::to_string(tree.size()) + " heads for " +
                                 std::to_string(n) + " words");
  }
  ValidateTree(tree);
}

Var SentenceEncoder::PairRelations(Tape& t, Var rows, const PairSet& pairs) const {
  return Relation(t, GatherRows(rows, pairs.heads), GatherRows(rows, pairs.mods));
}

Var SentenceEncoder::PairWeights(Tape&, Var marginals, const PairSet& pairs) const {
  std::size_t size = marginals.value().size();
  return GatherRows(Reshape(marginals, {size}), pairs.arc_index);
}

Var SentenceEncoder::Aggregate(Tape& t, Var relations, Var weights) const {
  const std::size_t rows = relations.value().rows();
  const std::size_t width = relations.value().cols();
  if (rows == 0) return t.Constant(Tensor({width}));
  if (config_.aggregation == Aggregation::kSum) {
    if (!weights.valid()) return Sum(relations, 0);
    return Reshape(MatMul(Reshape(weights, {1, rows}), relations), {width});
  }
  if (!weights.valid()) return Max(relations, 0);
  // Max over probability-weighted relations, restricted to arcs with
  // non-zero probability.
  Var weighted = Transpose(Mul(Transpose(relations), weights));
  std::vector<std::size_t> support;
  for (std::size_t k = 0; k < rows; ++k)
    if (weights.value()[k] != 0.0) support.push_back(k);
  if (support.empty()) return t.Constant(Tensor({width}));
  if (support.size() != rows) weighted = GatherRows(weighted, support);
  return Max(weighted, 0);
}

Var SentenceEncoder::Combine(Tape& t, Var aggregated) const {
  if (f_.out() == 0) Fail(ErrorKind::kUsage, VariantName(config_.variant) + " has no f");
  return f_.Forward(t, aggregated);
}

Var SentenceEncoder::Finish(Tape& t, Var aggregated) const {
  std::size_t w = aggregated.value().size();
  return Reshape(Combine(t, Reshape(aggregated, {1, w})), {f_.out()});
}

Var SentenceEncoder::ParentSum(Tape& t, Var relations, Var weights, const PairSet& pairs,
                               std::size_t n) const {
  Tensor sel({n, pairs.mods.size()});
  for (std::size_t k = 0; k < pairs.mods.size(); ++k) sel(pairs.mods[k] - 1, k) = 1.0;
  Var s = t.Constant(std::move(sel));
  if (weights.valid()) s = Mul(s, weights);
  return MatMul(s, relations);
}

Var SentenceEncoder::ChildSum(Tape& t, Var relations, Var weights, const PairSet& pairs,
                              std::size_t n) const {
  Tensor sel({n, pairs.heads.size()});
  for (std::size_t k = 0; k < pairs.heads.size(); ++k)
    if (pairs.heads[k] > 0) sel(pairs.heads[k] - 1, k) = 1.0;
  Var s = t.Constant(std::move(sel));
  if (weights.valid()) s = Mul(s, weights);
  return MatMul(s, relations);
}

// ---- flat and tree-constrained RNs -------------------------------------------

Var SentenceEncoder::RnFlat(Tape& t, const SequenceEncoding& enc) const {
  PairSet pairs = WordPairs(enc.n());
  // Word pairs index objects directly (1-based); prepend a dummy row.
  Var rows = Concat({t.Constant(Tensor({1, config_.object_dim()})), enc.objects}, 0);
  if (pairs.heads.empty()) return Finish(t, t.Constant(Tensor({config_.relation_hidden})));
  return Finish(t, Aggregate(t, PairRelations(t, rows, pairs), Var()));
}

Var SentenceEncoder::RnSupervisedTree(Tape& t, const SequenceEncoding& enc,
                                      const DependencyTree& tree) const {
  CheckTree(tree, enc.n());
  return Finish(t, Aggregate(t, PairRelations(t, enc.with_root, TreeArcs(tree)), Var()));
}

Var SentenceEncoder::RnLatentTree(Tape& t, const SequenceEncoding& enc, Var marginals) const {
  PairSet pairs = AllArcs(enc.n());
  Var rel = PairRelations(t, enc.with_root, pairs);
  return Finish(t, Aggregate(t, rel, PairWeights(t, marginals, pairs)));
}

// ---- intra-sentence attention ------------------------------------------------

Var SentenceEncoder::AttentionWords(Tape& t, Var context, Var objects, const Linear& w) const {
  return Tanh(w.Forward(t, Concat({context, objects}, 1)));
}

AttentionOutput SentenceEncoder::IntraAttentionSupervised(Tape& t, const SequenceEncoding& enc,
                                                          const DependencyTree& tree) const {
  CheckTree(tree, enc.n());
  AttentionOutput out;
  out.parent_context = Combine(t, PairRelations(t, enc.with_root, TreeArcs(tree)));
  out.words = AttentionWords(t, out.parent_context, enc.objects, attn_);
  return out;
}

AttentionOutput SentenceEncoder::IntraAttentionLatent(Tape& t, const SequenceEncoding& enc,
                                                      Var marginals) const {
  const std::size_t n = enc.n();
  PairSet pairs = AllArcs(n);
  Var rel = PairRelations(t, enc.with_root, pairs);
  Var w = PairWeights(t, marginals, pairs);
  AttentionOutput out;
  out.parent_context = Combine(t, ParentSum(t, rel, w, pairs, n));
  out.child_context = Combine(t, ChildSum(t, rel, w, pairs, n));
  out.words = AttentionWords(t, Concat({out.parent_context, out.child_context}, 1),
                             enc.objects, attn_);
  return out;
}

AttentionOutput SentenceEncoder::IntraAttentionNoTree(Tape& t, const SequenceEncoding& enc) const {
  const std::size_t n = enc.n();
  PairSet pairs = WordPairs(n);
  Var rows = Concat({t.Constant(Tensor({1, config_.object_dim()})), enc.objects}, 0);
  Var rel = pairs.heads.empty() ? t.Constant(Tensor({0, config_.relation_hidden}))
                                : PairRelations(t, rows, pairs);
  AttentionOutput out;
  out.parent_context = Combine(t, ParentSum(t, rel, Var(), pairs, n));
  out.child_context = Combine(t, ChildSum(t, rel, Var(), pairs, n));
  out.words = AttentionWords(t, Concat({out.parent_context, out.child_context}, 1),
                             enc.objects, attn_);
  return out;
}

// ---- recurrent RNs -----------------------------------------------------------

Var SentenceEncoder::TreeParentMessages(Tape& t, Var states, const DependencyTree& tree) const {
  return PairRelations(t, states, TreeArcs(tree));
}

Var SentenceEncoder::LatentParentMessages(Tape& t, Var states, Var marginals) const {
  std::size_t n = states.value().rows() - 1;
  PairSet pairs = AllArcs(n);
  Var rel = PairRelations(t, states, pairs);
  return ParentSum(t, rel, PairWeights(t, marginals, pairs), pairs, n);
}

Var SentenceEncoder::RecurrentSupervised(Tape& t, const SequenceEncoding& enc,
                                         const DependencyTree& tree, std::size_t steps,
                                         RecurrentTrace* trace) const {
  CheckTree(tree, enc.n());
  if (steps < 1) Fail(ErrorKind::kUsage, "recurrent steps must be >= 1");
  const std::size_t n = enc.n();
  PairSet pairs = TreeArcs(tree);
  LstmCell::State s{enc.objects, t.Constant(Tensor({n, config_.object_dim()}))};
  for (std::size_t step = 2; step <= steps; ++step) {
    // All messages read the previous step's states; the root state stays o_0.
    Var states = Concat({enc.root, s.h}, 0);
    Var msg = PairRelations(t, states, pairs);
    if (trace) trace->parent_messages.push_back(msg);
    s = recurrent_cell_.Step(t, Concat({enc.objects, msg}, 1), s);
  }
  return s.h;
}

Var SentenceEncoder::RecurrentLatent(Tape& t, const SequenceEncoding& enc, Var marginals,
                                     std::size_t steps, RecurrentTrace* trace) const {
  if (steps < 1) Fail(ErrorKind::kUsage, "recurrent steps must be >= 1");
  const std::size_t n = enc.n();
  PairSet pairs = AllArcs(n);
  Var w = PairWeights(t, marginals, pairs);
  LstmCell::State s{enc.objects, t.Constant(Tensor({n, config_.object_dim()}))};
  for (std::size_t step = 2; step <= steps; ++step) {
    Var states = Concat({enc.root, s.h}, 0);
    Var rel = PairRelations(t, states, pairs);
    Var parent = ParentSum(t, rel, w, pairs, n);
    Var child = ChildSum(t, rel, w, pairs, n);
    if (trace) {
      trace->parent_messages.push_back(parent);
      trace->child_messages.push_back(child);
    }
    s = recurrent_cell_.Step(t, Concat({enc.objects, parent, child}, 1), s);
  }
  return s.h;
}

// ---- baselines ---------------------------------------------------------------

Var SentenceEncoder::StructuredContext(Tape&, const SequenceEncoding& enc, Var marginals) const {
  const std::size_t n = enc.n();
  // parent[i] = sum_h p(h->i) o_h ; child[i] = sum_m p(i->m) o_m
  Var parent = MatMul(Transpose(marginals), enc.with_root);
  Var child = MatMul(Slice(marginals, 0, 1, n + 1), enc.objects);
  return Concat({parent, child}, 1);
}

Var SentenceEncoder::StructuredAttention(Tape& t, const SequenceEncoding& enc,
                                         Var marginals) const {
  return AttentionWords(t, StructuredContext(t, enc, marginals), enc.objects, attn_);
}

Var SentenceEncoder::Bow(Tape&, Var embedded) const {
  std::size_t n = embedded.value().rows();
  if (n == 0) Fail(ErrorKind::kDimension, "cannot encode an empty sentence");
  return Scale(Sum(embedded, 0), 1.0 / static_cast<double>(n));
}

Var SentenceEncoder::Pool(Var words) const { return Max(words, 0); }

// ---- dispatch ----------------------------------------------------------------

Var SentenceEncoder::WordsFrom(Tape& t, const SequenceEncoding& enc,
                               const DependencyTree* tree) const {
  const Variant v = config_.variant;
  if (v == Variant::kBow || v == Variant::kFlatRn) {
    Fail(ErrorKind::kUsage, VariantName(v) + " does not produce word-in-context vectors");
  }
  if (v == Variant::kBiLstmMax) return enc.objects;
  if (v == Variant::kStructuredAttn) return StructuredAttention(t, enc, Marginals(t, enc));
  const TreeMode mode = config_.tree_mode;
  if (mode == TreeMode::kSupervised && !tree) {
    Fail(ErrorKind::kUsage, "supervised tree mode needs a dependency tree per sentence");
  }
  if (v == Variant::kIntraAttn) {
    if (mode == TreeMode::kNone) return IntraAttentionNoTree(t, enc).words;
    if (mode == TreeMode::kSupervised) return IntraAttentionSupervised(t, enc, *tree).words;
    return IntraAttentionLatent(t, enc, Marginals(t, enc)).words;
  }
  if (mode == TreeMode::kSupervised) {
    return RecurrentSupervised(t, enc, *tree, config_.recurrent_steps);
  }
  return RecurrentLatent(t, enc, Marginals(t, enc), config_.recurrent_steps);
}

Var SentenceEncoder::SentenceFrom(Tape& t, const SequenceEncoding& enc,
                                  const DependencyTree* tree) const {
  if (config_.variant != Variant::kFlatRn) return Pool(WordsFrom(t, enc, tree));
  switch (config_.tree_mode) {
    case TreeMode::kNone: return RnFlat(t, enc);
    case TreeMode::kSupervised:
      if (!tree) Fail(ErrorKind::kUsage, "supervised tree mode needs a dependency tree");
      return RnSupervisedTree(t, enc, *tree);
    case TreeMode::kLatent: return RnLatentTree(t, enc, Marginals(t, enc));
  }
  return Var();
}

Var SentenceEncoder::EncodeWords(Tape& t, Var embedded, const DependencyTree* tree) const {
  if (config_.variant == Variant::kBow) {
    Fail(ErrorKind::kUsage, "bow does not produce word-in-context vectors");
  }
  return WordsFrom(t, EncodeSequence(t, embedded), tree);
}

Var SentenceEncoder::Encode(Tape& t, Var embedded, const DependencyTree* tree) const {
  if (config_.variant == Variant::kBow) return Bow(t, embedded);
  return SentenceFrom(t, EncodeSequence(t, embedded), tree);
}

std::vector<Var> SentenceEncoder::EncodeBatch(Tape& t, std::span<const Var> embedded,
                                              std::span<const DependencyTree* const> trees) const {
  if (!trees.empty() && trees.size() != embedded.size()) {
    Fail(ErrorKind::kDimension, "batch has " + std::to_string(embedded.size()) +
                                    " sentences but " + std::to_string(trees.size()) + " trees");
  }
  std::vector<Var> out(embedded.size());
  auto tree_at = [&](std::size_t i) { return trees.empty() ? nullptr : trees[i]; };
  if (config_.variant == Variant::kBow) {
    for (std::size_t i = 0; i < embedded.size(); ++i) out[i] = Bow(t, embedded[i]);
    return out;
  }
  std::vector<Var> x(embedded.size());
  for (std::size_t i = 0; i < embedded.size(); ++i) x[i] = Dropout(embedded[i], config_.dropout);
  std::vector<Var> objects = bilstm_.ForwardBatch(t, x);
  for (std::size_t i = 0; i < embedded.size(); ++i) {
    out[i] = SentenceFrom(t, WithRoot(t, Dropout(objects[i], config_.dropout)), tree_at(i));
  }
  return out;
}

}  // namespace rnsx
