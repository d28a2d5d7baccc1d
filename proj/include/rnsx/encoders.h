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

// Relation-network sentence encoders over BiLSTM object vectors.
//
// Objects o_1..o_n are BiLSTM outputs; o_0 is a learned root object used
// wherever an arc leaves the artificial root. g is the relation MLP over
// ordered pairs [o_head; o_mod]; f maps aggregated relations to the output
// space. Tree-constrained variants take either a given tree or a marginal
// matrix in the arc layout of struct_inference.h.

#ifndef RNSX_ENCODERS_H_
#define RNSX_ENCODERS_H_

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rnsx/autodiff.h"
#include "rnsx/nn.h"
#include "rnsx/struct_inference.h"

namespace rnsx {

enum class Variant { kFlatRn, kIntraAttn, kRecurrentRn, kStructuredAttn, kBow, kBiLstmMax };
enum class TreeMode { kNone, kSupervised, kLatent };
enum class Aggregation { kSum, kMax };

std::string VariantName(Variant v);
Variant ParseVariant(const std::string& s);
std::string TreeModeName(TreeMode m);
TreeMode ParseTreeMode(const std::string& s);
std::string AggregationName(Aggregation a);
Aggregation ParseAggregation(const std::string& s);

struct EncoderConfig {
  std::size_t embedding_dim = 100;
  std::size_t lstm_hidden = 100;     // per direction
  std::size_t relation_hidden = 100; // width of g
  std::size_t output_hidden = 100;   // width of f (flat and intra-attention)
  std::size_t mlp_layers = 2;
  std::size_t attention_dim = 100;   // rows of W_r in s_i = tanh(W_r^T [r_i; o_i])
  Aggregation aggregation = Aggregation::kMax;
  std::size_t recurrent_steps = 3;
  TreeMode tree_mode = TreeMode::kLatent;
  Variant variant = Variant::kRecurrentRn;
  RootMode root_mode = RootMode::kMultiRoot;
  double dropout = 0.5;

  void Validate() const;
  std::size_t object_dim() const { return 2 * lstm_hidden; }
  // Width of the sentence vector produced by Encode().
  std::size_t sentence_dim() const;
  bool uses_tree() const;
  bool needs_supervised_tree() const;
};

struct SequenceEncoding {
  Var objects;   // [n x d]
  Var root;      // [1 x d]
  Var with_root; // [n+1 x d], row 0 is the root object
  std::size_t n() const { return objects.value().rows(); }
};

struct AttentionOutput {
  Var parent_context;  // [n x F]: r_i (supervised) or p_i (latent)
  Var child_context;   // [n x F]: c_i; invalid for supervised trees
  Var words;           // [n x attention_dim]
};

struct RecurrentTrace {
  std::vector<Var> parent_messages;  // one [n x G] matrix per step t = 2..T
  std::vector<Var> child_messages;
};

class SentenceEncoder {
 public:
  SentenceEncoder(const EncoderConfig& config, ParameterStore& store, std::mt19937_64& rng,
                  const std::string& prefix = "enc");

  const EncoderConfig& config() const { return config_; }

  // Dropout (training tapes only) is applied to the BiLSTM input and output.
  SequenceEncoding EncodeSequence(Tape& t, Var embedded) const;
  // Attaches the root object to precomputed object rows.
  SequenceEncoding WithRoot(Tape& t, Var objects) const;

  // g over one ordered pair per row: [rows x d] x [rows x d] -> [rows x G].
  Var Relation(Tape& t, Var heads, Var mods) const;

  // f over aggregated relation rows: [rows x G] -> [rows x F].
  Var Combine(Tape& t, Var aggregated) const;

  // Bilinear arc scores, clamped to [-30, 30]; [n+1 x n].
  Var ArcScores(Tape& t, const SequenceEncoding& enc) const;
  Var ArcPotentials(Tape& t, const SequenceEncoding& enc) const;
  Var Marginals(Tape& t, const SequenceEncoding& enc) const;

  Var RnFlat(Tape& t, const SequenceEncoding& enc) const;
  Var RnSupervisedTree(Tape& t, const SequenceEncoding& enc, const DependencyTree& tree) const;
  Var RnLatentTree(Tape& t, const SequenceEncoding& enc, Var marginals) const;

  AttentionOutput IntraAttentionSupervised(Tape& t, const SequenceEncoding& enc,
                                           const DependencyTree& tree) const;
  AttentionOutput IntraAttentionLatent(Tape& t, const SequenceEncoding& enc, Var marginals) const;
  AttentionOutput IntraAttentionNoTree(Tape& t, const SequenceEncoding& enc) const;

  Var RecurrentSupervised(Tape& t, const SequenceEncoding& enc, const DependencyTree& tree,
                          std::size_t steps, RecurrentTrace* trace = nullptr) const;
  Var RecurrentLatent(Tape& t, const SequenceEncoding& enc, Var marginals, std::size_t steps,
                      RecurrentTrace* trace = nullptr) const;
  // Messages for one round from states [n+1 x d] (row 0 = root state).
  Var TreeParentMessages(Tape& t, Var states, const DependencyTree& tree) const;
  Var LatentParentMessages(Tape& t, Var states, Var marginals) const;

  // [n x 2d]: expected parent object and expected child object per word.
  Var StructuredContext(Tape& t, const SequenceEncoding& enc, Var marginals) const;
  Var StructuredAttention(Tape& t, const SequenceEncoding& enc, Var marginals) const;

  Var Bow(Tape& t, Var embedded) const;
  Var Pool(Var words) const;

  // Word-in-context rows for the variants that produce them.
  Var EncodeWords(Tape& t, Var embedded, const DependencyTree* tree) const;
  // Sentence vector [sentence_dim] for the configured variant. `tree` is
  // required when the configuration uses supervised trees.
  Var Encode(Tape& t, Var embedded, const DependencyTree* tree) const;
  // Encode() over several sentences with one lock-step BiLSTM pass. `trees`
  // is empty or has one entry per sentence. In evaluation mode each output
  // equals the unbatched Encode() exactly.
  std::vector<Var> EncodeBatch(Tape& t, std::span<const Var> embedded,
                               std::span<const DependencyTree* const> trees) const;

 private:
  struct PairSet {
    std::vector<std::size_t> heads, mods;  // indices into with_root rows
    std::vector<std::size_t> arc_index;    // flattened [n+1 x n] arc position
  };
  static PairSet AllArcs(std::size_t n);
  static PairSet WordPairs(std::size_t n);
  static PairSet TreeArcs(const DependencyTree& tree);
  Var PairRelations(Tape& t, Var rows, const PairSet& pairs) const;
  Var PairWeights(Tape& t, Var marginals, const PairSet& pairs) const;
  Var Aggregate(Tape& t, Var relations, Var weights) const;
  // Weighted parent / child sums: [n x G].
  Var ParentSum(Tape& t, Var relations, Var weights, const PairSet& pairs, std::size_t n) const;
  Var ChildSum(Tape& t, Var relations, Var weights, const PairSet& pairs, std::size_t n) const;
  Var AttentionWords(Tape& t, Var context, Var objects, const Linear& w) const;
  Var Finish(Tape& t, Var aggregated) const;
  void CheckTree(const DependencyTree& tree, std::size_t n) const;
  Var WordsFrom(Tape& t, const SequenceEncoding& enc, const DependencyTree* tree) const;
  Var SentenceFrom(Tape& t, const SequenceEncoding& enc, const DependencyTree* tree) const;

  EncoderConfig config_;
  BiLstm bilstm_;
  Parameter* root_ = nullptr;
  Parameter* arc_w_ = nullptr;
  Parameter* arc_u_ = nullptr;
  Parameter* arc_v_ = nullptr;
  Parameter* arc_b_ = nullptr;
  Mlp g_, f_;
  Linear attn_;  // W_r
  LstmCell recurrent_cell_;
};

}  // namespace rnsx

#endif  // RNSX_ENCODERS_H_
