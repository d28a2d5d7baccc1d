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

// Embedding table + sentence encoder + classification head.

#ifndef RNSX_MODEL_H_
#define RNSX_MODEL_H_

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "rnsx/autodiff.h"
#include "rnsx/data.h"
#include "rnsx/encoders.h"
#include "rnsx/tasks.h"

namespace rnsx {

struct ModelShape {
  EncoderConfig encoder;
  std::size_t vocab_size = 0;
  std::size_t classes = 0;
  std::size_t head_hidden = 0;  // 0 = sentence vector width
  bool pair = false;
};

struct TreeAnalysis {
  Tensor scores;     // [n+1 x n] clamped arc scores
  Tensor marginals;  // [n+1 x n]
  DependencyTree tree;
};

class TextClassifier {
 public:
  TextClassifier(const ModelShape& shape, ParameterStore& store, std::mt19937_64& rng);

  const ModelShape& shape() const { return shape_; }
  const SentenceEncoder& encoder() const { return encoder_; }
  Parameter& embeddings() const { return *embeddings_; }

  // Sentence vectors for every row of a padded side.
  std::vector<Var> Sentences(Tape& t, const PaddedSentences& side) const;
  Var Logits(Tape& t, const Batch& batch) const;  // [batch x classes]
  Var Loss(Tape& t, const Batch& batch) const;
  // Class probabilities per example with dropout off.
  std::vector<std::vector<double>> Predict(const Batch& batch) const;

  // Arc scores, marginals and the maximum-score tree of one sentence.
  // Usage error unless the encoder scores arcs (latent trees).
  TreeAnalysis AnalyzeTree(std::span<const std::size_t> ids) const;
  bool scores_arcs() const;

 private:
  Var Embed(Tape& t, std::span<const std::size_t> ids) const;

  ModelShape shape_;
  Parameter* embeddings_;
  SentenceEncoder encoder_;
  ClassifierHead head_;
};

}  // namespace rnsx

#endif  // RNSX_MODEL_H_
