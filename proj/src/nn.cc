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

#include "rnsx/nn.h"

#include <algorithm>
#include <cmath>

#include "rnsx/error.h"

namespace rnsx {

Tensor GlorotUniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> u(-s, s);
  Tensor t({fan_in, fan_out});
  for (auto& v : t.data()) v = u(rng);
  return t;
}

Linear::Linear(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out,
               std::mt19937_64& rng, bool bias)
    : in_(in), out_(out) {
  w_ = &store.Add(name + ".w", GlorotUniform(in, out, rng));
  if (bias) b_ = &store.Add(name + ".b", Tensor({out}));
}

Var Linear::Forward(Tape& t, Var x) const {
  if (x.value().rank() != 2 || x.value().cols() != in_) {
    Fail(ErrorKind::kDimension, "linear layer expects width " + std::to_string(in_) + ", got " +
                                    ShapeString(x.shape()));
  }
  Var y = MatMul(x, t.Param(*w_));
  return b_ ? Add(y, t.Param(*b_)) : y;
}

Mlp::Mlp(ParameterStore& store, const std::string& name, std::size_t in, std::size_t width,
         std::size_t layers, std::mt19937_64& rng)
    : in_(in), width_(width) {
  if (layers == 0 || in == 0 || width == 0) Fail(ErrorKind::kUsage, "empty MLP " + name);
  for (std::size_t k = 0; k < layers; ++k) {
    layers_.emplace_back(store, name + ".l" + std::to_string(k), k == 0 ? in : width, width, rng);
  }
  if (in != width) {
    projection_ = Linear(store, name + ".proj", in, width, rng, /*bias=*/false);
    has_projection_ = true;
  }
}

Var Mlp::Forward(Tape& t, Var x) const {
  Var h = x;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    Var act = Relu(layers_[k].Forward(t, h));
    Var residual = (k == 0 && has_projection_) ? projection_.Forward(t, h) : h;
    h = Add(act, residual);
  }
  return h;
}

LstmCell::LstmCell(ParameterStore& store, const std::string& name, std::size_t in,
                   std::size_t hidden, std::mt19937_64& rng)
    : in_(in), hidden_(hidden) {
  wx_ = &store.Add(name + ".wx", GlorotUniform(in, 4 * hidden, rng));
  wh_ = &store.Add(name + ".wh", GlorotUniform(hidden, 4 * hidden, rng));
  Tensor b({4 * hidden});
  for (std::size_t i = hidden; i < 2 * hidden; ++i) b[i] = 1.0;  // forget gate
  b_ = &store.Add(name + ".b", std::move(b));
}

Var LstmCell::ProjectInput(Tape& t, Var x) const {
  if (x.value().rank() != 2 || x.value().cols() != in_) {
    Fail(ErrorKind::kDimension, "LSTM expects input width " + std::to_string(in_) + ", got " +
                                    ShapeString(x.shape()));
  }
  return Add(MatMul(x, t.Param(*wx_)), t.Param(*b_));
}

LstmCell::State LstmCell::StepProjected(Tape& t, Var projected, const State& prev) const {
  std::size_t h = hidden_;
  Var gates = Add(projected, MatMul(prev.h, t.Param(*wh_)));
  Var i = Sigmoid(Slice(gates, 1, 0, h));
  Var f = Sigmoid(Slice(gates, 1, h, 2 * h));
  Var g = Tanh(Slice(gates, 1, 2 * h, 3 * h));
  Var o = Sigmoid(Slice(gates, 1, 3 * h, 4 * h));
  Var c = Add(Mul(f, prev.c), Mul(i, g));
  return {Mul(o, Tanh(c)), c};
}

LstmCell::State LstmCell::Step(Tape& t, Var x, const State& prev) const {
  return StepProjected(t, ProjectInput(t, x), prev);
}

LstmCell::State LstmCell::Zero(Tape& t, std::size_t rows) const {
  return {t.Constant(Tensor({rows, hidden_})), t.Constant(Tensor({rows, hidden_}))};
}

BiLstm::BiLstm(ParameterStore& store, const std::string& name, std::size_t in,
               std::size_t hidden, std::mt19937_64& rng)
    : fwd_(store, name + ".fwd", in, hidden, rng), bwd_(store, name + ".bwd", in, hidden, rng) {}

Var BiLstm::Run(Tape& t, Var x, const LstmCell& cell, bool reverse) const {
  std::size_t n = x.value().rows();
  Var proj = cell.ProjectInput(t, x);
  LstmCell::State s = cell.Zero(t, 1);
  std::vector<Var> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pos = reverse ? n - 1 - k : k;
    s = cell.StepProjected(t, Slice(proj, 0, pos, pos + 1), s);
    out[pos] = s.h;
  }
  return Concat(out, 0);
}

// Runs all sentences in lock-step; sentence b consumes its position
// (reverse ? len-1-k : k) at step k and is fed zeros once exhausted. Rows of
// every op are independent, so each sentence sees exactly the arithmetic of
// an unbatched run.
std::vector<Var> BiLstm::RunBatch(Tape& t, std::span<const Var> xs, const LstmCell& cell,
                                  bool reverse) const {
  const std::size_t batch = xs.size();
  std::vector<Var> proj(batch);
  std::size_t longest = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    proj[b] = cell.ProjectInput(t, xs[b]);
    longest = std::max(longest, xs[b].value().rows());
  }
  const Var pad = t.Constant(Tensor({1, 4 * cell.hidden()}));
  std::vector<std::vector<Var>> out(batch);
  for (std::size_t b = 0; b < batch; ++b) out[b].resize(xs[b].value().rows());
  LstmCell::State s = cell.Zero(t, batch);
  std::vector<Var> rows(batch);
  for (std::size_t k = 0; k < longest; ++k) {
    for (std::size_t b = 0; b < batch; ++b) {
      std::size_t n = out[b].size();
      std::size_t pos = reverse ? n - 1 - k : k;
      rows[b] = k < n ? Slice(proj[b], 0, pos, pos + 1) : pad;
    }
    s = cell.StepProjected(t, batch == 1 ? rows[0] : Concat(rows, 0), s);
    for (std::size_t b = 0; b < batch; ++b) {
      std::size_t n = out[b].size();
      if (k >= n) continue;
      out[b][reverse ? n - 1 - k : k] = batch == 1 ? s.h : Slice(s.h, 0, b, b + 1);
    }
  }
  std::vector<Var> res(batch);
  for (std::size_t b = 0; b < batch; ++b) res[b] = Concat(out[b], 0);
  return res;
}

std::vector<Var> BiLstm::ForwardBatch(Tape& t, std::span<const Var> xs) const {
  for (const Var& x : xs) {
    if (x.value().rank() != 2 || x.value().rows() == 0) {
      Fail(ErrorKind::kDimension, "BiLSTM needs non-empty [n x d] inputs, got " +
                                      ShapeString(x.shape()));
    }
  }
  std::vector<Var> f = RunBatch(t, xs, fwd_, false);
  std::vector<Var> b = RunBatch(t, xs, bwd_, true);
  for (std::size_t i = 0; i < xs.size(); ++i) f[i] = Concat({f[i], b[i]}, 1);
  return f;
}

Var BiLstm::Forward(Tape& t, Var x) const {
  if (x.value().rank() != 2 || x.value().rows() == 0) {
    Fail(ErrorKind::kDimension, "BiLSTM needs a non-empty [n x d] input, got " +
                                    ShapeString(x.shape()));
  }
  return Concat({Run(t, x, fwd_, false), Run(t, x, bwd_, true)}, 1);
}

}  // namespace rnsx
