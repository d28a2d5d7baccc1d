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

#ifndef RNSX_NN_H_
#define RNSX_NN_H_

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rnsx/autodiff.h"

namespace rnsx {

// Uniform(-s, s) with s = sqrt(6 / (fan_in + fan_out)).
Tensor GlorotUniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng);

class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out,
         std::mt19937_64& rng, bool bias = true);
  // x: [rows x in] -> [rows x out]
  Var Forward(Tape& t, Var x) const;
  std::size_t in() const { return in_; }
  std::size_t out() const { return out_; }

 private:
  Parameter* w_ = nullptr;
  Parameter* b_ = nullptr;
  std::size_t in_ = 0, out_ = 0;
};

// ReLU MLP of `layers` equal-width hidden layers with residual connections.
// Layer k computes relu(x W_k + b_k) + r(x), where r is the identity when
// widths agree and a learned projection on the first layer otherwise. The
// output is the last hidden layer.
class Mlp {
 public:
  Mlp() = default;
  Mlp(ParameterStore& store, const std::string& name, std::size_t in, std::size_t width,
      std::size_t layers, std::mt19937_64& rng);
  Var Forward(Tape& t, Var x) const;
  std::size_t in() const { return in_; }
  std::size_t out() const { return width_; }

 private:
  std::vector<Linear> layers_;
  Linear projection_;  // unused when in == width
  bool has_projection_ = false;
  std::size_t in_ = 0, width_ = 0;
};

// Gates ordered input, forget, cell, output.
class LstmCell {
 public:
  struct State {
    Var h;  // [rows x hidden]
    Var c;
  };

  LstmCell() = default;
  LstmCell(ParameterStore& store, const std::string& name, std::size_t in, std::size_t hidden,
           std::mt19937_64& rng);
  State Step(Tape& t, Var x, const State& prev) const;
  // Step with a precomputed input projection x W_x + b ([rows x 4 hidden]).
  State StepProjected(Tape& t, Var projected, const State& prev) const;
  Var ProjectInput(Tape& t, Var x) const;
  State Zero(Tape& t, std::size_t rows) const;
  std::size_t in() const { return in_; }
  std::size_t hidden() const { return hidden_; }

 private:
  Parameter* wx_ = nullptr;
  Parameter* wh_ = nullptr;
  Parameter* b_ = nullptr;
  std::size_t in_ = 0, hidden_ = 0;
};

class BiLstm {
 public:
  BiLstm() = default;
  BiLstm(ParameterStore& store, const std::string& name, std::size_t in, std::size_t hidden,
         std::mt19937_64& rng);
  // x: [n x in] -> [n x 2 hidden], forward states then backward states.
  Var Forward(Tape& t, Var x) const;
  // Several sentences at once; outputs equal per-sentence Forward exactly.
  std::vector<Var> ForwardBatch(Tape& t, std::span<const Var> xs) const;
  std::size_t hidden() const { return fwd_.hidden(); }

 private:
  std::vector<Var> RunBatch(Tape& t, std::span<const Var> xs, const LstmCell& cell,
                            bool reverse) const;
  Var Run(Tape& t, Var x, const LstmCell& cell, bool reverse) const;
  LstmCell fwd_, bwd_;
};

}  // namespace rnsx

#endif  // RNSX_NN_H_
