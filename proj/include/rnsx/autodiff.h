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

// Reverse-mode differentiation over rnsx::Tensor.
//
// A Tape records every operation in creation order, which is a topological
// order by construction. Var is a light handle (tape pointer + node id).
// Parameters live in a ParameterStore that outlives any tape; Tape::Backward
// adds the gradient of each parameter leaf into Parameter::grad.

#ifndef RNSX_AUTODIFF_H_
#define RNSX_AUTODIFF_H_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rnsx/tensor.h"

namespace rnsx {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  // Names are unique; adding an existing name is a usage error.
  Parameter& Add(const std::string& name, Tensor init);
  Parameter* Find(const std::string& name);
  const Parameter* Find(const std::string& name) const;
  Parameter& Get(const std::string& name);

  std::span<const std::unique_ptr<Parameter>> all() const { return params_; }
  std::size_t size() const { return params_.size(); }
  std::size_t NumValues() const;
  void ZeroGrad();

  // Copies values from `other` for every matching name and shape.
  void CopyValuesFrom(const ParameterStore& other);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, Parameter*> index_;
};

class Tape;

class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  // Receives the tape and the gradient flowing into the node's output.
  using BackwardFn = std::function<void(Tape&, const Tensor&)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Constant(Tensor value);
  // One leaf per parameter per tape; repeated calls return the same node.
  Var Param(Parameter& p);
  Var Record(Tensor value, std::span<const Var> inputs, BackwardFn backward,
             const char* op);

  // Populates gradients for every node reachable from `loss` (shape [1]) and
  // accumulates parameter gradients into Parameter::grad.
  void Backward(Var loss);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& grad(std::size_t id) const { return nodes_[id].grad; }
  const Tensor& grad(Var v) const { return nodes_[v.id()].grad; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  const char* op(std::size_t id) const { return nodes_[id].op; }
  std::size_t size() const { return nodes_.size(); }

  // Adds `g` into the gradient of node `id` if it requires one.
  void Accumulate(std::size_t id, const Tensor& g);
  // Mutable gradient buffer (zero-initialized on first use).
  Tensor& GradBuffer(std::size_t id);

  // Name and index of the first node whose value is not finite.
  std::optional<std::pair<std::size_t, std::string>> FirstNonFinite() const;

  bool training() const { return training_; }
  void set_training(bool t) { training_ = t; }
  std::mt19937_64& rng() { return rng_; }
  void Seed(std::uint64_t seed) { rng_.seed(seed); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
    const char* op = "";
  };
  std::deque<Node> nodes_;
  std::unordered_map<Parameter*, std::size_t> param_nodes_;
  bool training_ = false;
  std::mt19937_64 rng_{0};
};

// ---- differentiable operations -------------------------------------------

Var MatMul(Var a, Var b);
// Binary ops take equal shapes, or a matrix and a trailing vector broadcast
// across its rows.
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);
Var Scale(Var a, double c);
Var Tanh(Var a);
Var Relu(Var a);  // subgradient at 0 is 0
Var Sigmoid(Var a);
Var Exp(Var a);
Var Log(Var a);   // domain error on non-positive input
Var Abs(Var a);
Var Clamp(Var a, double lo, double hi);

// Reductions. axis 0 on a matrix reduces over rows, giving one value per
// column. Max routes gradient to the lowest-index argmax.
Var Sum(Var a, std::size_t axis);
Var Max(Var a, std::size_t axis);
Var SumAll(Var a);

Var Softmax(Var a, std::size_t axis);
Var LogSoftmax(Var a, std::size_t axis);

Var Inverse(Var a);
// log det(A); A must have positive determinant.
Var LogDet(Var a);

Var Concat(std::span<const Var> parts, std::size_t axis);
Var Concat(std::initializer_list<Var> parts, std::size_t axis);
Var Slice(Var a, std::size_t axis, std::size_t begin, std::size_t end);
Var Transpose(Var a);
Var Reshape(Var a, Shape shape);
// Rows of a matrix (or elements of a vector) selected by index, repeats
// allowed; gradient is scatter-added.
Var GatherRows(Var a, std::span<const std::size_t> indices);
// Inverted dropout; identity when the tape is not in training mode.
Var Dropout(Var a, double rate);

inline Var operator+(Var a, Var b) { return Add(a, b); }
inline Var operator-(Var a, Var b) { return Sub(a, b); }
inline Var operator*(Var a, Var b) { return Mul(a, b); }

// ---- gradient checking ---------------------------------------------------

inline constexpr double kDefaultFdStepsArray[] = {1e-4, 1e-5, 1e-6};
inline constexpr std::span<const double> kDefaultFdSteps = kDefaultFdStepsArray;
// Entries where both gradients are below this (times max(1, |loss|)) count
// as agreeing. Central-difference roundoff at step 1e-4 is about
// 1e-16 |loss| / 1e-4 = 1e-12 |loss|, which is already 1e-4 of a gradient
// of 1e-8 |loss|; smaller entries cannot be resolved to that precision.
inline constexpr double kFdZeroGradient = 1e-8;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t zero_entries = 0;  // entries settled by the zero floor
};

using LossFn = std::function<Var(Tape&)>;

// Compares analytic parameter gradients of `loss` with central differences.
// Per entry the error is |a - n| / (|a| + |n| + 1e-12), minimized over the
// step sizes in `eps`; the result is the maximum over all entries.
GradCheckResult FiniteDifferenceCheck(
    const LossFn& loss, std::span<Parameter* const> params,
    std::span<const double> eps = kDefaultFdSteps);
GradCheckResult FiniteDifferenceCheck(
    const LossFn& loss, ParameterStore& store,
    std::span<const double> eps = kDefaultFdSteps);


}  // namespace rnsx

#endif  // RNSX_AUTODIFF_H_
