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

#ifndef RNSX_OPTIM_H_
#define RNSX_OPTIM_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rnsx/autodiff.h"

namespace rnsx {

enum class OptimizerKind { kAdam, kAdagrad };

std::string OptimizerName(OptimizerKind k);
OptimizerKind ParseOptimizer(const std::string& s);
// 1e-4 for Adam, 0.01 for Adagrad.
double DefaultLearningRate(OptimizerKind k);

// Per-parameter accumulators. Adam uses both moments, Adagrad only
// `second` (the running sum of squared gradients).
struct OptimizerState {
  std::vector<Tensor> first;
  std::vector<Tensor> second;
  std::size_t step = 0;
};

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam. `params` and `grads` pair up by index; the state is
// sized on first use and must match afterwards.
void AdamStep(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
              OptimizerState& state, const AdamOptions& options = {});
// x -= lr * g / sqrt(G + eps), G the accumulated squared gradients.
void AdagradStep(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
                 OptimizerState& state, double lr = 0.01, double eps = 1e-8);

// Scales all gradients so their joint L2 norm is at most max_norm; returns
// the norm before scaling.
double ClipGradientNorm(ParameterStore& store, double max_norm);

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr) : kind_(kind), lr_(lr) {}
  // Applies one update from Parameter::grad, then zeroes the gradients.
  void Step(ParameterStore& store);
  const OptimizerState& state() const { return state_; }

 private:
  OptimizerKind kind_;
  double lr_;
  OptimizerState state_;
};

}  // namespace rnsx

#endif  // RNSX_OPTIM_H_
