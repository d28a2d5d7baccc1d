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

#include "rnsx/optim.h"

#include <cmath>

#include "rnsx/error.h"

namespace rnsx {

std::string OptimizerName(OptimizerKind k) { return k == OptimizerKind::kAdam ? "adam" : "adagrad"; }

OptimizerKind ParseOptimizer(const std::string& s) {
  if (s == "adam") return OptimizerKind::kAdam;
  if (s == "adagrad") return OptimizerKind::kAdagrad;
  Fail(ErrorKind::kUsage, "unknown optimizer '" + s + "' (expected adam or adagrad)");
}

double DefaultLearningRate(OptimizerKind k) { return k == OptimizerKind::kAdam ? 1e-4 : 0.01; }

namespace {

void Prepare(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
             std::vector<Tensor>& slots) {
  if (params.size() != grads.size()) {
    Fail(ErrorKind::kDimension, "optimizer got " + std::to_string(params.size()) +
                                    " parameters and " + std::to_string(grads.size()) +
                                    " gradients");
  }
  if (slots.empty()) {
    for (const Tensor* p : params) slots.emplace_back(p->shape());
  }
  if (slots.size() != params.size()) Fail(ErrorKind::kDimension, "optimizer state size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->shape() != grads[i]->shape() || slots[i].shape() != params[i]->shape()) {
      Fail(ErrorKind::kDimension, "optimizer shape mismatch: parameter " +
                                      ShapeString(params[i]->shape()) + ", gradient " +
                                      ShapeString(grads[i]->shape()));
    }
  }
}

}  // namespace

void AdamStep(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
              OptimizerState& state, const AdamOptions& o) {
  Prepare(params, grads, state.first);
  Prepare(params, grads, state.second);
  ++state.step;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto x = params[i]->data();
    auto g = grads[i]->data();
    auto m = state.first[i].data();
    auto v = state.second[i].data();
    for (std::size_t k = 0; k < x.size(); ++k) {
      m[k] = o.beta1 * m[k] + (1.0 - o.beta1) * g[k];
      v[k] = o.beta2 * v[k] + (1.0 - o.beta2) * g[k] * g[k];
      x[k] -= o.lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + o.eps);
    }
  }
}

void AdagradStep(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
                 OptimizerState& state, double lr, double eps) {
  Prepare(params, grads, state.second);
  ++state.step;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto x = params[i]->data();
    auto g = grads[i]->data();
    auto acc = state.second[i].data();
    for (std::size_t k = 0; k < x.size(); ++k) {
      acc[k] += g[k] * g[k];
      x[k] -= lr * g[k] / std::sqrt(acc[k] + eps);
    }
  }
}

double ClipGradientNorm(ParameterStore& store, double max_norm) {
  double sq = 0.0;
  for (const auto& p : store.all())
    for (double g : p->grad.data()) sq += g * g;
  double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    double s = max_norm / norm;
    for (const auto& p : store.all())
      for (double& g : p->grad.data()) g *= s;
  }
  return norm;
}

void Optimizer::Step(ParameterStore& store) {
  std::vector<Tensor*> params;
  std::vector<const Tensor*> grads;
  for (const auto& p : store.all()) {
    params.push_back(&p->value);
    grads.push_back(&p->grad);
  }
  if (kind_ == OptimizerKind::kAdam) {
    AdamOptions o;
    o.lr = lr_;
    AdamStep(params, grads, state_, o);
  } else {
    AdagradStep(params, grads, state_, lr_);
  }
  store.ZeroGrad();
}

}  // namespace rnsx
