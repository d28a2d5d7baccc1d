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

// Edge-factored distributions over dependency trees.
//
// Arc-indexed matrices use one layout throughout: shape [n+1 x n], row h is
// the head (0 = artificial root), column m-1 is modifier m. Entries where
// h == m are not arcs and are ignored (potentials) or zero (marginals).

#ifndef RNSX_STRUCT_INFERENCE_H_
#define RNSX_STRUCT_INFERENCE_H_

#include <cstddef>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rnsx/autodiff.h"
#include "rnsx/tensor.h"

namespace rnsx {

enum class RootMode { kMultiRoot, kSingleRoot };

std::string RootModeName(RootMode mode);
RootMode ParseRootMode(const std::string& name);

struct EdgePotentials {
  Tensor psi;  // strictly positive on arcs
  std::size_t n() const { return psi.cols(); }
};

struct MarginalMatrix {
  Tensor p;
  std::size_t n() const { return p.cols(); }
  double operator()(std::size_t h, std::size_t m) const { return p(h, m - 1); }
};

// heads[m-1] is the head of word m.
struct DependencyTree {
  std::vector<int> heads;
  std::size_t size() const { return heads.size(); }
  int head(std::size_t m) const { return heads[m - 1]; }
  bool operator==(const DependencyTree&) const = default;
};

// TreeMarginals raises a degenerate-distribution error when the marginals
// into some word do not sum to 1 within this tolerance.
inline constexpr double kMarginalSumTolerance = 1e-6;

// Differentiable forms operate on a [n+1 x n] potential matrix.
Var BuildLaplacian(Var psi, RootMode mode);
Var LogPartition(Var psi, RootMode mode);
Var TreeMarginals(Var psi, RootMode mode);

Tensor BuildLaplacian(const EdgePotentials& psi, RootMode mode);
double LogPartition(const EdgePotentials& psi, RootMode mode);
MarginalMatrix TreeMarginals(const EdgePotentials& psi, RootMode mode);

// Maximum-score arborescence over `scores` ([n+1 x n], log-potentials).
DependencyTree CleDecode(const Tensor& scores, RootMode mode);
double TreeScore(const Tensor& scores, const DependencyTree& tree);

bool IsValidTree(std::span<const int> heads, RootMode mode = RootMode::kMultiRoot);
inline bool IsValidTree(const DependencyTree& t, RootMode mode = RootMode::kMultiRoot) {
  return IsValidTree(t.heads, mode);
}
void ValidateTree(const DependencyTree& t);

inline constexpr std::size_t kMaxEnumerationLength = 8;

void ForEachTree(std::size_t n, RootMode mode,
                 const std::function<void(const DependencyTree&)>& visit);
std::vector<DependencyTree> EnumerateTrees(std::size_t n, RootMode mode);

MarginalMatrix MarginalsFromTree(const DependencyTree& t);

// Header row "head" then modifier indices 1..n; one row per head 0..n.
void WriteArcMatrixTsv(std::ostream& os, const Tensor& arcs);

}  // namespace rnsx

#endif  // RNSX_STRUCT_INFERENCE_H_
