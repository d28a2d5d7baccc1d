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

#include "rnsx/struct_inference.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>

#include "rnsx/error.h"

namespace rnsx {

std::string RootModeName(RootMode mode) {
  return mode == RootMode::kSingleRoot ? "single-root" : "multi-root";
}

RootMode ParseRootMode(const std::string& name) {
  if (name == "multi-root" || name == "multi_root" || name == "multi") return RootMode::kMultiRoot;
  if (name == "single-root" || name == "single_root" || name == "single") return RootMode::kSingleRoot;
  Fail(ErrorKind::kUsage, "unknown root mode '" + name + "'");
}

namespace {

std::size_t CheckPotentialShape(const Tensor& psi) {
  if (psi.rank() != 2 || psi.shape()[0] != psi.shape()[1] + 1) {
    Fail(ErrorKind::kDimension, "arc matrix must be [n+1 x n], got " + ShapeString(psi.shape()));
  }
  if (psi.shape()[1] == 0) Fail(ErrorKind::kDimension, "tree inference on empty sentence");
  return psi.shape()[1];
}

Tensor ArcMask(std::size_t n) {
  Tensor m({n + 1, n}, 1.0);
  for (std::size_t h = 1; h <= n; ++h) m(h, h - 1) = 0.0;
  return m;
}

struct LaplacianParts {
  Var root;   // [n]   potentials of root arcs
  Var inner;  // [n,n] word-to-word potentials, zero diagonal
  Var lap;
};

LaplacianParts Laplacian(Var psi, RootMode mode) {
  std::size_t n = CheckPotentialShape(psi.value());
  Tape& t = *psi.tape();
  Var masked = Mul(psi, t.Constant(ArcMask(n)));
  Var root = Reshape(Slice(masked, 0, 0, 1), {n});
  Var inner = Slice(masked, 0, 1, n + 1);
  Var eye = t.Constant(Tensor::Identity(n));
  if (mode == RootMode::kMultiRoot) {
    // L[m][m] = sum over all heads of psi(h,m); L[h][m] = -psi(h,m).
    Var diag = Mul(eye, Sum(masked, 0));
    return {root, inner, Sub(diag, inner)};
  }
  // Single root: word-only Laplacian with its first row replaced by the root
  // potentials.
  Var diag = Mul(eye, Sum(inner, 0));
  Var words = Sub(diag, inner);
  Tensor keep({n, n}, 1.0), first({n, n}, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    keep(0, c) = 0.0;
    first(0, c) = 1.0;
  }
  Var lap = Add(Mul(words, t.Constant(std::move(keep))), Mul(t.Constant(std::move(first)), root));
  return {root, inner, lap};
}

template <typename F>
auto AsDegenerate(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const SingularMatrixError& e) {
    Fail(ErrorKind::kDegenerate, std::string("degenerate tree distribution: ") + e.what());
  }
}

}  // namespace

Var BuildLaplacian(Var psi, RootMode mode) { return Laplacian(psi, mode).lap; }

Var LogPartition(Var psi, RootMode mode) {
  return AsDegenerate([&] { return LogDet(Laplacian(psi, mode).lap); });
}

// Marginals do not change when every potential into one modifier is scaled
// by a common factor, nor (single root) when all root potentials are. Both
// rescalings are applied before the inverse so that potentials spanning many
// orders of magnitude still give a well-scaled Laplacian. The factors are
// constants; the gradient along a scaling direction is zero anyway.
Var TreeMarginals(Var psi, RootMode mode) {
  std::size_t n = CheckPotentialShape(psi.value());
  Tape& t = *psi.tape();
  const Tensor& v = psi.value();
  Tensor factor({n + 1, n}, 1.0);
  for (std::size_t m = 0; m < n; ++m) {
    double top = 0.0;
    for (std::size_t h = 0; h <= n; ++h) {
      if (h != m + 1) top = std::max(top, v(h, m));
    }
    if (top > 0.0 && std::isfinite(top)) {
      for (std::size_t h = 0; h <= n; ++h) factor(h, m) = 1.0 / top;
    }
  }
  if (mode == RootMode::kSingleRoot) {
    double top = 0.0;
    for (std::size_t m = 0; m < n; ++m) top = std::max(top, v(0, m) * factor(0, m));
    if (top > 0.0 && std::isfinite(top)) {
      for (std::size_t m = 0; m < n; ++m) factor(0, m) /= top;
    }
  }
  psi = Mul(psi, t.Constant(std::move(factor)));
  LaplacianParts parts = Laplacian(psi, mode);
  Var inv = AsDegenerate([&] { return Inverse(parts.lap); });
  Var inv_t = Transpose(inv);
  Var eye = t.Constant(Tensor::Identity(n));
  Var diag = Sum(Mul(inv, eye), 0);  // diag[m] = inv[m][m]
  Var root_marg, inner_marg;
  if (mode == RootMode::kMultiRoot) {
    // p(0->m) = psi(0,m) inv[m][m];  p(h->m) = psi(h,m) (inv[m][m] - inv[m][h])
    root_marg = Mul(parts.root, diag);
    inner_marg = Mul(parts.inner, Scale(Sub(inv_t, diag), -1.0));
  } else {
    // p(0->m) = psi(0,m) inv[m][1]
    // p(h->m) = psi(h,m) ([m != 1] inv[m][m] - [h != 1] inv[m][h])
    root_marg = Mul(parts.root, Reshape(Slice(inv_t, 0, 0, 1), {n}));
    Tensor col_keep({n}, 1.0);
    col_keep[0] = 0.0;
    Tensor row_keep({n, n}, 1.0);
    for (std::size_t c = 0; c < n; ++c) row_keep(0, c) = 0.0;
    Var d = Mul(diag, t.Constant(std::move(col_keep)));
    Var off = Mul(t.Constant(std::move(row_keep)), inv_t);
    inner_marg = Mul(parts.inner, Scale(Sub(off, d), -1.0));
  }
  Var marg = Concat({Reshape(root_marg, {1, n}), inner_marg}, 0);
  // Every modifier has exactly one head. A column sum away from 1 means the
  // inverse lost its precision even though no pivot fell below tolerance.
  const Tensor& p = marg.value();
  for (std::size_t m = 0; m < n; ++m) {
    double sum = 0.0;
    for (std::size_t h = 0; h <= n; ++h) sum += p(h, m);
    if (!(std::abs(sum - 1.0) <= kMarginalSumTolerance)) {
      Fail(ErrorKind::kDegenerate, "degenerate tree distribution: marginals into word " +
                                       std::to_string(m + 1) + " sum to " +
                                       std::to_string(sum) + " (ill-conditioned Laplacian)");
    }
  }
  return marg;
}

Tensor BuildLaplacian(const EdgePotentials& psi, RootMode mode) {
  Tape t;
  return BuildLaplacian(t.Constant(psi.psi), mode).value();
}

double LogPartition(const EdgePotentials& psi, RootMode mode) {
  Tape t;
  return LogPartition(t.Constant(psi.psi), mode).value().Item();
}

MarginalMatrix TreeMarginals(const EdgePotentials& psi, RootMode mode) {
  Tape t;
  return {TreeMarginals(t.Constant(psi.psi), mode).value()};
}

// ---- validity and enumeration ----------------------------------------------

bool IsValidTree(std::span<const int> heads, RootMode mode) {
  const int n = static_cast<int>(heads.size());
  if (n == 0) return false;
  int root_children = 0;
  for (int m = 1; m <= n; ++m) {
    int h = heads[m - 1];
    if (h < 0 || h > n || h == m) return false;
    if (h == 0) ++root_children;
  }
  if (mode == RootMode::kSingleRoot && root_children != 1) return false;
  for (int m = 1; m <= n; ++m) {
    int cur = m;
    for (int steps = 0; cur != 0; ++steps) {
      if (steps > n) return false;
      cur = heads[cur - 1];
    }
  }
  return true;
}

void ValidateTree(const DependencyTree& t) {
  if (!IsValidTree(t.heads)) {
    std::string s;
    for (int h : t.heads) s += (s.empty() ? "" : ",") + std::to_string(h);
    Fail(ErrorKind::kFormat, "invalid dependency tree [" + s + "]");
  }
}

void ForEachTree(std::size_t n, RootMode mode,
                 const std::function<void(const DependencyTree&)>& visit) {
  if (n == 0) Fail(ErrorKind::kUsage, "enumeration needs n >= 1");
  if (n > kMaxEnumerationLength) {
    Fail(ErrorKind::kUsage, "refusing to enumerate trees for n = " + std::to_string(n) +
                                " (limit " + std::to_string(kMaxEnumerationLength) + ")");
  }
  DependencyTree t{std::vector<int>(n, -1)};
  const int N = static_cast<int>(n);
  int root_children = 0;
  // Assign heads left to right; reject an assignment as soon as it closes a
  // cycle among already-assigned words.
  std::function<void(int)> rec = [&](int m) {
    if (m > N) {
      if (mode == RootMode::kSingleRoot && root_children != 1) return;
      visit(t);
      return;
    }
    for (int h = 0; h <= N; ++h) {
      if (h == m) continue;
      if (h == 0 && mode == RootMode::kSingleRoot && root_children == 1) continue;
      t.heads[m - 1] = h;
      bool cycle = false;
      for (int cur = h, steps = 0; cur != 0 && cur <= m; ++steps) {
        if (cur == m || steps > N) {
          cycle = true;
          break;
        }
        cur = t.heads[cur - 1];
      }
      if (!cycle) {
        if (h == 0) ++root_children;
        rec(m + 1);
        if (h == 0) --root_children;
      }
    }
    t.heads[m - 1] = -1;
  };
  // Every cycle is caught when its highest-numbered word is assigned.
  rec(1);
}

std::vector<DependencyTree> EnumerateTrees(std::size_t n, RootMode mode) {
  std::vector<DependencyTree> out;
  ForEachTree(n, mode, [&](const DependencyTree& t) {
    if (IsValidTree(t.heads, mode)) out.push_back(t);
  });
  return out;
}

MarginalMatrix MarginalsFromTree(const DependencyTree& t) {
  ValidateTree(t);
  std::size_t n = t.size();
  Tensor p({n + 1, n});
  for (std::size_t m = 1; m <= n; ++m) p(static_cast<std::size_t>(t.head(m)), m - 1) = 1.0;
  return {p};
}

// ---- Chu-Liu-Edmonds -------------------------------------------------------

namespace {

using Matrix = std::vector<std::vector<double>>;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// w[h][v] over nodes 0..N-1 with node 0 the root. Returns heads (head[0] = -1).
std::vector<int> ChuLiuEdmonds(const Matrix& w) {
  const int N = static_cast<int>(w.size());
  std::vector<int> head(N, -1);
  for (int v = 1; v < N; ++v) {
    int best = -1;
    for (int u = 0; u < N; ++u) {
      if (u == v) continue;
      if (best < 0 || w[u][v] > w[best][v]) best = u;
    }
    head[v] = best;
  }
  // Look for a cycle in the greedy graph.
  std::vector<int> color(N, 0);  // 0 unvisited, 1 on current path, 2 done
  std::vector<int> cycle;
  for (int s = 1; s < N && cycle.empty(); ++s) {
    if (color[s]) continue;
    std::vector<int> path;
    int v = s;
    while (v > 0 && color[v] == 0) {
      color[v] = 1;
      path.push_back(v);
      v = head[v];
    }
    if (v > 0 && color[v] == 1) {
      auto it = std::find(path.begin(), path.end(), v);
      cycle.assign(it, path.end());
    }
    for (int p : path) color[p] = 2;
  }
  if (cycle.empty()) return head;

  std::vector<char> in_cycle(N, 0);
  for (int v : cycle) in_cycle[v] = 1;
  std::vector<int> new_id(N, -1), old_of;
  for (int v = 0; v < N; ++v) {
    if (in_cycle[v]) continue;
    new_id[v] = static_cast<int>(old_of.size());
    old_of.push_back(v);
  }
  const int c = static_cast<int>(old_of.size());
  const int M = c + 1;
  Matrix w2(M, std::vector<double>(M, kNegInf));
  std::vector<int> enter_to(M, -1);   // for arcs u -> cycle: which cycle node
  std::vector<int> leave_from(M, -1); // for arcs cycle -> v: which cycle node
  for (int u = 0; u < N; ++u) {
    if (in_cycle[u]) continue;
    for (int v = 0; v < N; ++v) {
      if (u == v) continue;
      if (!in_cycle[v]) {
        if (v != 0) w2[new_id[u]][new_id[v]] = w[u][v];
        continue;
      }
      double s = w[u][v] - w[head[v]][v];
      if (enter_to[new_id[u]] < 0 || s > w2[new_id[u]][c]) {
        w2[new_id[u]][c] = s;
        enter_to[new_id[u]] = v;
      }
    }
  }
  for (int v = 1; v < N; ++v) {
    if (in_cycle[v]) continue;
    for (int u : cycle) {
      if (leave_from[new_id[v]] < 0 || w[u][v] > w2[c][new_id[v]]) {
        w2[c][new_id[v]] = w[u][v];
        leave_from[new_id[v]] = u;
      }
    }
  }
  std::vector<int> sub = ChuLiuEdmonds(w2);
  std::vector<int> out = head;  // cycle arcs kept except the broken one
  for (int v2 = 1; v2 < M; ++v2) {
    int h2 = sub[v2];
    if (v2 == c) {
      int u = old_of[h2];
      out[enter_to[h2]] = u;
    } else {
      int v = old_of[v2];
      out[v] = (h2 == c) ? leave_from[v2] : old_of[h2];
    }
  }
  return out;
}

Matrix FullMatrix(const Tensor& scores) {
  std::size_t n = scores.cols();
  Matrix w(n + 1, std::vector<double>(n + 1, kNegInf));
  for (std::size_t h = 0; h <= n; ++h)
    for (std::size_t m = 1; m <= n; ++m)
      if (h != m) w[h][m] = scores(h, m - 1);
  return w;
}

DependencyTree FromHeads(const std::vector<int>& heads) {
  return DependencyTree{std::vector<int>(heads.begin() + 1, heads.end())};
}

}  // namespace

double TreeScore(const Tensor& scores, const DependencyTree& tree) {
  double s = 0.0;
  for (std::size_t m = 1; m <= tree.size(); ++m)
    s += scores(static_cast<std::size_t>(tree.head(m)), m - 1);
  return s;
}

DependencyTree CleDecode(const Tensor& scores, RootMode mode) {
  std::size_t n = CheckPotentialShape(scores);
  if (!scores.AllFinite()) Fail(ErrorKind::kDomain, "CLE decoding needs finite scores");
  Matrix w = FullMatrix(scores);
  DependencyTree best = FromHeads(ChuLiuEdmonds(w));
  if (mode == RootMode::kMultiRoot) return best;
  auto root_children = std::count(best.heads.begin(), best.heads.end(), 0);
  if (root_children == 1) return best;
  // Retry with each word as the only root child.
  double best_score = kNegInf;
  for (std::size_t r = 1; r <= n; ++r) {
    Matrix wr = w;
    for (std::size_t m = 1; m <= n; ++m)
      if (m != r) wr[0][m] = kNegInf;
    DependencyTree t = FromHeads(ChuLiuEdmonds(wr));
    double s = TreeScore(scores, t);
    if (s > best_score) {
      best_score = s;
      best = t;
    }
  }
  return best;
}

void WriteArcMatrixTsv(std::ostream& os, const Tensor& arcs) {
  std::size_t n = CheckPotentialShape(arcs);
  os << "head";
  for (std::size_t m = 1; m <= n; ++m) os << '\t' << m;
  os << '\n';
  os << std::setprecision(17);
  for (std::size_t h = 0; h <= n; ++h) {
    os << h;
    for (std::size_t m = 1; m <= n; ++m) os << '\t' << arcs(h, m - 1);
    os << '\n';
  }
}

}  // namespace rnsx
