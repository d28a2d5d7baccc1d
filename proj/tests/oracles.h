// Test-only oracles: exhaustive enumeration and finite differences that do
// not share code paths with the library implementations they check.

#ifndef RNSX_TESTS_ORACLES_H_
#define RNSX_TESTS_ORACLES_H_

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "rnsx/struct_inference.h"
#include "rnsx/tensor.h"

namespace oracle {

// Naive: every head assignment in [0..n]^n, kept if acyclic and rooted.
inline std::vector<std::vector<int>> AllTrees(int n, bool single_root) {
  std::vector<std::vector<int>> out;
  std::vector<int> heads(n, 0);
  while (true) {
    bool ok = true;
    int roots = 0;
    for (int m = 1; m <= n && ok; ++m) {
      if (heads[m - 1] == m) ok = false;
      if (heads[m - 1] == 0) ++roots;
    }
    if (ok && single_root && roots != 1) ok = false;
    for (int m = 1; m <= n && ok; ++m) {
      std::vector<char> seen(n + 1, 0);
      int cur = m;
      while (cur != 0) {
        if (seen[cur]) {
          ok = false;
          break;
        }
        seen[cur] = 1;
        cur = heads[cur - 1];
      }
    }
    if (ok) out.push_back(heads);
    int k = 0;
    while (k < n && ++heads[k] > n) heads[k++] = 0;
    if (k == n) break;
  }
  return out;
}

struct BruteResult {
  double log_z = 0.0;
  rnsx::Tensor marginals;  // [n+1 x n]
};

inline BruteResult BruteForce(const rnsx::Tensor& psi, bool single_root) {
  int n = static_cast<int>(psi.cols());
  auto trees = AllTrees(n, single_root);
  std::vector<double> logw;
  for (const auto& t : trees) {
    double lw = 0.0;
    for (int m = 1; m <= n; ++m) lw += std::log(psi(t[m - 1], m - 1));
    logw.push_back(lw);
  }
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : logw) mx = std::max(mx, v);
  double s = 0.0;
  for (double v : logw) s += std::exp(v - mx);
  BruteResult r;
  r.log_z = mx + std::log(s);
  r.marginals = rnsx::Tensor({static_cast<std::size_t>(n + 1), static_cast<std::size_t>(n)});
  for (std::size_t k = 0; k < trees.size(); ++k) {
    double p = std::exp(logw[k] - r.log_z);
    for (int m = 1; m <= n; ++m) r.marginals(trees[k][m - 1], m - 1) += p;
  }
  return r;
}

inline double BruteBestScore(const rnsx::Tensor& scores, bool single_root) {
  int n = static_cast<int>(scores.cols());
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& t : AllTrees(n, single_root)) {
    double s = 0.0;
    for (int m = 1; m <= n; ++m) s += scores(t[m - 1], m - 1);
    best = std::max(best, s);
  }
  return best;
}

inline rnsx::Tensor Random(rnsx::Shape shape, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  rnsx::Tensor t(std::move(shape));
  for (auto& v : t.data()) v = u(rng);
  return t;
}

// Central-difference gradient of a scalar function of one tensor.
inline rnsx::Tensor NumericGradient(const std::function<double(const rnsx::Tensor&)>& f,
                                    rnsx::Tensor x, double eps = 1e-6) {
  rnsx::Tensor g(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double orig = x[i];
    x[i] = orig + eps;
    double fp = f(x);
    x[i] = orig - eps;
    double fm = f(x);
    x[i] = orig;
    g[i] = (fp - fm) / (2 * eps);
  }
  return g;
}

inline double MaxRelErr(const rnsx::Tensor& a, const rnsx::Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]) / (std::abs(a[i]) + std::abs(b[i]) + 1e-12));
  return m;
}

}  // namespace oracle

#endif  // RNSX_TESTS_ORACLES_H_
