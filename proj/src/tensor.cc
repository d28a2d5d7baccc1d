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

#include "rnsx/tensor.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "rnsx/error.h"

namespace rnsx {

std::string ShapeString(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

std::size_t ShapeSize(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(ShapeSize(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (ShapeSize(shape_) != data_.size()) {
    Fail(ErrorKind::kDimension, "tensor shape " + ShapeString(shape_) +
                                    " does not match " +
                                    std::to_string(data_.size()) + " values");
  }
}

Tensor Tensor::Vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  std::size_t r = rows.size();
  std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) Fail(ErrorKind::kDimension, "ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

Tensor Tensor::Identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

Tensor Tensor::Reshaped(Shape shape) const {
  if (ShapeSize(shape) != size()) {
    Fail(ErrorKind::kDimension,
         "cannot reshape " + ShapeString(shape_) + " to " + ShapeString(shape));
  }
  return Tensor(std::move(shape), data_);
}

Tensor Tensor::Transposed() const {
  if (rank() != 2) Fail(ErrorKind::kDimension, "transpose needs a matrix");
  Tensor t({shape_[1], shape_[0]});
  for (std::size_t r = 0; r < shape_[0]; ++r)
    for (std::size_t c = 0; c < shape_[1]; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Tensor Tensor::Row(std::size_t r) const {
  std::size_t c = cols();
  return Tensor({c}, std::vector<double>(data_.begin() + r * c,
                                         data_.begin() + (r + 1) * c));
}

void Tensor::Fill(double v) { std::fill(data_.begin(), data_.end(), v); }

double Tensor::Item() const {
  if (data_.size() != 1) {
    Fail(ErrorKind::kDimension, "Item() on tensor of shape " + ShapeString(shape_));
  }
  return data_[0];
}

bool Tensor::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Tensor MatMul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0]) {
    Fail(ErrorKind::kDimension, "matmul shape mismatch: " +
                                    ShapeString(a.shape()) + " x " +
                                    ShapeString(b.shape()));
  }
  std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  Tensor c({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      double av = a(i, p);
      if (av == 0.0) continue;
      const double* brow = b.data().data() + p * n;
      double* crow = c.data().data() + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

LuFactors LuDecompose(const Tensor& a) {
  if (a.rank() != 2 || a.shape()[0] != a.shape()[1]) {
    Fail(ErrorKind::kDimension, "LU needs a square matrix, got " +
                                    ShapeString(a.shape()));
  }
  std::size_t n = a.shape()[0];
  LuFactors f{a, std::vector<std::size_t>(n), 1};
  for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;
  double scale = 0.0;
  for (double v : a.data()) scale = std::max(scale, std::abs(v));
  Tensor& lu = f.lu;
  double min_pivot = std::numeric_limits<double>::infinity();
  double max_pivot = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(lu(r, k)) > std::abs(lu(piv, k))) piv = r;
    double pivot = std::abs(lu(piv, k));
    min_pivot = std::min(min_pivot, pivot);
    max_pivot = std::max(max_pivot, pivot);
    if (!(pivot >= kPivotTolerance * std::max(scale, 1e-300))) {
      double cond = pivot > 0 ? max_pivot / pivot
                              : std::numeric_limits<double>::infinity();
      std::ostringstream os;
      os << "singular matrix: pivot " << pivot << " at column " << k
         << " (condition estimate " << cond << ")";
      throw SingularMatrixError(os.str(), cond);
    }
    if (piv != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(lu(k, c), lu(piv, c));
      std::swap(f.perm[k], f.perm[piv]);
      f.sign = -f.sign;
    }
    for (std::size_t r = k + 1; r < n; ++r) {
      double l = lu(r, k) / lu(k, k);
      lu(r, k) = l;
      if (l == 0.0) continue;
      for (std::size_t c = k + 1; c < n; ++c) lu(r, c) -= l * lu(k, c);
    }
  }
  return f;
}

Tensor LuInverse(const LuFactors& f) {
  std::size_t n = f.lu.shape()[0];
  Tensor inv({n, n});
  std::vector<double> col(n);
  for (std::size_t j = 0; j < n; ++j) {
    // Solve A x = e_j, i.e. L U x = P e_j.
    for (std::size_t i = 0; i < n; ++i) col[i] = (f.perm[i] == j) ? 1.0 : 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < i; ++k) col[i] -= f.lu(i, k) * col[k];
    for (std::size_t ii = n; ii-- > 0;) {
      for (std::size_t k = ii + 1; k < n; ++k) col[ii] -= f.lu(ii, k) * col[k];
      col[ii] /= f.lu(ii, ii);
    }
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  return inv;
}

double LuLogAbsDet(const LuFactors& f, int* sign) {
  std::size_t n = f.lu.shape()[0];
  double logdet = 0.0;
  int s = f.sign;
  for (std::size_t i = 0; i < n; ++i) {
    double d = f.lu(i, i);
    if (d < 0) s = -s;
    logdet += std::log(std::abs(d));
  }
  if (sign) *sign = s;
  return logdet;
}

Tensor Inverse(const Tensor& a) { return LuInverse(LuDecompose(a)); }

double MaxAbsDiff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace rnsx
