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

#ifndef RNSX_TENSOR_H_
#define RNSX_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace rnsx {

using Shape = std::vector<std::size_t>;

std::string ShapeString(const Shape& shape);
std::size_t ShapeSize(const Shape& shape);

// Dense row-major array of doubles. Rank 1 and rank 2 are the only ranks the
// encoders use; scalars are rank-1 tensors of extent 1.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor Vector(std::initializer_list<double> values);
  static Tensor Matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor Identity(std::size_t n);
  static Tensor Scalar(double v) { return Tensor({1}, {v}); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * shape_[1] + c];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  Tensor Reshaped(Shape shape) const;
  Tensor Transposed() const;
  Tensor Row(std::size_t r) const;
  void Fill(double v);
  double Item() const;
  bool AllFinite() const;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Plain (tape-free) matrix helpers shared by inference and tests.
Tensor MatMul(const Tensor& a, const Tensor& b);

struct LuFactors {
  Tensor lu;                      // L below the diagonal (unit), U on and above
  std::vector<std::size_t> perm;  // row permutation
  int sign = 1;                   // permutation parity
};

// Partial-pivot LU. Throws SingularMatrixError when a pivot falls below
// kPivotTolerance relative to the largest entry of `a`.
LuFactors LuDecompose(const Tensor& a);
Tensor LuInverse(const LuFactors& f);
double LuLogAbsDet(const LuFactors& f, int* sign);
Tensor Inverse(const Tensor& a);

inline constexpr double kPivotTolerance = 1e-12;

double MaxAbsDiff(const Tensor& a, const Tensor& b);

}  // namespace rnsx

#endif  // RNSX_TENSOR_H_
