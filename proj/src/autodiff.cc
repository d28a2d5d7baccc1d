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

#include "rnsx/autodiff.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "rnsx/error.h"

namespace rnsx {

// ---- ParameterStore --------------------------------------------------------

Parameter& ParameterStore::Add(const std::string& name, Tensor init) {
  if (index_.count(name)) Fail(ErrorKind::kUsage, "duplicate parameter " + name);
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->grad = Tensor(init.shape());
  p->value = std::move(init);
  Parameter* raw = p.get();
  params_.push_back(std::move(p));
  index_[name] = raw;
  return *raw;
}

Parameter* ParameterStore::Find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : it->second;
}

const Parameter* ParameterStore::Find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : it->second;
}

Parameter& ParameterStore::Get(const std::string& name) {
  Parameter* p = Find(name);
  if (!p) Fail(ErrorKind::kUsage, "unknown parameter " + name);
  return *p;
}

std::size_t ParameterStore::NumValues() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParameterStore::ZeroGrad() {
  for (auto& p : params_) p->grad.Fill(0.0);
}

void ParameterStore::CopyValuesFrom(const ParameterStore& other) {
  for (auto& p : params_) {
    const Parameter* q = other.Find(p->name);
    if (q && q->value.shape() == p->value.shape()) p->value = q->value;
  }
}

// ---- Tape ------------------------------------------------------------------

const Tensor& Var::value() const { return tape_->value(id_); }

Var Tape::Constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.op = "constant";
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::Param(Parameter& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return Var(this, it->second);
  Node n;
  n.value = p.value;
  n.param = &p;
  n.requires_grad = true;
  n.op = "parameter";
  nodes_.push_back(std::move(n));
  param_nodes_[&p] = nodes_.size() - 1;
  return Var(this, nodes_.size() - 1);
}

Var Tape::Record(Tensor value, std::span<const Var> inputs, BackwardFn backward,
                 const char* op) {
  Node n;
  n.value = std::move(value);
  n.op = op;
  for (const Var& v : inputs) {
    if (v.tape() != this) Fail(ErrorKind::kUsage, std::string(op) + ": input from another tape");
    if (nodes_[v.id()].requires_grad) n.requires_grad = true;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

void Tape::Accumulate(std::size_t id, const Tensor& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (n.grad.empty()) {
    n.grad = g;
    return;
  }
  auto dst = n.grad.data();
  auto src = g.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

Tensor& Tape::GradBuffer(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(n.value.shape());
  return n.grad;
}

void Tape::Backward(Var loss) {
  if (loss.tape() != this) Fail(ErrorKind::kUsage, "loss belongs to another tape");
  if (loss.value().size() != 1) {
    Fail(ErrorKind::kDimension,
         "backward needs a scalar loss, got " + ShapeString(loss.shape()));
  }
  for (auto& n : nodes_) n.grad = Tensor();
  if (!nodes_[loss.id()].requires_grad) return;
  nodes_[loss.id()].grad = Tensor(loss.shape(), 1.0);
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.empty() || !n.requires_grad) continue;
    if (n.param) {
      auto dst = n.param->grad.data();
      auto src = n.grad.data();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    } else if (n.backward) {
      // Callbacks only touch gradients of earlier nodes.
      n.backward(*this, n.grad);
    }
  }
}

std::optional<std::pair<std::size_t, std::string>> Tape::FirstNonFinite() const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].value.AllFinite()) return std::make_pair(i, std::string(nodes_[i].op));
  }
  return std::nullopt;
}

// ---- helpers ---------------------------------------------------------------

namespace {

Tape& SameTape(Var a, Var b, const char* op) {
  if (!a.valid() || a.tape() != b.tape()) {
    Fail(ErrorKind::kUsage, std::string(op) + ": operands on different tapes");
  }
  return *a.tape();
}

enum class Broadcast { kNone, kTrailing };

Broadcast CheckBinary(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return Broadcast::kNone;
  if (a.rank() == 2 && b.rank() == 1 && a.shape()[1] == b.shape()[0]) {
    return Broadcast::kTrailing;
  }
  Fail(ErrorKind::kDimension, std::string(op) + " shape mismatch: " +
                                  ShapeString(a.shape()) + " vs " +
                                  ShapeString(b.shape()));
}

// Sums a [m x n] gradient over rows into an [n] gradient.
Tensor ReduceToTrailing(const Tensor& g, std::size_t n) {
  Tensor out({n});
  std::size_t m = g.size() / n;
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c) out[c] += g[r * n + c];
  return out;
}

template <typename F, typename DF>
Var Unary(Var a, const char* op, F f, DF df) {
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  std::size_t aid = a.id();
  return a.tape()->Record(
      std::move(y), std::span<const Var>(&a, 1),
      [aid, df](Tape& t, const Tensor& g) {
        const Tensor& x = t.value(aid);
        Tensor dx(x.shape());
        for (std::size_t i = 0; i < x.size(); ++i) dx[i] = g[i] * df(x[i]);
        t.Accumulate(aid, dx);
      },
      op);
}

void CheckAxis(const Tensor& a, std::size_t axis, const char* op) {
  if (axis >= a.rank()) {
    Fail(ErrorKind::kDimension, std::string(op) + ": axis " + std::to_string(axis) +
                                    " invalid for shape " + ShapeString(a.shape()));
  }
  if (a.shape()[axis] == 0) {
    Fail(ErrorKind::kDimension, std::string(op) + ": empty extent along axis " +
                                    std::to_string(axis));
  }
}

// Iteration geometry of a reduction: `outer` independent lines of `len`
// elements separated by `stride`.
struct Lines {
  std::size_t outer, len, stride;
  std::size_t Start(std::size_t o) const { return stride == 1 ? o * len : o; }
};

Lines LinesOf(const Tensor& a, std::size_t axis) {
  if (a.rank() == 1) return {1, a.shape()[0], 1};
  std::size_t m = a.shape()[0], n = a.shape()[1];
  return axis == 0 ? Lines{n, m, n} : Lines{m, n, 1};
}

Shape ReducedShape(const Tensor& a, std::size_t axis) {
  if (a.rank() == 1) return {1};
  return {axis == 0 ? a.shape()[1] : a.shape()[0]};
}

}  // namespace

// ---- operations ------------------------------------------------------------

Var MatMul(Var a, Var b) {
  Tape& t = SameTape(a, b, "matmul");
  Tensor c = MatMul(a.value(), b.value());
  std::size_t aid = a.id(), bid = b.id();
  Var in[] = {a, b};
  return t.Record(
      std::move(c), in,
      [aid, bid](Tape& t, const Tensor& g) {
        if (t.requires_grad(aid)) t.Accumulate(aid, MatMul(g, t.value(bid).Transposed()));
        if (t.requires_grad(bid)) t.Accumulate(bid, MatMul(t.value(aid).Transposed(), g));
      },
      "matmul");
}

Var Add(Var a, Var b) {
  Tape& t = SameTape(a, b, "add");
  Broadcast bc = CheckBinary(a.value(), b.value(), "add");
  Tensor y = a.value();
  const Tensor& bv = b.value();
  std::size_t n = bv.size();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i % n];
  std::size_t aid = a.id(), bid = b.id();
  Var in[] = {a, b};
  return t.Record(
      std::move(y), in,
      [aid, bid, bc, n](Tape& t, const Tensor& g) {
        t.Accumulate(aid, g);
        if (t.requires_grad(bid))
          t.Accumulate(bid, bc == Broadcast::kNone ? g : ReduceToTrailing(g, n));
      },
      "add");
}

Var Sub(Var a, Var b) {
  Tape& t = SameTape(a, b, "sub");
  Broadcast bc = CheckBinary(a.value(), b.value(), "sub");
  Tensor y = a.value();
  const Tensor& bv = b.value();
  std::size_t n = bv.size();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= bv[i % n];
  std::size_t aid = a.id(), bid = b.id();
  Var in[] = {a, b};
  return t.Record(
      std::move(y), in,
      [aid, bid, bc, n](Tape& t, const Tensor& g) {
        t.Accumulate(aid, g);
        if (t.requires_grad(bid)) {
          Tensor ng = bc == Broadcast::kNone ? g : ReduceToTrailing(g, n);
          for (auto& v : ng.data()) v = -v;
          t.Accumulate(bid, ng);
        }
      },
      "sub");
}

Var Mul(Var a, Var b) {
  Tape& t = SameTape(a, b, "mul");
  Broadcast bc = CheckBinary(a.value(), b.value(), "mul");
  Tensor y = a.value();
  const Tensor& bv = b.value();
  std::size_t n = bv.size();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= bv[i % n];
  std::size_t aid = a.id(), bid = b.id();
  Var in[] = {a, b};
  return t.Record(
      std::move(y), in,
      [aid, bid, bc, n](Tape& t, const Tensor& g) {
        const Tensor& av = t.value(aid);
        const Tensor& bv = t.value(bid);
        if (t.requires_grad(aid)) {
          Tensor da(av.shape());
          for (std::size_t i = 0; i < da.size(); ++i) da[i] = g[i] * bv[i % n];
          t.Accumulate(aid, da);
        }
        if (t.requires_grad(bid)) {
          Tensor prod(av.shape());
          for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = g[i] * av[i];
          t.Accumulate(bid, bc == Broadcast::kNone ? prod : ReduceToTrailing(prod, n));
        }
      },
      "mul");
}

Var Scale(Var a, double c) {
  return Unary(a, "scale", [c](double x) { return c * x; },
               [c](double) { return c; });
}

Var Tanh(Var a) {
  return Unary(a, "tanh", [](double x) { return std::tanh(x); },
               [](double x) {
                 double y = std::tanh(x);
                 return 1.0 - y * y;
               });
}

Var Relu(Var a) {
  return Unary(a, "relu", [](double x) { return x > 0 ? x : 0.0; },
               [](double x) { return x > 0 ? 1.0 : 0.0; });
}

namespace {
double Logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}
}  // namespace

Var Sigmoid(Var a) {
  return Unary(a, "sigmoid", Logistic, [](double x) {
    double s = Logistic(x);
    return s * (1.0 - s);
  });
}

Var Exp(Var a) {
  return Unary(a, "exp", [](double x) { return std::exp(x); },
               [](double x) { return std::exp(x); });
}

Var Log(Var a) {
  for (double v : a.value().data()) {
    if (!(v > 0)) Fail(ErrorKind::kDomain, "log of non-positive value " + std::to_string(v));
  }
  return Unary(a, "log", [](double x) { return std::log(x); },
               [](double x) { return 1.0 / x; });
}

Var Abs(Var a) {
  return Unary(a, "abs", [](double x) { return std::abs(x); },
               [](double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); });
}

Var Clamp(Var a, double lo, double hi) {
  return Unary(a, "clamp", [lo, hi](double x) { return std::clamp(x, lo, hi); },
               [lo, hi](double x) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Var Sum(Var a, std::size_t axis) {
  const Tensor& x = a.value();
  CheckAxis(x, axis, "sum");
  Lines L = LinesOf(x, axis);
  Tensor y(ReducedShape(x, axis));
  for (std::size_t o = 0; o < L.outer; ++o) {
    double s = 0.0;
    for (std::size_t k = 0; k < L.len; ++k) s += x[L.Start(o) + k * L.stride];
    y[o] = s;
  }
  std::size_t aid = a.id();
  Shape xs = x.shape();
  return a.tape()->Record(
      std::move(y), std::span<const Var>(&a, 1),
      [aid, L, xs](Tape& t, const Tensor& g) {
        Tensor dx(xs);
        for (std::size_t o = 0; o < L.outer; ++o)
          for (std::size_t k = 0; k < L.len; ++k) dx[L.Start(o) + k * L.stride] = g[o];
        t.Accumulate(aid, dx);
      },
      "sum");
}

Var Max(Var a, std::size_t axis) {
  const Tensor& x = a.value();
  CheckAxis(x, axis, "max");
  Lines L = LinesOf(x, axis);
  Tensor y(ReducedShape(x, axis));
  std::vector<std::size_t> arg(L.outer);
  for (std::size_t o = 0; o < L.outer; ++o) {
    std::size_t best = L.Start(o);
    for (std::size_t k = 1; k < L.len; ++k) {
      std::size_t idx = L.Start(o) + k * L.stride;
      if (x[idx] > x[best]) best = idx;
    }
    arg[o] = best;
    y[o] = x[best];
  }
  std::size_t aid = a.id();
  Shape xs = x.shape();
  return a.tape()->Record(
      std::move(y), std::span<const Var>(&a, 1),
      [aid, arg = std::move(arg), xs](Tape& t, const Tensor& g) {
        Tensor dx(xs);
        for (std::size_t o = 0; o < arg.size(); ++o) dx[arg[o]] += g[o];
        t.Accumulate(aid, dx);
      },
      "max");
}

Var SumAll(Var a) {
  const Tensor& x = a.value();
  double s = 0.0;
  for (double v : x.data()) s += v;
  std::size_t aid = a.id();
  Shape xs = x.shape();
  return a.tape()->Record(
      Tensor::Scalar(s), std::span<const Var>(&a, 1),
      [aid, xs](Tape& t, const Tensor& g) { t.Accumulate(aid, Tensor(xs, g[0])); },
      "sum_all");
}

Var LogSoftmax(Var a, std::size_t axis) {
  const Tensor& x = a.value();
  CheckAxis(x, axis, "log_softmax");
  Lines L = LinesOf(x, axis);
  Tensor y(x.shape());
  for (std::size_t o = 0; o < L.outer; ++o) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < L.len; ++k) mx = std::max(mx, x[L.Start(o) + k * L.stride]);
    double s = 0.0;
    for (std::size_t k = 0; k < L.len; ++k) s += std::exp(x[L.Start(o) + k * L.stride] - mx);
    double lse = mx + std::log(s);
    for (std::size_t k = 0; k < L.len; ++k) {
      std::size_t i = L.Start(o) + k * L.stride;
      y[i] = x[i] - lse;
    }
  }
  std::size_t aid = a.id();
  Tensor yv = y;
  return a.tape()->Record(
      std::move(y), std::span<const Var>(&a, 1),
      [aid, L, yv = std::move(yv)](Tape& t, const Tensor& g) {
        Tensor dx(yv.shape());
        for (std::size_t o = 0; o < L.outer; ++o) {
          double gs = 0.0;
          for (std::size_t k = 0; k < L.len; ++k) gs += g[L.Start(o) + k * L.stride];
          for (std::size_t k = 0; k < L.len; ++k) {
            std::size_t i = L.Start(o) + k * L.stride;
            dx[i] = g[i] - std::exp(yv[i]) * gs;
          }
        }
        t.Accumulate(aid, dx);
      },
      "log_softmax");
}

Var Softmax(Var a, std::size_t axis) {
  const Tensor& x = a.value();
  CheckAxis(x, axis, "softmax");
  Lines L = LinesOf(x, axis);
  Tensor y(x.shape());
  for (std::size_t o = 0; o < L.outer; ++o) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < L.len; ++k) mx = std::max(mx, x[L.Start(o) + k * L.stride]);
    double s = 0.0;
    for (std::size_t k = 0; k < L.len; ++k) {
      std::size_t i = L.Start(o) + k * L.stride;
      y[i] = std::exp(x[i] - mx);
      s += y[i];
    }
    for (std::size_t k = 0; k < L.len; ++k) y[L.Start(o) + k * L.stride] /= s;
  }
  std::size_t aid = a.id();
  Tensor yv = y;
  return a.tape()->Record(
      std::move(y), std::span<const Var>(&a, 1),
      [aid, L, yv = std::move(yv)](Tape& t, const Tensor& g) {
        Tensor dx(yv.shape());
        for (std::size_t o = 0; o < L.outer; ++o) {
          double dot = 0.0;
          for (std::size_t k = 0; k < L.len; ++k) {
            std::size_t i = L.Start(o) + k * L.stride;
            dot += g[i] * yv[i];
          }
          for (std::size_t k = 0; k < L.len; ++k) {
            std::size_t i = L.Start(o) + k * L.stride;
            dx[i] = yv[i] * (g[i] - dot);
          }
        }
        t.Accumulate(aid, dx);
      },
      "softmax");
}

Var Inverse(Var a) {
  Tensor inv = Inverse(a.value());
  std::size_t aid = a.id();
  Tensor inv_t = inv.Transposed();
  return a.tape()->Record(
      std::move(inv), std::span<const Var>(&a, 1),
      [aid, inv_t = std::move(inv_t)](Tape& t, const Tensor& g) {
        // d(A^-1) = -A^-1 dA A^-1  =>  dL/dA = -A^-T G A^-T
        Tensor da = MatMul(MatMul(inv_t, g), inv_t);
        for (auto& v : da.data()) v = -v;
        t.Accumulate(aid, da);
      },
      "inverse");
}

Var LogDet(Var a) {
  LuFactors f = LuDecompose(a.value());
  int sign = 1;
  double logdet = LuLogAbsDet(f, &sign);
  if (sign <= 0) {
    Fail(ErrorKind::kDegenerate, "log_det of matrix with non-positive determinant");
  }
  std::size_t aid = a.id();
  Tensor inv_t = LuInverse(f).Transposed();
  return a.tape()->Record(
      Tensor::Scalar(logdet), std::span<const Var>(&a, 1),
      [aid, inv_t = std::move(inv_t)](Tape& t, const Tensor& g) {
        Tensor da = inv_t;
        for (auto& v : da.data()) v *= g[0];
        t.Accumulate(aid, da);
      },
      "log_det");
}

Var Concat(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) Fail(ErrorKind::kDimension, "concat of zero parts");
  Tape* tape = parts[0].tape();
  const Tensor& first = parts[0].value();
  std::size_t rank = first.rank();
  if (axis >= rank) Fail(ErrorKind::kDimension, "concat: axis out of range");
  std::vector<std::size_t> extents;
  std::size_t total = 0;
  for (const Var& p : parts) {
    if (p.tape() != tape) Fail(ErrorKind::kUsage, "concat: parts on different tapes");
    const Tensor& v = p.value();
    bool ok = v.rank() == rank;
    for (std::size_t d = 0; ok && d < rank; ++d)
      if (d != axis && v.shape()[d] != first.shape()[d]) ok = false;
    if (!ok) {
      Fail(ErrorKind::kDimension, "concat extent mismatch: " + ShapeString(first.shape()) +
                                      " vs " + ShapeString(v.shape()));
    }
    extents.push_back(v.shape()[axis]);
    total += v.shape()[axis];
  }
  Shape out_shape = first.shape();
  out_shape[axis] = total;
  Tensor y(out_shape);
  // rows = number of "outer" blocks, each part contributes a contiguous run.
  std::size_t outer = (rank == 2 && axis == 1) ? first.shape()[0] : 1;
  std::size_t inner = (rank == 2 && axis == 0) ? first.shape()[1] : 1;
  std::size_t out_row = total * inner;
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const Tensor& v = parts[p].value();
    std::size_t run = extents[p] * inner;
    for (std::size_t o = 0; o < outer; ++o)
      std::copy_n(v.data().begin() + o * run, run, y.data().begin() + o * out_row + offset);
    offset += run;
  }
  std::vector<std::size_t> ids;
  std::vector<Shape> shapes;
  for (const Var& p : parts) {
    ids.push_back(p.id());
    shapes.push_back(p.shape());
  }
  return tape->Record(
      std::move(y), parts,
      [ids, shapes, extents, outer, inner, out_row](Tape& t, const Tensor& g) {
        std::size_t offset = 0;
        for (std::size_t p = 0; p < ids.size(); ++p) {
          std::size_t run = extents[p] * inner;
          if (t.requires_grad(ids[p])) {
            Tensor d(shapes[p]);
            for (std::size_t o = 0; o < outer; ++o)
              std::copy_n(g.data().begin() + o * out_row + offset, run, d.data().begin() + o * run);
            t.Accumulate(ids[p], d);
          }
          offset += run;
        }
      },
      "concat");
}

Var Concat(std::initializer_list<Var> parts, std::size_t axis) {
  return Concat(std::span<const Var>(parts.begin(), parts.size()), axis);
}

Var Slice(Var a, std::size_t axis, std::size_t begin, std::size_t end) {
  const Tensor& x = a.value();
  if (axis >= x.rank() || begin > end || end > x.shape()[axis]) {
    Fail(ErrorKind::kDimension, "slice [" + std::to_string(begin) + "," + std::to_string(end) +
                                    ") out of range for " + ShapeString(x.shape()));
  }
  std::size_t outer = (x.rank() == 2 && axis == 1) ? x.shape()[0] : 1;
  std::size_t inner = (x.rank() == 2 && axis == 0) ? x.shape()[1] : 1;
  std::size_t in_row = x.shape()[axis] * inner;
  std::size_t run = (end - begin) * inner;
  std::size_t off = begin * inner;
  Shape ys = x.shape();
  ys[axis] = end - begin;
  Tensor y(ys);
  for (std::size_t o = 0; o < outer; ++o)
    std::copy_n(x.data().begin() + o * in_row + off, run, y.data().begin() + o * run);
  std::size_t aid = a.id();
  Shape xs = x.shape();
  return a.tape()->Record(
      std::move(y), std::span<const Var>(&a, 1),
      [aid, xs, outer, in_row, run, off](Tape& t, const Tensor& g) {
        Tensor& d = t.GradBuffer(aid);
        for (std::size_t o = 0; o < outer; ++o)
          for (std::size_t k = 0; k < run; ++k) d[o * in_row + off + k] += g[o * run + k];
      },
      "slice");
}

Var Transpose(Var a) {
  Tensor y = a.value().Transposed();
  std::size_t aid = a.id();
  return a.tape()->Record(
      std::move(y), std::span<const Var>(&a, 1),
      [aid](Tape& t, const Tensor& g) { t.Accumulate(aid, g.Transposed()); },
      "transpose");
}

Var Reshape(Var a, Shape shape) {
  Tensor y = a.value().Reshaped(std::move(shape));
  std::size_t aid = a.id();
  Shape xs = a.shape();
  return a.tape()->Record(
      std::move(y), std::span<const Var>(&a, 1),
      [aid, xs](Tape& t, const Tensor& g) { t.Accumulate(aid, g.Reshaped(xs)); },
      "reshape");
}

Var GatherRows(Var a, std::span<const std::size_t> indices) {
  const Tensor& x = a.value();
  std::size_t width = x.rank() == 2 ? x.shape()[1] : 1;
  std::size_t rows = x.shape()[0];
  Shape ys = x.rank() == 2 ? Shape{indices.size(), width} : Shape{indices.size()};
  Tensor y(ys);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= rows) {
      Fail(ErrorKind::kDimension, "gather index " + std::to_string(indices[k]) +
                                      " out of range for " + ShapeString(x.shape()));
    }
    std::copy_n(x.data().begin() + indices[k] * width, width, y.data().begin() + k * width);
  }
  std::size_t aid = a.id();
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return a.tape()->Record(
      std::move(y), std::span<const Var>(&a, 1),
      [aid, idx = std::move(idx), width](Tape& t, const Tensor& g) {
        Tensor& d = t.GradBuffer(aid);
        for (std::size_t k = 0; k < idx.size(); ++k)
          for (std::size_t c = 0; c < width; ++c) d[idx[k] * width + c] += g[k * width + c];
      },
      "gather_rows");
}

Var Dropout(Var a, double rate) {
  Tape& t = *a.tape();
  if (!t.training() || rate <= 0.0) return a;
  if (rate >= 1.0) Fail(ErrorKind::kUsage, "dropout rate must be < 1");
  std::bernoulli_distribution keep(1.0 - rate);
  Tensor mask(a.shape());
  double scale = 1.0 / (1.0 - rate);
  for (auto& v : mask.data()) v = keep(t.rng()) ? scale : 0.0;
  return Mul(a, t.Constant(std::move(mask)));
}

// ---- finite differences ----------------------------------------------------

GradCheckResult FiniteDifferenceCheck(const LossFn& loss,
                                      std::span<Parameter* const> params,
                                      std::span<const double> eps) {
  for (Parameter* p : params) p->grad.Fill(0.0);
  {
    Tape tape;
    Var l = loss(tape);
    tape.Backward(l);
  }
  auto eval = [&]() {
    Tape tape;
    return loss(tape).value().Item();
  };
  const double floor = kFdZeroGradient * std::max(1.0, std::abs(eval()));
  GradCheckResult res;
  for (Parameter* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      double analytic = p->grad[i];
      double best = std::numeric_limits<double>::infinity();
      double best_numeric = 0.0;
      double orig = p->value[i];
      for (double h : eps) {
        p->value[i] = orig + h;
        double fp = eval();
        p->value[i] = orig - h;
        double fm = eval();
        p->value[i] = orig;
        double numeric = (fp - fm) / (2.0 * h);
        double err = std::abs(analytic - numeric) /
                     (std::abs(analytic) + std::abs(numeric) + 1e-12);
        if (std::max(std::abs(analytic), std::abs(numeric)) <= floor) err = 0.0;
        if (err < best) {
          best = err;
          best_numeric = numeric;
        }
      }
      if (std::max(std::abs(analytic), std::abs(best_numeric)) <= floor) ++res.zero_entries;
      if (best > res.max_rel_error || res.worst_parameter.empty()) {
        if (best >= res.max_rel_error) {
          res.max_rel_error = best;
          res.worst_parameter = p->name;
          res.worst_index = i;
          res.analytic = analytic;
          res.numeric = best_numeric;
        }
      }
    }
  }
  return res;
}

GradCheckResult FiniteDifferenceCheck(const LossFn& loss, ParameterStore& store,
                                      std::span<const double> eps) {
  std::vector<Parameter*> ps;
  for (const auto& p : store.all()) ps.push_back(p.get());
  return FiniteDifferenceCheck(loss, ps, eps);
}

}  // namespace rnsx
