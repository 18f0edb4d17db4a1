// Copyright 2026 The fctsbn Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fctsbn/cond_weight.hpp"

#include <atomic>

namespace fctsbn {

namespace flops {
namespace {
std::atomic<std::uint64_t> counter{0};
}
void add(std::uint64_t n) { counter.fetch_add(n, std::memory_order_relaxed); }
std::uint64_t read() { return counter.load(std::memory_order_relaxed); }
void reset() { counter.store(0, std::memory_order_relaxed); }
}  // namespace flops

namespace {

// Wb * y, skipping zero entries of y (one-hot side information costs one
// column rather than S).
Vector factor_gains(const Matrix& b, const Vector& y, std::uint64_t& cost) {
  Vector f = Vector::Zero(b.rows());
  for (Index s = 0; s < y.size(); ++s) {
    if (y[s] == 0.0) continue;
    f.noalias() += y[s] * b.col(s);
    cost += static_cast<std::uint64_t>(b.rows());
  }
  return f;
}

}  // namespace

CondWeight CondWeight::dense(Index out, Index in, Index styles) {
  CondWeight w;
  w.kind_ = Kind::Dense;
  w.out_ = out;
  w.in_ = in;
  w.styles_ = styles;
  w.tensor_ = Matrix::Zero(out, in * styles);
  return w;
}

CondWeight CondWeight::factored(Index out, Index in, Index styles, Index factors) {
  if (factors < 1) throw ShapeError("factored CondWeight: factor count F must be >= 1");
  CondWeight w;
  w.kind_ = Kind::Factored;
  w.out_ = out;
  w.in_ = in;
  w.styles_ = styles;
  w.factors_ = factors;
  w.a_ = Matrix::Zero(out, factors);
  w.b_ = Matrix::Zero(factors, styles);
  w.c_ = Matrix::Zero(factors, in);
  return w;
}

Index CondWeight::parameter_count() const {
  if (kind_ == Kind::Dense) return out_ * in_ * styles_;
  return (out_ + in_ + styles_) * factors_;
}

void CondWeight::check_inputs(const Vector& y, const Vector& x) const {
  if (y.size() != styles_) {
    throw ShapeError("CondWeight: side-information axis S has " + std::to_string(y.size()) +
                     " entries, expected " + std::to_string(styles_));
  }
  if (x.size() != in_) {
    throw ShapeError("CondWeight: input axis has " + std::to_string(x.size()) +
                     " entries, expected in_dim " + std::to_string(in_));
  }
}

Vector CondWeight::apply(const Vector& y, const Vector& x) const {
  Vector out = Vector::Zero(out_);
  apply_add(y, x, out);
  return out;
}

void CondWeight::apply_add(const Vector& y, const Vector& x, Vector& out) const {
  check_inputs(y, x);
  check_size(out.size(), out_, "CondWeight: output axis");
  std::uint64_t cost = 0;
  if (kind_ == Kind::Dense) {
    for (Index s = 0; s < styles_; ++s) {
      if (y[s] == 0.0) continue;
      out.noalias() += y[s] * (slice(s) * x);
      cost += static_cast<std::uint64_t>(out_ * in_);
    }
  } else {
    const Vector f = factor_gains(b_, y, cost);
    const Vector g = c_ * x;
    out.noalias() += a_ * f.cwiseProduct(g);
    cost += static_cast<std::uint64_t>(factors_ * in_ + out_ * factors_ + factors_);
  }
  flops::add(cost);
}

Matrix CondWeight::effective(const Vector& y) const {
  if (y.size() != styles_) {
    throw ShapeError("effective_weight: side-information axis S has " + std::to_string(y.size()) +
                     " entries, expected " + std::to_string(styles_));
  }
  if (kind_ == Kind::Dense) {
    Matrix w = Matrix::Zero(out_, in_);
    for (Index s = 0; s < styles_; ++s) w += y[s] * slice(s);
    return w;
  }
  const Vector f = b_ * y;
  return a_ * f.asDiagonal() * c_;
}

void CondWeight::accumulate_gradient(const Vector& y, const Vector& xi, const Vector& eta,
                                     CondWeight& grad) const {
  check_inputs(y, eta);
  check_size(xi.size(), out_, "CondWeight gradient: error axis");
  if (grad.kind_ != kind_ || grad.out_ != out_ || grad.in_ != in_ || grad.styles_ != styles_ ||
      grad.factors_ != factors_) {
    throw ShapeError("CondWeight gradient: accumulator structure differs from weight");
  }
  std::uint64_t cost = 0;
  if (kind_ == Kind::Dense) {
    for (Index s = 0; s < styles_; ++s) {
      if (y[s] == 0.0) continue;
      grad.slice(s).noalias() += (y[s] * xi) * eta.transpose();
      cost += static_cast<std::uint64_t>(out_ * in_);
    }
  } else {
    const Vector f = factor_gains(b_, y, cost);
    const Vector g = c_ * eta;
    const Vector u = a_.transpose() * xi;
    grad.a_.noalias() += xi * f.cwiseProduct(g).transpose();
    const Vector ug = u.cwiseProduct(g);
    for (Index s = 0; s < styles_; ++s) {
      if (y[s] == 0.0) continue;
      grad.b_.col(s) += y[s] * ug;
      cost += static_cast<std::uint64_t>(factors_);
    }
    grad.c_.noalias() += f.cwiseProduct(u) * eta.transpose();
    cost += static_cast<std::uint64_t>(2 * factors_ * in_ + 2 * out_ * factors_ + 2 * factors_);
  }
  flops::add(cost);
}

FactoredGradients factored_weight_gradients(const CondWeight& w, const Vector& xi,
                                            const Vector& eta, const Vector& y) {
  if (!w.is_factored()) throw ShapeError("factored_weight_gradients: weight is dense");
  CondWeight grad = w.zeros_like();
  w.accumulate_gradient(y, xi, eta, grad);
  return {grad.a(), grad.b(), grad.c()};
}

CondWeight CondWeight::zeros_like() const {
  return kind_ == Kind::Dense ? dense(out_, in_, styles_) : factored(out_, in_, styles_, factors_);
}

void CondWeight::fill_gaussian(Rng& rng, double stddev) {
  auto fill = [&](Matrix& m) {
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i) m(i, j) = rng.normal(0.0, stddev);
  };
  if (kind_ == Kind::Dense) {
    fill(tensor_);
  } else {
    fill(a_);
    fill(b_);
    fill(c_);
  }
}

void CondWeight::append_tensors(const std::string& name, std::vector<TensorRef>& out) {
  if (kind_ == Kind::Dense) {
    out.push_back({name, &tensor_, {out_, in_, styles_}});
  } else {
    out.push_back({name + ".a", &a_, {out_, factors_}});
    out.push_back({name + ".b", &b_, {factors_, styles_}});
    out.push_back({name + ".c", &c_, {factors_, in_}});
  }
}

void CondWeight::append_tensors(const std::string& name, std::vector<ConstTensorRef>& out) const {
  if (kind_ == Kind::Dense) {
    out.push_back({name, &tensor_, {out_, in_, styles_}});
  } else {
    out.push_back({name + ".a", &a_, {out_, factors_}});
    out.push_back({name + ".b", &b_, {factors_, styles_}});
    out.push_back({name + ".c", &c_, {factors_, in_}});
  }
}

}  // namespace fctsbn
