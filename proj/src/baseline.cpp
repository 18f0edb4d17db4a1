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

#include "fctsbn/baseline.hpp"

#include <cmath>
#include <utility>

namespace fctsbn {

namespace {

template <class Ref, class B>
std::vector<Ref> collect(B& b) {
  return {{b.name + "/W", &b.w_hidden, {b.w_hidden.rows(), b.w_hidden.cols()}},
          {b.name + "/b", &b.b_hidden, {b.b_hidden.rows()}},
          {b.name + "/w_out", &b.w_out, {b.w_out.cols()}},
          {b.name + "/c0", &b.c0, {1}}};
}

}  // namespace

BaselineParams make_baseline(Index input_dim, int hidden, std::string name) {
  if (input_dim < 1 || hidden < 1) throw ShapeError("baseline: dimensions must be positive");
  BaselineParams b;
  b.w_hidden = Matrix::Zero(hidden, input_dim);
  b.b_hidden = Matrix::Zero(hidden, 1);
  b.w_out = Matrix::Zero(1, hidden);
  b.c0 = Matrix::Zero(1, 1);
  b.name = std::move(name);
  return b;
}

BaselineParams BaselineParams::zeros_like() const {
  return make_baseline(w_hidden.cols(), static_cast<int>(w_hidden.rows()), name);
}

std::vector<TensorRef> BaselineParams::tensors() { return collect<TensorRef>(*this); }
std::vector<ConstTensorRef> BaselineParams::tensors() const {
  return collect<ConstTensorRef>(*this);
}

void initialize(BaselineParams& b, Rng& rng) {
  const double sd = 1.0 / std::sqrt(static_cast<double>(b.input_dim()));
  for (Index j = 0; j < b.w_hidden.cols(); ++j)
    for (Index i = 0; i < b.w_hidden.rows(); ++i) b.w_hidden(i, j) = rng.normal(0.0, sd);
  b.b_hidden.setZero();
  b.w_out.setZero();
  b.c0.setZero();
}

Vector baseline_input(const Vector& below_t, const Vector& below_lags, const Vector& y) {
  Vector x(below_t.size() + below_lags.size() + y.size());
  x << below_t, below_lags, y;
  return x;
}

double baseline_eval(const BaselineParams& b, const Vector& x, const BaselineOptions& opt) {
  double out = opt.data_independent ? b.c0(0, 0) : 0.0;
  if (opt.data_dependent) {
    check_size(x.size(), b.input_dim(), "baseline: input length");
    const Vector a = (b.w_hidden * x + b.b_hidden.col(0)).array().tanh();
    out += b.w_out.row(0).dot(a);
  }
  return out;
}

void baseline_accumulate_gradient(const BaselineParams& b, const Vector& x, double signal,
                                  BaselineParams& grad, const BaselineOptions& opt) {
  if (opt.data_independent) grad.c0(0, 0) += signal;
  if (!opt.data_dependent) return;
  check_size(x.size(), b.input_dim(), "baseline: input length");
  const Vector a = (b.w_hidden * x + b.b_hidden.col(0)).array().tanh();
  grad.w_out.row(0) += signal * a.transpose();
  const Vector delta = signal * b.w_out.row(0).transpose().cwiseProduct(
                                    (1.0 - a.array().square()).matrix());
  grad.w_hidden.noalias() += delta * x.transpose();
  grad.b_hidden.col(0) += delta;
}

}  // namespace fctsbn
