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

#ifndef FCTSBN_TESTS_ORACLES_HPP
#define FCTSBN_TESTS_ORACLES_HPP

// Independent reference computations used by the tests. Everything here is
// written with explicit loops over the raw tensors and does not call the
// library's forward code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "fctsbn/params.hpp"
#include "fctsbn/rng.hpp"
#include "fctsbn/sequence.hpp"

namespace oracle {

using fctsbn::CondWeight;
using fctsbn::Index;
using fctsbn::Matrix;
using fctsbn::Vector;

inline constexpr double kLog2Pi = 1.8378770664093454836;

// W(y) by triple loops over the stored tensors.
inline Matrix effective(const CondWeight& w, const Vector& y) {
  const Index out = w.out_dim(), in = w.in_dim(), S = w.styles();
  Matrix m = Matrix::Zero(out, in);
  if (!w.is_factored()) {
    for (Index i = 0; i < out; ++i)
      for (Index j = 0; j < in; ++j)
        for (Index s = 0; s < S; ++s) m(i, j) += w.tensor()(i, s * in + j) * y[s];
    return m;
  }
  const Index F = w.factors();
  for (Index i = 0; i < out; ++i)
    for (Index j = 0; j < in; ++j)
      for (Index f = 0; f < F; ++f) {
        double gate = 0.0;
        for (Index s = 0; s < S; ++s) gate += w.b()(f, s) * y[s];
        m(i, j) += w.a()(i, f) * gate * w.c()(f, j);
      }
  return m;
}

inline Vector apply(const CondWeight& w, const Vector& y, const Vector& x) {
  const Matrix m = effective(w, y);
  Vector out = Vector::Zero(m.rows());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) out[i] += m(i, j) * x[j];
  return out;
}

inline Vector bias(const Matrix& b, const Vector& y) {
  Vector out = Vector::Zero(b.rows());
  for (Index i = 0; i < b.rows(); ++i)
    for (Index s = 0; s < b.cols(); ++s) out[i] += b(i, s) * y[s];
  return out;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Vector naive_softmax(const Vector& a) {
  Vector e(a.size());
  double z = 0.0;
  for (Index i = 0; i < a.size(); ++i) z += (e[i] = std::exp(a[i]));
  return e / z;
}

// sum_j h log s + (1 - h) log(1 - s), with s = sigmoid(a).
inline double bernoulli_log_pmf(const Vector& logits, const Vector& h) {
  double acc = 0.0;
  for (Index j = 0; j < logits.size(); ++j) {
    const double s = sigmoid(logits[j]);
    acc += h[j] > 0.5 ? std::log(s) : std::log(1.0 - s);
  }
  return acc;
}

inline double gaussian_log_pdf(double v, double mean, double var) {
  return -0.5 * kLog2Pi - 0.5 * std::log(var) - 0.5 * (v - mean) * (v - mean) / var;
}

// [x_{t-1}; ...; x_{t-n}] with zeros before the start.
inline Vector lags(const Matrix& X, Index t, int n) {
  Vector out = Vector::Zero(X.rows() * n);
  for (int k = 1; k <= n; ++k)
    if (t - k >= 0) out.segment((k - 1) * X.rows(), X.rows()) = X.col(t - k);
  return out;
}

// Single-layer prior logits at t.
inline Vector prior_logits(const fctsbn::GenerativeParams& p, const Matrix& V, const Matrix& H,
                           const Matrix& Y, Index t) {
  const int n = p.spec.dims.order;
  const auto& l = p.layers[0];
  Vector a = bias(l.bias, Y.col(t)) + apply(l.self_lag, Y.col(t), lags(H, t, n));
  if (l.lower_lag) a += apply(*l.lower_lag, Y.col(t), lags(V, t, n));
  return a;
}

// log p(v_t | h_t, lags, y_t) of a single-layer model.
inline double emission_log_density(const fctsbn::GenerativeParams& p, const Matrix& V,
                                   const Vector& h, const Matrix& Y, Index t) {
  const int n = p.spec.dims.order;
  const auto& e = p.emission;
  const Vector y = Y.col(t);
  const Vector vl = lags(V, t, n);
  Vector mu = bias(e.c, y) + apply(e.w2, y, h);
  if (e.w4) mu += apply(*e.w4, y, vl);
  double acc = 0.0;
  switch (p.spec.obs) {
    case fctsbn::ObsKind::Real: {
      Vector lv = bias(*e.c_var, y) + apply(*e.w2_var, y, h);
      if (e.w4_var) lv += apply(*e.w4_var, y, vl);
      for (Index i = 0; i < mu.size(); ++i)
        acc += gaussian_log_pdf(V(i, t), mu[i], std::exp(std::clamp(lv[i], -10.0, 10.0)));
      break;
    }
    case fctsbn::ObsKind::Binary:
      acc = bernoulli_log_pmf(mu, V.col(t));
      break;
    case fctsbn::ObsKind::Count: {
      const Vector s = naive_softmax(mu);
      for (Index i = 0; i < mu.size(); ++i) acc += V(i, t) * std::log(s[i]);
      break;
    }
  }
  return acc;
}

inline Vector bits(Index J, std::uint64_t code) {
  Vector h(J);
  for (Index j = 0; j < J; ++j) h[j] = (code >> j) & 1u ? 1.0 : 0.0;
  return h;
}

// log p(V | Y) of a single-layer order-1 model by the forward algorithm
// over the 2^J hidden states.
inline double forward_log_marginal(const fctsbn::GenerativeParams& p, const Matrix& V,
                                   const Matrix& Y) {
  const Index J = p.spec.dims.hidden();
  const Index T = V.cols();
  const std::uint64_t K = std::uint64_t{1} << J;
  std::vector<double> alpha(K, -std::numeric_limits<double>::infinity());
  auto lse_add = [](double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
  };
  for (Index t = 0; t < T; ++t) {
    std::vector<double> next(K, -std::numeric_limits<double>::infinity());
    const std::uint64_t prev_states = t == 0 ? 1 : K;
    for (std::uint64_t prev = 0; prev < prev_states; ++prev) {
      Matrix H = Matrix::Zero(J, T);
      if (t > 0) H.col(t - 1) = bits(J, prev);
      const double base = t == 0 ? 0.0 : alpha[prev];
      const Vector logits = prior_logits(p, V, H, Y, t);
      for (std::uint64_t cur = 0; cur < K; ++cur) {
        const Vector h = bits(J, cur);
        next[cur] = lse_add(next[cur], base + bernoulli_log_pmf(logits, h) +
                                           emission_log_density(p, V, h, Y, t));
      }
    }
    alpha = std::move(next);
  }
  double total = -std::numeric_limits<double>::infinity();
  for (double a : alpha) total = lse_add(total, a);
  return total;
}

// Central difference of f along one scalar.
inline double central_difference(const std::function<double()>& f, double& x, double step) {
  const double x0 = x;
  x = x0 + step;
  const double up = f();
  x = x0 - step;
  const double down = f();
  x = x0;
  return (up - down) / (2.0 * step);
}

// Standalone RMSprop ascent trace: returns the parameter after each step.
inline std::vector<double> rmsprop_trace(double param, const std::vector<double>& grads, double lr,
                                         double decay, double eps) {
  std::vector<double> out;
  double acc = 0.0;
  for (double g : grads) {
    acc = decay * acc + (1.0 - decay) * g * g;
    param += lr * g / std::sqrt(acc + eps);
    out.push_back(param);
  }
  return out;
}

inline Matrix random_matrix(Index r, Index c, fctsbn::Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

inline Matrix random_binary(Index r, Index c, fctsbn::Rng& rng) {
  Matrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
  return m;
}

// Columns on the simplex with strictly positive entries.
inline Matrix random_mixture(Index S, Index T, fctsbn::Rng& rng) {
  Matrix m(S, T);
  for (Index t = 0; t < T; ++t) {
    double z = 0.0;
    for (Index s = 0; s < S; ++s) z += (m(s, t) = 0.1 + rng.uniform());
    m.col(t) /= z;
  }
  return m;
}

inline double mean(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v;
  return acc / static_cast<double>(x.size());
}

inline double std_error(const std::vector<double>& x) {
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
}

}  // namespace oracle

#endif  // FCTSBN_TESTS_ORACLES_HPP
