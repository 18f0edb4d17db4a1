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

#include "fctsbn/audit.hpp"

#include <Eigen/QR>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fctsbn/model.hpp"
#include "fctsbn/recognition.hpp"

namespace fctsbn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Running log-sum-exp with an optional weighted companion sum
// sum_i exp(a_i) * w_i, carried relative to the same shift.
struct LogAccumulator {
  double shift = kNegInf;
  double scaled = 0.0;

  void add(double a) {
    if (a == kNegInf) return;
    if (a > shift) {
      scaled = scaled * std::exp(shift - a) + 1.0;
      shift = a;
    } else {
      scaled += std::exp(a - shift);
    }
  }
  void merge(const LogAccumulator& o) {
    if (o.shift == kNegInf) return;
    if (o.shift > shift) {
      scaled = scaled * std::exp(shift - o.shift) + o.scaled;
      shift = o.shift;
    } else {
      scaled += o.scaled * std::exp(o.shift - shift);
    }
  }
  double value() const { return shift == kNegInf ? kNegInf : shift + std::log(scaled); }
};

struct Partial {
  LogAccumulator joint;
  LogAccumulator post;
  double elbo = 0.0;  // sum q(H) (log p - log q)

  void add(double lp, double lq) {
    joint.add(lp);
    post.add(lq);
    elbo += std::exp(lq) * (lp - lq);
  }
  void merge(const Partial& o) {
    joint.merge(o.joint);
    post.merge(o.post);
    elbo += o.elbo;
  }
};

void check_enumerable(const ModelSpec& spec, Index frames) {
  const int bits = hidden_bits(spec, frames);
  if (bits > kMaxEnumerationBits) {
    throw ValueError("enumeration: " + std::to_string(bits) + " hidden bits exceeds the cap of " +
                     std::to_string(kMaxEnumerationBits));
  }
}

void evaluate(const GenerativeParams& p, const RecognitionParams& q, const Matrix& V,
              const Matrix& Y, std::uint64_t code, Partial& acc) {
  const HiddenStates H = decode_hidden(p.spec, V.cols(), code);
  acc.add(log_joint(p, V, H, Y), log_q(q, V, H, Y));
}

EnumerationSums finish(const Partial& acc) {
  return {acc.joint.value(), acc.post.value(), acc.elbo};
}

}  // namespace

int hidden_bits(const ModelSpec& spec, Index frames) {
  Index bits = 0;
  for (int j : spec.dims.layer_sizes) bits += j * frames;
  return static_cast<int>(bits);
}

HiddenStates decode_hidden(const ModelSpec& spec, Index frames, std::uint64_t code) {
  HiddenStates H = zero_hidden(spec, frames);
  int bit = 0;
  for (auto& layer : H.layers)
    for (Index t = 0; t < frames; ++t)
      for (Index j = 0; j < layer.rows(); ++j, ++bit) layer(j, t) = (code >> bit) & 1u ? 1.0 : 0.0;
  return H;
}

EnumerationSums enumerate_sums_serial(const GenerativeParams& p, const RecognitionParams& q,
                                      const Matrix& V, const Matrix& Y) {
  check_enumerable(p.spec, V.cols());
  const std::uint64_t total = std::uint64_t{1} << hidden_bits(p.spec, V.cols());
  Partial acc;
  for (std::uint64_t code = 0; code < total; ++code) evaluate(p, q, V, Y, code, acc);
  return finish(acc);
}

EnumerationSums enumerate_sums(const GenerativeParams& p, const RecognitionParams& q,
                               const Matrix& V, const Matrix& Y, Policy policy) {
  check_enumerable(p.spec, V.cols());
  const std::uint64_t total = std::uint64_t{1} << hidden_bits(p.spec, V.cols());
  constexpr std::uint64_t kChunk = 256;
  const Index chunks = static_cast<Index>((total + kChunk - 1) / kChunk);
  std::vector<Partial> parts(chunks);
  for_each_index(chunks, policy, [&](Index c) {
    const std::uint64_t begin = static_cast<std::uint64_t>(c) * kChunk;
    const std::uint64_t end = std::min(total, begin + kChunk);
    for (std::uint64_t code = begin; code < end; ++code) evaluate(p, q, V, Y, code, parts[c]);
  });
  Partial acc;
  for (const Partial& part : parts) acc.merge(part);
  return finish(acc);
}

MonteCarloEstimate monte_carlo_elbo(const GenerativeParams& p, const RecognitionParams& q,
                                    const Matrix& V, const Matrix& Y, Index samples,
                                    const Rng& rng, Policy policy) {
  if (samples < 2) throw ValueError("monte_carlo_elbo: need at least two samples");
  std::vector<double> values(samples);
  for_each_index(samples, policy, [&](Index i) {
    Rng r = rng.fork(static_cast<std::uint64_t>(i));
    const HiddenStates H = sample_posterior(q, V, Y, r);
    values[i] = log_joint(p, V, H, Y) - log_q(q, V, H, Y);
  });
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(samples);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(samples - 1);
  return {mean, std::sqrt(var / static_cast<double>(samples)), samples};
}

AuditInstance make_audit_instance(int index, std::uint64_t seed) {
  Rng rng(splitmix64(seed ^ static_cast<std::uint64_t>(index)), 0xA0D1);
  AuditInstance out;
  ModelSpec spec;
  spec.dims.order = 1;
  if (index % 2 == 1) {
    spec.obs = ObsKind::Real;
    spec.factored = false;
    spec.dims.visible = 4;
    spec.dims.styles = 1;
    spec.dims.layer_sizes = {3};
    const Index frames = 4;
    const Index M = spec.dims.visible;
    const Index J = spec.dims.hidden();
    const double var = 0.5;

    GenerativeParams p = make_generative(spec);
    Matrix g(M, M);
    for (Index i = 0; i < g.size(); ++i) g.data()[i] = rng.normal();
    const Matrix basis = Eigen::HouseholderQR<Matrix>(g).householderQ();
    Matrix w2 = basis.leftCols(J);
    for (Index j = 0; j < J; ++j) w2.col(j) *= 0.5 + rng.uniform();
    p.emission.w2.tensor() = w2;
    for (Index i = 0; i < M; ++i) p.emission.c(i, 0) = rng.normal();
    p.emission.c_var->setConstant(std::log(var));
    for (Index j = 0; j < J; ++j) p.layers[0].bias(j, 0) = rng.normal();

    RecognitionParams q = make_recognition(spec);
    const Matrix u2 = w2.transpose() / var;
    q.layers[0].lower_now.tensor() = u2;
    const Vector gram = (w2.transpose() * w2).diagonal() / var;
    q.layers[0].bias = p.layers[0].bias - u2 * p.emission.c - 0.5 * gram;

    // Observations drawn from the model itself.
    Matrix V(M, frames);
    for (Index t = 0; t < frames; ++t) {
      Vector h(J);
      for (Index j = 0; j < J; ++j) h[j] = rng.bernoulli(sigmoid(p.layers[0].bias(j, 0))) ? 1.0 : 0.0;
      const Vector mu = w2 * h + p.emission.c.col(0);
      for (Index i = 0; i < M; ++i) V(i, t) = rng.normal(mu[i], std::sqrt(var));
    }
    out.label = "exact-posterior/" + std::to_string(index);
    out.p = std::move(p);
    out.q = std::move(q);
    out.V = std::move(V);
    out.Y = Matrix::Ones(1, frames);
    out.exact_posterior = true;
    return out;
  }

  const int variant = index / 2;
  const ObsKind kinds[] = {ObsKind::Real, ObsKind::Binary, ObsKind::Count};
  spec.obs = kinds[variant % 3];
  spec.factored = variant % 2 == 0;
  spec.dims.visible = 3;
  spec.dims.styles = 2;
  spec.dims.factors = 2;
  const bool deep = variant % 4 == 3;
  spec.dims.layer_sizes = deep ? std::vector<int>{2, 2} : std::vector<int>{3};
  const Index frames = deep ? 3 : 4;

  GenerativeParams p = make_generative(spec);
  randomize(p, rng, 0.7);
  RecognitionParams q = make_recognition(spec);
  randomize(q, rng, 0.7);
  Matrix V(spec.dims.visible, frames);
  for (Index i = 0; i < V.size(); ++i) {
    switch (spec.obs) {
      case ObsKind::Real:
        V.data()[i] = rng.normal();
        break;
      case ObsKind::Binary:
        V.data()[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
        break;
      case ObsKind::Count:
        V.data()[i] = static_cast<double>(rng.next_u32() % 4);
        break;
    }
  }
  Matrix Y(spec.dims.styles, frames);
  for (Index t = 0; t < frames; ++t) {
    const double a = rng.uniform();
    Y(0, t) = a;
    Y(1, t) = 1.0 - a;
  }
  out.label = std::string(to_string(spec.obs)) + (spec.factored ? "/factored" : "/dense") +
              (deep ? "/L2/" : "/L1/") + std::to_string(index);
  out.p = std::move(p);
  out.q = std::move(q);
  out.V = std::move(V);
  out.Y = std::move(Y);
  return out;
}

}  // namespace fctsbn
