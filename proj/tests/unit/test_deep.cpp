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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fctsbn/audit.hpp"
#include "fctsbn/deep.hpp"
#include "fctsbn/gradcheck.hpp"
#include "fctsbn/model.hpp"
#include "fctsbn/schedule.hpp"
#include "fixtures.hpp"

using namespace fctsbn;

namespace {

GenerativeParams random_model(const ModelSpec& spec, Rng& rng, double scale = 0.7) {
  GenerativeParams p = make_generative(spec);
  randomize(p, rng, scale);
  return p;
}

bool starts_with(const std::string& s, const std::string& pre) { return s.rfind(pre, 0) == 0; }

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

}  // namespace

TEST_SUITE("deep") {

TEST_CASE("one layer reduces to the shallow joint") {
  Rng rng(101);
  for (ObsKind obs : {ObsKind::Real, ObsKind::Binary, ObsKind::Count}) {
    const ModelSpec spec = fixture::spec(obs, true, 3, 2, {3}, 2);
    const GenerativeParams p = random_model(spec, rng);
    const Matrix V = fixture::observations(obs, 3, 5, rng);
    const HiddenStates H = fixture::hidden(spec, 5, rng);
    const Matrix Y = oracle::random_mixture(2, 5, rng);
    CHECK(deep_log_joint(p, V, H, Y) == log_joint(p, V, H, Y));
  }
  HiddenStates two;
  two.layers = {Matrix::Zero(3, 5), Matrix::Zero(2, 5)};
  const GenerativeParams p = random_model(fixture::spec(ObsKind::Real, true, 3, 2, {3}), rng);
  CHECK_THROWS_AS(deep_log_joint(p, Matrix::Zero(3, 5), two, Matrix::Ones(2, 5) * 0.5), ShapeError);
}

TEST_CASE("two-layer joint is normalized over all configurations") {
  Rng rng(102);
  const ModelSpec spec = fixture::spec(ObsKind::Binary, true, 2, 2, {2, 2});
  const GenerativeParams p = random_model(spec, rng, 1.0);
  const Matrix Y = oracle::random_mixture(2, 2, rng);
  double total = 0.0;
  for (std::uint64_t vc = 0; vc < 16; ++vc) {
    Matrix V(2, 2);
    for (Index i = 0; i < 4; ++i) V.data()[i] = static_cast<double>((vc >> i) & 1U);
    double inner = 0.0;
    for (std::uint64_t hc = 0; hc < 256; ++hc) {
      HiddenStates H;
      H.layers = {Matrix(2, 2), Matrix(2, 2)};
      for (Index i = 0; i < 4; ++i) H.layers[0].data()[i] = static_cast<double>((hc >> i) & 1U);
      for (Index i = 0; i < 4; ++i) H.layers[1].data()[i] = static_cast<double>((hc >> (4 + i)) & 1U);
      inner += std::exp(deep_log_joint(p, V, H, Y));
    }
    RecognitionParams q = make_recognition(spec);
    CHECK(enumerate_sums(p, q, V, Y).log_marginal == doctest::Approx(std::log(inner)).epsilon(1e-12));
    total += inner;
  }
  CHECK(std::abs(total - 1.0) < 1e-12);
}

TEST_CASE("zero top-down weights separate the layers") {
  Rng rng(103);
  const ModelSpec spec = fixture::spec(ObsKind::Real, false, 3, 2, {3, 2});
  GenerativeParams p = random_model(spec, rng);
  p.layers[0].top_down = p.layers[0].top_down->zeros_like();
  const Matrix V = oracle::random_matrix(3, 6, rng);
  const HiddenStates H = fixture::hidden(spec, 6, rng);
  const Matrix Y = oracle::random_mixture(2, 6, rng);

  GenerativeParams shallow = make_generative(fixture::spec(ObsKind::Real, false, 3, 2, {3}));
  shallow.emission = p.emission;
  shallow.layers[0].self_lag = p.layers[0].self_lag;
  shallow.layers[0].lower_lag = p.layers[0].lower_lag;
  shallow.layers[0].bias = p.layers[0].bias;
  HiddenStates bottom;
  bottom.layers = {H.layers[0]};
  double top = 0.0;
  const HiddenLayerParams& up = p.layers[1];
  for (Index t = 0; t < 6; ++t) {
    const Vector y = Y.col(t);
    const Vector logits = oracle::apply(up.self_lag, y, oracle::lags(H.layers[1], t, 1)) +
                          oracle::apply(*up.lower_lag, y, oracle::lags(H.layers[0], t, 1)) +
                          oracle::bias(up.bias, y);
    top += oracle::bernoulli_log_pmf(logits, H.layers[1].col(t));
  }
  CHECK(deep_log_joint(p, V, H, Y) == doctest::Approx(log_joint(shallow, V, bottom, Y) + top).epsilon(1e-12));
}

TEST_CASE("gradients of each term touch only their own layer") {
  Rng rng(104);
  const ModelSpec spec = fixture::spec(ObsKind::Real, true, 3, 2, {3, 2});
  const GenerativeParams p = random_model(spec, rng);
  const Matrix V = oracle::random_matrix(3, 5, rng);
  const HiddenStates H = fixture::hidden(spec, 5, rng);
  const Matrix Y = oracle::random_mixture(2, 5, rng);
  for (int term = -1; term < 2; ++term) {
    const GenerativeParams g = term_gradients(p, V, H, Y, term);
    const std::string own = term < 0 ? "emission/" : layer_prefix(term) + "/";
    double own_norm = 0.0;
    for (const auto& t : g.tensors()) {
      if (starts_with(t.name, own)) {
        own_norm += t.data->squaredNorm();
      } else {
        CHECK_MESSAGE(t.data->cwiseAbs().maxCoeff() == 0.0, t.name);
      }
    }
    CHECK(own_norm > 0.0);
  }
  GenerativeParams all = p.zeros_like();
  accumulate_model_gradients(p, V, H, Y, all);
  GenerativeParams sum = p.zeros_like();
  for (int term = -1; term < 2; ++term) add_scaled(sum, term_gradients(p, V, H, Y, term));
  const auto a = std::as_const(all).tensors();
  const auto s = std::as_const(sum).tensors();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK((*a[i].data - *s[i].data).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("layer tensor ownership") {
  Rng rng(105);
  const ModelSpec spec = fixture::spec(ObsKind::Real, true, 3, 2, {3, 2});
  GenerativeParams p = random_model(spec, rng);
  RecognitionParams q = make_recognition(spec);
  randomize(q, rng, 0.5);
  const std::vector<BaselineParams> b = make_baselines(spec, rng, 8);
  std::vector<SignalStats> stats;
  std::vector<Segment> batch{{oracle::random_matrix(3, 4, rng), oracle::random_mixture(2, 4, rng)}};
  const DeepResult r = deep_elbo_and_grads(p, q, b, stats, batch, rng);
  REQUIRE(r.layer_tensors.size() == 2);
  REQUIRE(stats.size() == 2);
  for (const auto& n : r.layer_tensors[1]) CHECK(n.find("layer2/") != std::string::npos);
  CHECK(std::find(r.layer_tensors[1].begin(), r.layer_tensors[1].end(), "recognition/layer2/E") !=
        r.layer_tensors[1].end());
  CHECK(r.batch.normalized_signals[0].rows() == 2);
}

TEST_CASE("one-layer stack matches the shallow estimator byte for byte") {
  Rng rng(106);
  const ModelSpec spec = fixture::spec(ObsKind::Count, true, 3, 2, {3});
  const GenerativeParams p = random_model(spec, rng, 0.5);
  RecognitionParams q = make_recognition(spec);
  randomize(q, rng, 0.5);
  const std::vector<BaselineParams> b = make_baselines(spec, rng, 8);
  std::vector<Segment> batch;
  for (int i = 0; i < 3; ++i)
    batch.push_back({fixture::observations(ObsKind::Count, 3, 5, rng), oracle::random_mixture(2, 5, rng)});
  std::vector<SignalStats> s1, s2;
  Rng r1(107), r2(107);
  const DeepResult d = deep_elbo_and_grads(p, q, b, s1, batch, r1);
  const MinibatchResult n = nvil_minibatch(p, q, b, s2, batch, r2);
  const auto a = std::as_const(d.batch.grads).tensors();
  const auto c = std::as_const(n.grads).tensors();
  REQUIRE(a.size() == c.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK_MESSAGE(*a[i].data == *c[i].data, a[i].name);
  CHECK(d.batch.elbo == n.elbo);
  CHECK(s1[0].mean == s2[0].mean);
}

TEST_CASE("two-layer gradients pass finite differences") {
  GradCheckOptions opt;
  for (bool factored : {false, true}) {
    for (const auto& rep : run_case({ObsKind::Real, factored, 1, 2}, 108, opt))
      CHECK_MESSAGE(rep.pass(), rep.label);
  }
}

TEST_CASE("two-layer bound sits below the marginal") {
  for (int index : {6, 14}) {
    const AuditInstance a = make_audit_instance(index, 109);
    REQUIRE(a.p.spec.dims.layers() == 2);
    const EnumerationSums s = enumerate_sums(a.p, a.q, a.V, a.Y);
    CHECK(s.exact_elbo <= s.log_marginal);
    CHECK(std::abs(s.log_q_mass) < 1e-9);
  }
}

TEST_CASE("deep generation") {
  Rng rng(110);
  const ModelSpec spec1 = fixture::spec(ObsKind::Real, true, 2, 2, {3});
  const GenerativeParams p1 = random_model(spec1, rng);
  const StyleSchedule sched = transition_schedule(2, {}, 30);
  Rng a(111), b(111);
  const GeneratedSequence g1 = deep_generate(p1, Matrix(), {}, sched, 30, a);
  const GeneratedSequence g2 = generate(p1, Matrix(), sched, 30, b);
  CHECK(g1.V == g2.V);
  CHECK(g1.H.layers[0] == g2.H.layers[0]);

  const GenerativeParams p2 = random_model(fixture::spec(ObsKind::Binary, false, 2, 2, {3, 2}), rng);
  Rng c(112), d(112);
  const GeneratedSequence h1 = deep_generate(p2, Matrix(), {}, sched, 30, c);
  const GeneratedSequence h2 = deep_generate(p2, Matrix(), {}, sched, 30, d);
  CHECK(h1.V == h2.V);
  CHECK(h1.H.layers[1] == h2.H.layers[1]);
  CHECK(h1.H.layers[1].cols() == 30);
}

TEST_CASE("decoupled upper layer leaves visible statistics unchanged") {
  Rng rng(113);
  const ModelSpec deep_spec = fixture::spec(ObsKind::Real, true, 2, 2, {3, 2});
  GenerativeParams deep = random_model(deep_spec, rng);
  deep.layers[0].top_down = deep.layers[0].top_down->zeros_like();
  GenerativeParams shallow = make_generative(fixture::spec(ObsKind::Real, true, 2, 2, {3}));
  shallow.emission = deep.emission;
  shallow.layers[0].self_lag = deep.layers[0].self_lag;
  shallow.layers[0].lower_lag = deep.layers[0].lower_lag;
  shallow.layers[0].bias = deep.layers[0].bias;
  const StyleSchedule sched = constant_schedule(2, 1, 6);
  const int n = 10000;
  std::vector<double> xs, ys;
  Rng ra(114), rb(115);
  for (int i = 0; i < n; ++i) {
    xs.push_back(deep_generate(deep, Matrix(), {}, sched, 6, ra).V(0, 5));
    ys.push_back(generate(shallow, Matrix(), sched, 6, rb).V(0, 5));
  }
  // alpha = 0.01 critical value for two samples of size n.
  CHECK(ks_statistic(xs, ys) < 1.628 * std::sqrt(2.0 / n));
}

}  // TEST_SUITE
