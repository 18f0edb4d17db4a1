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

#include <cmath>
#include <vector>

#include "fctsbn/audit.hpp"
#include "fctsbn/model.hpp"
#include "fctsbn/recognition.hpp"
#include "fixtures.hpp"

using namespace fctsbn;

namespace {

// Unconditional model assembled from style s of a dense conditional model.
GenerativeParams slice_model(const GenerativeParams& p, Index s) {
  ModelSpec one = p.spec;
  one.dims.styles = 1;
  GenerativeParams q = make_generative(one);
  auto take = [s](const CondWeight& from, CondWeight& to) { to.tensor() = from.slice(s); };
  for (std::size_t k = 0; k < p.layers.size(); ++k) {
    take(p.layers[k].self_lag, q.layers[k].self_lag);
    if (p.layers[k].lower_lag) take(*p.layers[k].lower_lag, *q.layers[k].lower_lag);
    if (p.layers[k].top_down) take(*p.layers[k].top_down, *q.layers[k].top_down);
    q.layers[k].bias = p.layers[k].bias.col(s);
  }
  take(p.emission.w2, q.emission.w2);
  if (p.emission.w4) take(*p.emission.w4, *q.emission.w4);
  q.emission.c = p.emission.c.col(s);
  if (p.emission.w2_var) take(*p.emission.w2_var, *q.emission.w2_var);
  if (p.emission.w4_var) take(*p.emission.w4_var, *q.emission.w4_var);
  if (p.emission.c_var) *q.emission.c_var = p.emission.c_var->col(s);
  return q;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("zero weights give even prior odds") {
  const GenerativeParams p = make_generative(fixture::spec(ObsKind::Real, true, 3, 2, {4}));
  const Vector a = hidden_prior_logits(p, Vector::Zero(4), Vector::Zero(3), Vector::Ones(2) / 2);
  CHECK(a.cwiseAbs().maxCoeff() == 0.0);
  CHECK(sigmoid(a)[0] == 0.5);
}

TEST_CASE("prior logits match the dense-slice oracle") {
  Rng rng(21);
  GenerativeParams p = make_generative(fixture::spec(ObsKind::Real, false, 2, 2, {2}, 2));
  randomize(p, rng, 1.0);
  const Matrix V = oracle::random_matrix(2, 5, rng);
  const Matrix H = oracle::random_binary(2, 5, rng);
  const Matrix Y = oracle::random_mixture(2, 5, rng);
  for (Index t = 0; t < 5; ++t) {
    const Vector a = hidden_prior_logits(p, lag_window(H, t, 2), lag_window(V, t, 2), Y.col(t));
    CHECK((a - oracle::prior_logits(p, V, H, Y, t)).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("hidden-Markov variant ignores visible lags") {
  Rng rng(22);
  GenerativeParams p = make_generative(fixture::spec(ObsKind::Real, true, 3, 2, {3}, 1, 2, true));
  randomize(p, rng, 1.0);
  CHECK_FALSE(p.layers[0].lower_lag.has_value());
  CHECK_FALSE(p.emission.w4.has_value());
  Matrix V = oracle::random_matrix(3, 4, rng);
  const HiddenStates H = fixture::hidden(p.spec, 4, rng);
  const Matrix Y = oracle::random_mixture(2, 4, rng);
  const Vector h_lags = lag_window(H.layers[0], 2, 1);
  const Vector a1 = hidden_prior_logits(p, h_lags, lag_window(V, 2, 1), Y.col(2));
  const Vector a2 = hidden_prior_logits(p, h_lags, Vector::Constant(3, 100.0), Y.col(2));
  CHECK((a1 - a2).cwiseAbs().maxCoeff() == 0.0);
  // With W3 = W4 = 0, the joint of a dense model does not depend on
  // previous visibles either.
  GenerativeParams d = make_generative(fixture::spec(ObsKind::Real, true, 3, 2, {3}));
  randomize(d, rng, 1.0);
  d.layers[0].lower_lag->a().setZero();
  d.emission.w4->a().setZero();
  d.emission.w4_var->a().setZero();
  double base = 0.0;
  for (Index t = 0; t < 4; ++t) base += step_log_prior(d, 0, t, V, H, Y);
  V.col(0).setConstant(7.0);
  double moved = 0.0;
  for (Index t = 0; t < 4; ++t) moved += step_log_prior(d, 0, t, V, H, Y);
  CHECK(base == doctest::Approx(moved).epsilon(1e-14));
}

TEST_CASE("gaussian emission") {
  Rng rng(23);
  GenerativeParams p = make_generative(fixture::spec(ObsKind::Real, true, 3, 2, {2}));
  const GaussianEmission z = emission_gaussian(p, Vector::Ones(2), Vector::Ones(3), Vector::Ones(2) / 2);
  CHECK(z.mean.cwiseAbs().maxCoeff() == 0.0);
  CHECK(z.log_var.cwiseAbs().maxCoeff() == 0.0);

  p.emission.c = oracle::random_matrix(3, 2, rng);
  Vector e1 = Vector::Zero(2);
  e1[1] = 1.0;
  const GaussianEmission c = emission_gaussian(p, Vector::Zero(2), Vector::Zero(3), e1);
  CHECK((c.mean - p.emission.c.col(1)).cwiseAbs().maxCoeff() == 0.0);

  randomize(p, rng, 1.0);
  const Vector h = oracle::random_binary(2, 1, rng).col(0);
  const Vector vl = oracle::random_matrix(3, 1, rng).col(0);
  const Vector y = oracle::random_mixture(2, 1, rng).col(0);
  const GaussianEmission g = emission_gaussian(p, h, vl, y);
  const Vector mu = oracle::bias(p.emission.c, y) + oracle::apply(p.emission.w2, y, h) +
                    oracle::apply(*p.emission.w4, y, vl);
  const Vector lv = oracle::bias(*p.emission.c_var, y) + oracle::apply(*p.emission.w2_var, y, h) +
                    oracle::apply(*p.emission.w4_var, y, vl);
  CHECK((g.mean - mu).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((g.log_var - lv).cwiseAbs().maxCoeff() < 1e-13);

  p.emission.c_var->setConstant(50.0);
  CHECK(emission_gaussian(p, h, vl, y).log_var.maxCoeff() == kLogVarMax);
  p.emission.c_var->setConstant(-50.0);
  CHECK(emission_gaussian(p, h, vl, y).log_var.minCoeff() == kLogVarMin);
}

TEST_CASE("binary emission") {
  Rng rng(24);
  GenerativeParams p = make_generative(fixture::spec(ObsKind::Binary, false, 3, 2, {2}));
  const Vector y = Vector::Ones(2) / 2;
  CHECK((emission_binary(p, Vector::Ones(2), Vector::Ones(3), y).array() == 0.5).all());
  p.emission.c.setConstant(20.0);
  CHECK((1.0 - emission_binary(p, Vector::Zero(2), Vector::Zero(3), y).array()).maxCoeff() < 1e-8);
  randomize(p, rng, 1.0);
  const Vector h = oracle::random_binary(2, 1, rng).col(0);
  const Vector vl = oracle::random_binary(3, 1, rng).col(0);
  const Vector pre = oracle::bias(p.emission.c, y) + oracle::apply(p.emission.w2, y, h) +
                     oracle::apply(*p.emission.w4, y, vl);
  const Vector prob = emission_binary(p, h, vl, y);
  for (Index i = 0; i < 3; ++i) CHECK(prob[i] == doctest::Approx(oracle::sigmoid(pre[i])).epsilon(1e-14));
  CHECK_THROWS_AS(emission_gaussian(p, h, vl, y), ValueError);
}

TEST_CASE("count emission") {
  Rng rng(25);
  GenerativeParams p = make_generative(fixture::spec(ObsKind::Count, true, 4, 2, {3}));
  const Vector y = Vector::Ones(2) / 2;
  const Vector u = emission_count(p, Vector::Ones(3), Vector::Ones(4), y);
  for (Index i = 0; i < 4; ++i) CHECK(u[i] == doctest::Approx(0.25).epsilon(1e-15));

  randomize(p, rng, 1.0);
  const Vector h = oracle::random_binary(3, 1, rng).col(0);
  const Vector vl = fixture::observations(ObsKind::Count, 4, 1, rng).col(0);
  const Vector s = emission_count(p, h, vl, y);
  CHECK(std::abs(s.sum() - 1.0) < 1e-12);
  const Vector pre = oracle::bias(p.emission.c, y) + oracle::apply(p.emission.w2, y, h) +
                     oracle::apply(*p.emission.w4, y, vl);
  CHECK((s - oracle::naive_softmax(pre)).cwiseAbs().maxCoeff() < 1e-14);
  // Shift invariance: a constant added through C.
  GenerativeParams shifted = p;
  shifted.emission.c.array() += 3.5;
  CHECK((emission_count(shifted, h, vl, y) - s).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("log joint closed form") {
  const GenerativeParams p = make_generative(fixture::spec(ObsKind::Real, false, 1, 1, {1}));
  HiddenStates H;
  H.layers.push_back(Matrix::Zero(1, 1));
  const double lj = log_joint(p, Matrix::Zero(1, 1), H, Matrix::Ones(1, 1));
  CHECK(lj == doctest::Approx(-1.612086).epsilon(1e-6));
  CHECK(lj == doctest::Approx(std::log(0.5) - 0.5 * std::log(2 * M_PI)).epsilon(1e-15));
}

TEST_CASE("log joint rejects non-binary hidden states") {
  const GenerativeParams p = make_generative(fixture::spec(ObsKind::Real, true, 2, 1, {2}));
  HiddenStates H;
  H.layers.push_back(Matrix::Constant(2, 3, 0.5));
  CHECK_THROWS_AS(log_joint(p, Matrix::Zero(2, 3), H, Matrix::Ones(1, 3)), ValueError);
}

TEST_CASE("log joint matches per-step oracle densities") {
  Rng rng(26);
  for (ObsKind obs : {ObsKind::Real, ObsKind::Binary, ObsKind::Count}) {
    GenerativeParams p = make_generative(fixture::spec(obs, true, 3, 2, {3}, 2));
    randomize(p, rng, 0.7);
    const Matrix V = fixture::observations(obs, 3, 4, rng);
    const HiddenStates H = fixture::hidden(p.spec, 4, rng);
    const Matrix Y = oracle::random_mixture(2, 4, rng);
    double expect = 0.0;
    for (Index t = 0; t < 4; ++t) {
      expect += oracle::bernoulli_log_pmf(oracle::prior_logits(p, V, H.layers[0], Y, t), H.layers[0].col(t));
      expect += oracle::emission_log_density(p, V, H.layers[0].col(t), Y, t);
    }
    CHECK(log_joint(p, V, H, Y) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("enumerated marginal equals the forward algorithm") {
  Rng rng(27);
  for (ObsKind obs : {ObsKind::Real, ObsKind::Binary, ObsKind::Count}) {
    GenerativeParams p = make_generative(fixture::spec(obs, obs != ObsKind::Binary, 2, 2, {3}));
    randomize(p, rng, 0.8);
    const RecognitionParams q = make_recognition(p.spec);
    const Matrix V = fixture::observations(obs, 2, 3, rng);
    const Matrix Y = oracle::random_mixture(2, 3, rng);
    const EnumerationSums sums = enumerate_sums_serial(p, q, V, Y);
    CHECK(sums.log_marginal == doctest::Approx(oracle::forward_log_marginal(p, V, Y)).epsilon(1e-11));
  }
}

TEST_CASE("one-hot side information equals the unconditional slice model") {
  Rng rng(28);
  GenerativeParams p = make_generative(fixture::spec(ObsKind::Real, false, 3, 3, {2, 2}, 2));
  randomize(p, rng, 0.7);
  const Matrix V = oracle::random_matrix(3, 5, rng);
  const HiddenStates H = fixture::hidden(p.spec, 5, rng);
  for (Index s = 0; s < 3; ++s) {
    Matrix Y = Matrix::Zero(3, 5);
    Y.row(s).setOnes();
    const GenerativeParams u = slice_model(p, s);
    CHECK(log_joint(p, V, H, Y) == doctest::Approx(log_joint(u, V, H, Matrix::Ones(1, 5))).epsilon(1e-13));
    for (int k = 0; k < 2; ++k) {
      const PriorInputs in = prior_inputs(p.spec, k, 3, V, H);
      const Vector a = hidden_prior_logits(p, k, in.self_lags, in.lower_lags, in.above, Y.col(3));
      const Vector b = hidden_prior_logits(u, k, in.self_lags, in.lower_lags, in.above, Vector::Ones(1));
      CHECK((a - b).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("zero model generates unit white noise") {
  const GenerativeParams p = make_generative(fixture::spec(ObsKind::Real, true, 2, 1, {3}));
  Rng rng(29);
  const Index T = 10000;
  const GeneratedSequence g = generate(p, Matrix(), constant_schedule(1, 0, T), T, rng);
  CHECK(g.seed_padded);
  for (Index i = 0; i < 2; ++i) {
    const double m = g.V.row(i).mean();
    const double v = (g.V.row(i).array() - m).square().mean();
    CHECK(std::abs(m) < 0.05);
    CHECK(std::abs(v - 1.0) < 0.05);
  }
}

TEST_CASE("generation is deterministic and validates its schedule") {
  Rng init(30);
  GenerativeParams p = make_generative(fixture::spec(ObsKind::Binary, true, 3, 2, {3, 2}, 2));
  randomize(p, init, 1.0);
  const StyleSchedule sch = transition_schedule(2, {0, 1, 20.0, 5.0}, 40);
  Rng a(31), b(31);
  const GeneratedSequence ga = generate(p, Matrix::Zero(3, 2), sch, 40, a);
  const GeneratedSequence gb = generate(p, Matrix::Zero(3, 2), sch, 40, b);
  CHECK(ga.V == gb.V);
  CHECK(ga.H.layers[1] == gb.H.layers[1]);
  CHECK_FALSE(ga.seed_padded);
  Rng c(31);
  CHECK_THROWS_AS(generate(p, Matrix(), sch, 41, c), ValueError);
}

TEST_CASE("count generation draws the requested total") {
  Rng rng(32);
  GenerativeParams p = make_generative(fixture::spec(ObsKind::Count, true, 4, 1, {3}));
  randomize(p, rng, 1.0);
  GenerateOptions opt;
  opt.count_total = 7;
  const GeneratedSequence g = generate(p, Matrix(), constant_schedule(1, 0, 20), 20, rng, opt);
  for (Index t = 0; t < 20; ++t) CHECK(g.V.col(t).sum() == 7.0);
}

TEST_CASE("prediction of a zero model is C y") {
  GenerativeParams p = make_generative(fixture::spec(ObsKind::Real, true, 3, 2, {2}));
  const RecognitionParams q = make_recognition(p.spec);
  Rng rng(33);
  const Matrix hist = oracle::random_matrix(3, 4, rng);
  const Matrix yh = oracle::random_mixture(2, 4, rng);
  Vector yt(2);
  yt << 0.3, 0.7;
  CHECK(predict_next(p, q, hist, yh, yt, 5, rng).cwiseAbs().maxCoeff() == 0.0);
  p.emission.c = oracle::random_matrix(3, 2, rng);
  CHECK((predict_next(p, q, hist, yh, yt, 5, rng) - p.emission.c * yt).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("prediction converges to the enumerated posterior mixture") {
  Rng rng(34);
  GenerativeParams p = make_generative(fixture::spec(ObsKind::Real, true, 2, 2, {2}));
  randomize(p, rng, 1.0);
  RecognitionParams q = make_recognition(p.spec);
  randomize(q, rng, 1.0);
  const Index T = 2;
  const Matrix hist = oracle::random_matrix(2, T, rng);
  const Matrix yh = oracle::random_mixture(2, T, rng);
  const Vector yt = oracle::random_mixture(2, 1, rng).col(0);

  // Exact: sum over h_{0:T-1} of q(h) * E[v_T | h_{T-1}, v_{T-1}, y_T].
  Vector exact = Vector::Zero(2);
  Matrix Vx(2, T + 1);
  Vx.leftCols(T) = hist;
  Vx.col(T).setZero();
  Matrix Yx(2, T + 1);
  Yx.leftCols(T) = yh;
  Yx.col(T) = yt;
  for (std::uint64_t code = 0; code < 16; ++code) {
    HiddenStates H;
    H.layers.push_back(Matrix::Zero(2, T));
    for (Index t = 0; t < T; ++t) H.layers[0].col(t) = oracle::bits(2, code >> (2 * t));
    const double w = std::exp(log_q(q, hist, H, yh));
    Matrix Hx = Matrix::Zero(2, T + 1);
    Hx.leftCols(T) = H.layers[0];
    const Vector prob = oracle::prior_logits(p, Vx, Hx, Yx, T).unaryExpr([](double a) { return oracle::sigmoid(a); });
    const Vector mean = oracle::bias(p.emission.c, yt) + oracle::apply(p.emission.w2, yt, prob) +
                        oracle::apply(*p.emission.w4, yt, hist.col(T - 1));
    exact += w * mean;
  }

  const int n = 100000;
  std::vector<double> d0(n), d1(n);
  const Rng base(35);
  for (int i = 0; i < n; ++i) {
    Rng r = base.fork(i);
    const Vector v = predict_next(p, q, hist, yh, yt, 1, r);
    d0[i] = v[0];
    d1[i] = v[1];
  }
  CHECK(std::abs(oracle::mean(d0) - exact[0]) <= 3.0 * oracle::std_error(d0));
  CHECK(std::abs(oracle::mean(d1) - exact[1]) <= 3.0 * oracle::std_error(d1));
  Rng r1(36), r2(36);
  CHECK(predict_next(p, q, hist, yh, yt, 4, r1) == predict_next(p, q, hist, yh, yt, 4, r2));
}

}  // TEST_SUITE
