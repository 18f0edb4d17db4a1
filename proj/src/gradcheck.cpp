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

#include "fctsbn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "fctsbn/model.hpp"
#include "fctsbn/nvil.hpp"
#include "fctsbn/recognition.hpp"

namespace fctsbn {

namespace {

Matrix random_matrix(Index rows, Index cols, Rng& rng, double sd = 1.0) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal(0.0, sd);
  return m;
}

Matrix random_binary(Index rows, Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.bernoulli(0.5) ? 1.0 : 0.0;
  return m;
}

// Strictly positive convex mixtures so that every style slice is exercised.
Matrix random_mixture(Index styles, Index frames, Rng& rng) {
  Matrix y(styles, frames);
  for (Index t = 0; t < frames; ++t) {
    for (Index s = 0; s < styles; ++s) y(s, t) = 0.2 + rng.uniform();
    y.col(t) /= y.col(t).sum();
  }
  return y;
}

}  // namespace

bool GradCheckReport::pass() const {
  return std::all_of(tensors.begin(), tensors.end(), [](const TensorCheck& t) { return t.pass; });
}

double GradCheckReport::max_error() const {
  double e = 0.0;
  for (const auto& t : tensors) e = std::max(e, t.max_error);
  return e;
}

GradCheckReport check_gradients(const std::string& label, std::vector<TensorRef> params,
                                const std::vector<ConstTensorRef>& analytic,
                                const std::function<double()>& f, const GradCheckOptions& options,
                                Rng& rng) {
  if (params.size() != analytic.size()) throw ShapeError("gradcheck: tensor lists differ");
  GradCheckReport report;
  report.label = label;
  const double floor = options.atol / options.rtol;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& x = *params[i].data;
    const Matrix& g = *analytic[i].data;
    TensorCheck tc;
    tc.name = params[i].name;
    const Index size = x.size();
    std::vector<Index> coords;
    if (size <= options.probes) {
      for (Index k = 0; k < size; ++k) coords.push_back(k);
    } else {
      while (static_cast<int>(coords.size()) < options.probes) {
        const Index k = static_cast<Index>(rng.next_u64() % static_cast<std::uint64_t>(size));
        if (std::find(coords.begin(), coords.end(), k) == coords.end()) coords.push_back(k);
      }
    }
    for (Index k : coords) {
      double* v = x.data() + k;
      const double saved = *v;
      *v = saved + options.step;
      const double up = f();
      *v = saved - options.step;
      const double down = f();
      *v = saved;
      const double fd = (up - down) / (2.0 * options.step);
      double an = g.data()[k];
      if (!options.corrupt.empty() && tc.name == options.corrupt) an += 1e-3 * (1.0 + std::abs(an));
      const double err = std::abs(an - fd) / std::max(std::abs(fd), floor);
      tc.max_error = std::max(tc.max_error, std::isfinite(err) ? err : INFINITY);
      ++tc.probes;
    }
    tc.pass = tc.max_error <= options.rtol;
    report.tensors.push_back(std::move(tc));
  }
  return report;
}

GradCheckReport check_model_gradients(GenerativeParams p, const Matrix& V, const HiddenStates& H,
                                      const Matrix& Y, const GradCheckOptions& options, Rng& rng) {
  GenerativeParams g = p.zeros_like();
  accumulate_model_gradients(p, V, H, Y, g);
  return check_gradients("model", p.tensors(), std::as_const(g).tensors(),
                         [&] { return log_joint(p, V, H, Y); }, options, rng);
}

GradCheckReport check_recognition_gradients(RecognitionParams q, const Matrix& V,
                                            const HiddenStates& H, const Matrix& Y,
                                            const Matrix& weights, const GradCheckOptions& options,
                                            Rng& rng) {
  RecognitionParams g = q.zeros_like();
  accumulate_recognition_gradients(q, V, H, Y, weights, g);
  auto f = [&] {
    double acc = 0.0;
    for (Index t = 0; t < V.cols(); ++t)
      for (int k = 0; k < q.spec.dims.layers(); ++k) acc += weights(k, t) * step_log_q(q, k, t, V, H, Y);
    return acc;
  };
  return check_gradients("recognition", q.tensors(), std::as_const(g).tensors(), f, options, rng);
}

GradCheckReport check_baseline_gradients(BaselineParams b, const Vector& x,
                                         const GradCheckOptions& options, Rng& rng) {
  BaselineParams g = b.zeros_like();
  baseline_accumulate_gradient(b, x, 1.0, g);
  return check_gradients("baseline", b.tensors(), std::as_const(g).tensors(),
                         [&] { return baseline_eval(b, x); }, options, rng);
}

GradCheckReport check_classifier_gradients(ClassifierParams c, const Vector& window, int style,
                                           double alpha, const GradCheckOptions& options, Rng& rng) {
  ClassifierParams g = c.zeros_like();
  classifier_accumulate_gradient(c, window, style, alpha, g);
  return check_gradients("classifier", c.tensors(), std::as_const(g).tensors(),
                         [&] { return alpha * classifier_log_prob(c, window, style); }, options, rng);
}

std::string SuiteCase::label() const {
  return std::string(to_string(obs)) + (factored ? "/factored" : "/dense") + "/n" +
         std::to_string(order) + "/L" + std::to_string(layers);
}

std::vector<SuiteCase> gradcheck_grid() {
  std::vector<SuiteCase> out;
  for (ObsKind obs : {ObsKind::Real, ObsKind::Binary, ObsKind::Count})
    for (bool factored : {false, true})
      for (int order : {1, 3})
        for (int layers : {1, 2}) out.push_back({obs, factored, order, layers});
  return out;
}

std::vector<GradCheckReport> run_case(const SuiteCase& c, std::uint64_t seed,
                                      const GradCheckOptions& options) {
  Rng rng(seed, 0x6C);
  ModelSpec spec;
  spec.obs = c.obs;
  spec.factored = c.factored;
  spec.dims.visible = 3;
  spec.dims.styles = 2;
  spec.dims.factors = 2;
  spec.dims.order = c.order;
  spec.dims.layer_sizes = c.layers == 1 ? std::vector<int>{3} : std::vector<int>{3, 2};
  const Index frames = 5;

  GenerativeParams p = make_generative(spec);
  randomize(p, rng, 0.4);
  RecognitionParams q = make_recognition(spec);
  randomize(q, rng, 0.4);
  Matrix V;
  switch (c.obs) {
    case ObsKind::Real:
      V = random_matrix(spec.dims.visible, frames, rng);
      break;
    case ObsKind::Binary:
      V = random_binary(spec.dims.visible, frames, rng);
      break;
    case ObsKind::Count:
      V = Matrix(spec.dims.visible, frames);
      for (Index j = 0; j < frames; ++j)
        for (Index i = 0; i < V.rows(); ++i) V(i, j) = static_cast<double>(rng.next_u32() % 4);
      break;
  }
  const Matrix Y = random_mixture(spec.dims.styles, frames, rng);
  HiddenStates H;
  for (int j : spec.dims.layer_sizes) H.layers.push_back(random_binary(j, frames, rng));
  const Matrix weights = random_matrix(spec.dims.layers(), frames, rng);

  std::vector<GradCheckReport> out;
  out.push_back(check_model_gradients(p, V, H, Y, options, rng));
  out.push_back(check_recognition_gradients(q, V, H, Y, weights, options, rng));
  for (auto& r : out) r.label = c.label() + "/" + r.label;
  return out;
}

std::vector<GradCheckReport> run_gradcheck_suite(std::uint64_t seed, const GradCheckOptions& options) {
  std::vector<GradCheckReport> out;
  std::uint64_t i = 0;
  for (const SuiteCase& c : gradcheck_grid())
    for (auto& r : run_case(c, splitmix64(seed + ++i), options)) out.push_back(std::move(r));

  Rng rng(seed, 0xBA5E);
  BaselineParams b = make_baseline(7, 12);
  for (auto& t : b.tensors()) *t.data = random_matrix(t.data->rows(), t.data->cols(), rng, 0.5);
  out.push_back(check_baseline_gradients(b, random_matrix(7, 1, rng).col(0), options, rng));

  ClassifierParams cl = make_classifier(3, 2, 2);
  for (auto& t : cl.tensors()) *t.data = random_matrix(t.data->rows(), t.data->cols(), rng, 0.5);
  out.push_back(check_classifier_gradients(cl, random_matrix(4, 1, rng).col(0), 1, 4.0, options, rng));
  return out;
}

}  // namespace fctsbn
