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

#include "fctsbn/model.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

namespace fctsbn {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

void require_obs(const GenerativeParams& p, ObsKind kind, const char* what) {
  if (p.spec.obs != kind) {
    throw ValueError(std::string(what) + ": model observes " + std::string(to_string(p.spec.obs)) +
                     " data");
  }
}

Vector log_softmax(const Vector& a) {
  const double top = a.maxCoeff();
  const double lse = top + std::log((a.array() - top).exp().sum());
  return a.array() - lse;
}

// Copies `seed` (rows x k, oldest first) into the last k of the first
// `order` columns of `ext`.
bool place_seed(const Matrix& seed, int order, Matrix& ext, const char* what) {
  if (seed.size() == 0) return order > 0;
  check_size(seed.rows(), ext.rows(), what);
  const Index k = std::min<Index>(seed.cols(), order);
  ext.middleCols(order - k, k) = seed.rightCols(k);
  return k < order;
}

Vector sample_emission(const GenerativeParams& p, const Vector& h, const Vector& v_lags,
                       const Vector& y, int count_total, Rng& rng) {
  const Index m = p.spec.dims.visible;
  Vector v(m);
  switch (p.spec.obs) {
    case ObsKind::Real: {
      const GaussianEmission g = emission_gaussian(p, h, v_lags, y);
      for (Index i = 0; i < m; ++i) v[i] = rng.normal(g.mean[i], std::exp(0.5 * g.log_var[i]));
      break;
    }
    case ObsKind::Binary: {
      const Vector prob = emission_binary(p, h, v_lags, y);
      for (Index i = 0; i < m; ++i) v[i] = rng.bernoulli(prob[i]) ? 1.0 : 0.0;
      break;
    }
    case ObsKind::Count: {
      const Vector s = emission_count(p, h, v_lags, y);
      v.setZero();
      const std::span<const double> w(s.data(), static_cast<std::size_t>(m));
      for (int c = 0; c < count_total; ++c) v[static_cast<Index>(rng.categorical(w))] += 1.0;
      break;
    }
  }
  return v;
}

}  // namespace

Vector hidden_prior_logits(const GenerativeParams& p, int layer, const Vector& self_lags,
                           const Vector& lower_lags, const Vector& above, const Vector& y) {
  if (layer < 0 || layer >= static_cast<int>(p.layers.size()))
    throw ShapeError("hidden_prior_logits: layer index " + std::to_string(layer) + " out of range");
  const HiddenLayerParams& lp = p.layers[layer];
  check_size(y.size(), p.spec.dims.styles, "hidden_prior_logits: y length S");
  Vector out = lp.bias * y;
  lp.self_lag.apply_add(y, self_lags, out);
  if (lp.lower_lag) lp.lower_lag->apply_add(y, lower_lags, out);
  if (lp.top_down) {
    lp.top_down->apply_add(y, above, out);
  } else if (above.size() != 0) {
    throw ShapeError("hidden_prior_logits: top layer takes no top-down input");
  }
  return out;
}

Vector emission_preactivation(const GenerativeParams& p, const Vector& h_t, const Vector& v_lags,
                              const Vector& y) {
  const EmissionParams& e = p.emission;
  check_size(y.size(), p.spec.dims.styles, "emission: y length S");
  Vector out = e.c * y;
  e.w2.apply_add(y, h_t, out);
  if (e.w4) e.w4->apply_add(y, v_lags, out);
  return out;
}

Vector emission_log_var_raw(const GenerativeParams& p, const Vector& h_t, const Vector& v_lags,
                            const Vector& y) {
  require_obs(p, ObsKind::Real, "emission_log_var_raw");
  const EmissionParams& e = p.emission;
  Vector out = *e.c_var * y;
  e.w2_var->apply_add(y, h_t, out);
  if (e.w4_var) e.w4_var->apply_add(y, v_lags, out);
  return out;
}

GaussianEmission emission_gaussian(const GenerativeParams& p, const Vector& h_t,
                                   const Vector& v_lags, const Vector& y) {
  require_obs(p, ObsKind::Real, "emission_gaussian");
  GaussianEmission g;
  g.mean = emission_preactivation(p, h_t, v_lags, y);
  g.log_var = emission_log_var_raw(p, h_t, v_lags, y).cwiseMax(kLogVarMin).cwiseMin(kLogVarMax);
  return g;
}

Vector emission_binary(const GenerativeParams& p, const Vector& h_t, const Vector& v_lags,
                       const Vector& y) {
  require_obs(p, ObsKind::Binary, "emission_binary");
  return sigmoid(emission_preactivation(p, h_t, v_lags, y));
}

Vector emission_count(const GenerativeParams& p, const Vector& h_t, const Vector& v_lags,
                      const Vector& y) {
  require_obs(p, ObsKind::Count, "emission_count");
  const Vector a = emission_preactivation(p, h_t, v_lags, y);
  Vector s = (a.array() - a.maxCoeff()).exp();
  return s / s.sum();
}

double log_emission(const GenerativeParams& p, const Vector& v_t, const Vector& h_t,
                    const Vector& v_lags, const Vector& y) {
  check_size(v_t.size(), p.spec.dims.visible, "log_emission: v_t length M");
  switch (p.spec.obs) {
    case ObsKind::Real: {
      const GaussianEmission g = emission_gaussian(p, h_t, v_lags, y);
      double acc = 0.0;
      for (Index i = 0; i < v_t.size(); ++i) {
        const double r = v_t[i] - g.mean[i];
        acc -= kHalfLog2Pi + 0.5 * g.log_var[i] + 0.5 * r * r * std::exp(-g.log_var[i]);
      }
      return acc;
    }
    case ObsKind::Binary:
      return bernoulli_log_pmf(emission_preactivation(p, h_t, v_lags, y), v_t);
    case ObsKind::Count:
      return v_t.dot(log_softmax(emission_preactivation(p, h_t, v_lags, y)));
  }
  return 0.0;
}

double step_log_prior(const GenerativeParams& p, int layer, Index t, const Matrix& V,
                      const HiddenStates& H, const Matrix& Y) {
  const PriorInputs in = prior_inputs(p.spec, layer, t, V, H);
  const Vector logits = hidden_prior_logits(p, layer, in.self_lags, in.lower_lags, in.above, Y.col(t));
  return bernoulli_log_pmf(logits, H.layers[layer].col(t));
}

double step_log_emission(const GenerativeParams& p, Index t, const Matrix& V,
                         const HiddenStates& H, const Matrix& Y) {
  return log_emission(p, V.col(t), H.layers[0].col(t), lag_window(V, t, p.spec.dims.order),
                      Y.col(t));
}

double step_log_joint(const GenerativeParams& p, Index t, const Matrix& V, const HiddenStates& H,
                      const Matrix& Y) {
  double acc = step_log_emission(p, t, V, H, Y);
  for (int k = 0; k < p.spec.dims.layers(); ++k) acc += step_log_prior(p, k, t, V, H, Y);
  return acc;
}

double log_joint(const GenerativeParams& p, const Matrix& V, const HiddenStates& H,
                 const Matrix& Y) {
  validate_sequence(p.spec, V, Y);
  validate_hidden(p.spec, H, V.cols());
  double acc = 0.0;
  for (Index t = 0; t < V.cols(); ++t) acc += step_log_joint(p, t, V, H, Y);
  return acc;
}

GeneratedSequence generate(const GenerativeParams& p, const Matrix& seed_frames,
                           const StyleSchedule& schedule, Index frames, Rng& rng,
                           const GenerateOptions& options) {
  const Dims& d = p.spec.dims;
  const int n = d.order;
  if (frames < 0) throw ValueError("generate: negative frame count");
  check_size(schedule.styles(), d.styles, "generate: schedule rows S");
  if (schedule.frames() < frames) {
    throw ValueError("generate: schedule has " + std::to_string(schedule.frames()) +
                     " frames, " + std::to_string(frames) + " requested");
  }
  if (!options.hidden_seeds.empty() &&
      static_cast<int>(options.hidden_seeds.size()) != d.layers()) {
    throw ShapeError("generate: hidden seeds for " + std::to_string(options.hidden_seeds.size()) +
                     " layers, model has " + std::to_string(d.layers()));
  }
  if (p.spec.obs == ObsKind::Count && options.count_total < 1)
    throw ValueError("generate: count_total must be >= 1");

  // Extended buffers: the first n columns hold the lag window before frame 0.
  Matrix V = Matrix::Zero(d.visible, n + frames);
  const bool padded = place_seed(seed_frames, n, V, "generate: seed frame rows M");
  HiddenStates H;
  for (int k = 0; k < d.layers(); ++k) {
    H.layers.push_back(Matrix::Zero(d.layer_sizes[k], n + frames));
    if (!options.hidden_seeds.empty())
      place_seed(options.hidden_seeds[k], n, H.layers[k], "generate: hidden seed rows J");
  }

  for (Index t = 0; t < frames; ++t) {
    const Index te = n + t;
    const Vector y = schedule.Y.col(t);
    for (int k = d.layers() - 1; k >= 0; --k) {
      const PriorInputs in = prior_inputs(p.spec, k, te, V, H);
      const Vector logits = hidden_prior_logits(p, k, in.self_lags, in.lower_lags, in.above, y);
      for (Index j = 0; j < logits.size(); ++j)
        H.layers[k](j, te) = rng.bernoulli(sigmoid(logits[j])) ? 1.0 : 0.0;
    }
    V.col(te) = sample_emission(p, H.layers[0].col(te), lag_window(V, te, n), y,
                                options.count_total, rng);
  }

  GeneratedSequence out;
  out.V = V.rightCols(frames);
  for (auto& layer : H.layers) out.H.layers.push_back(layer.rightCols(frames));
  out.seed_padded = padded;
  return out;
}

}  // namespace fctsbn
