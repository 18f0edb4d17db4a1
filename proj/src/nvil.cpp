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

#include "fctsbn/nvil.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fctsbn/model.hpp"
#include "fctsbn/recognition.hpp"

namespace fctsbn {

namespace {

struct StepTerms {
  double emission = 0.0;
  std::vector<double> prior;
  std::vector<double> post;
};

StepTerms step_terms(const GenerativeParams& p, const RecognitionParams& q, Index t,
                     const Matrix& V, const HiddenStates& H, const Matrix& Y) {
  const int layers = p.spec.dims.layers();
  StepTerms s;
  s.emission = step_log_emission(p, t, V, H, Y);
  s.prior.resize(layers);
  s.post.resize(layers);
  for (int k = 0; k < layers; ++k) {
    s.prior[k] = step_log_prior(p, k, t, V, H, Y);
    s.post[k] = step_log_q(q, k, t, V, H, Y);
  }
  return s;
}

double elbo_of(const StepTerms& s) {
  double acc = s.emission;
  for (std::size_t k = 0; k < s.prior.size(); ++k) acc += s.prior[k] - s.post[k];
  return acc;
}

Matrix signals_of(const GenerativeParams& p, const RecognitionParams& q, const Matrix& V,
                  const HiddenStates& H, const Matrix& Y, double* elbo) {
  const int layers = p.spec.dims.layers();
  Matrix out(layers, V.cols());
  double total = 0.0;
  for (Index t = 0; t < V.cols(); ++t) {
    const StepTerms s = step_terms(p, q, t, V, H, Y);
    for (int k = 0; k < layers; ++k)
      out(k, t) = (k == 0 ? s.emission : s.prior[k - 1]) + s.prior[k] - s.post[k];
    total += elbo_of(s);
  }
  if (elbo) *elbo = total;
  return out;
}

bool any_baseline(const BaselineOptions& b) { return b.data_dependent || b.data_independent; }

}  // namespace

double SignalStats::divisor() const { return std::max(1.0, std::sqrt(std::max(var, 0.0))); }

GradientSet GradientSet::zeros_like(const GenerativeParams& p, const RecognitionParams& q,
                                    const std::vector<BaselineParams>& b) {
  GradientSet g;
  g.model = p.zeros_like();
  g.recognition = q.zeros_like();
  for (const auto& x : b) g.baselines.push_back(x.zeros_like());
  return g;
}

void GradientSet::add(const GradientSet& other) {
  add_scaled(*this, other);
}

std::vector<TensorRef> GradientSet::tensors() {
  std::vector<TensorRef> out = model.tensors();
  for (auto& t : recognition.tensors()) out.push_back(t);
  for (auto& b : baselines)
    for (auto& t : b.tensors()) out.push_back(t);
  return out;
}

std::vector<ConstTensorRef> GradientSet::tensors() const {
  std::vector<ConstTensorRef> out = model.tensors();
  for (auto& t : recognition.tensors()) out.push_back(t);
  for (const auto& b : baselines)
    for (auto& t : b.tensors()) out.push_back(t);
  return out;
}

std::vector<BaselineParams> make_baselines(const ModelSpec& spec, Rng& rng, int hidden) {
  std::vector<BaselineParams> out;
  const Dims& d = spec.dims;
  for (int k = 0; k < d.layers(); ++k) {
    const Index below = k == 0 ? d.visible : d.layer_sizes[k - 1];
    BaselineParams b =
        make_baseline(below * (d.order + 1) + d.styles, hidden, "baseline/" + layer_prefix(k));
    initialize(b, rng);
    out.push_back(std::move(b));
  }
  return out;
}

Vector baseline_window(const ModelSpec& spec, int layer, Index t, const Matrix& V,
                       const HiddenStates& H, const Matrix& Y) {
  const Matrix& below = layer == 0 ? V : H.layers[layer - 1];
  return baseline_input(below.col(t), lag_window(below, t, spec.dims.order), Y.col(t));
}

double elbo_term(const GenerativeParams& p, const RecognitionParams& q, Index t, const Matrix& V,
                 const HiddenStates& H, const Matrix& Y) {
  return elbo_of(step_terms(p, q, t, V, H, Y));
}

Matrix learning_signals(const GenerativeParams& p, const RecognitionParams& q, const Matrix& V,
                        const HiddenStates& H, const Matrix& Y) {
  return signals_of(p, q, V, H, Y, nullptr);
}

void accumulate_model_gradients(const GenerativeParams& p, const Matrix& V, const HiddenStates& H,
                                const Matrix& Y, GenerativeParams& grad, const TermMask& mask) {
  const int layers = p.spec.dims.layers();
  const int n = p.spec.dims.order;
  if (!mask.layers.empty() && static_cast<int>(mask.layers.size()) != layers)
    throw ShapeError("accumulate_model_gradients: term mask has wrong layer count");
  for (Index t = 0; t < V.cols(); ++t) {
    const Vector y = Y.col(t);
    for (int k = 0; k < layers; ++k) {
      if (!mask.layers.empty() && !mask.layers[k]) continue;
      const PriorInputs in = prior_inputs(p.spec, k, t, V, H);
      const Vector logits = hidden_prior_logits(p, k, in.self_lags, in.lower_lags, in.above, y);
      const Vector xi = H.layers[k].col(t) - sigmoid(logits);
      const HiddenLayerParams& lp = p.layers[k];
      HiddenLayerParams& gp = grad.layers[k];
      lp.self_lag.accumulate_gradient(y, xi, in.self_lags, gp.self_lag);
      if (lp.lower_lag) lp.lower_lag->accumulate_gradient(y, xi, in.lower_lags, *gp.lower_lag);
      if (lp.top_down) lp.top_down->accumulate_gradient(y, xi, in.above, *gp.top_down);
      gp.bias.noalias() += xi * y.transpose();
    }
    if (!mask.emission) continue;
    const EmissionParams& e = p.emission;
    EmissionParams& ge = grad.emission;
    const Vector h = H.layers[0].col(t);
    const Vector v = V.col(t);
    const Vector v_lags = lag_window(V, t, n);
    const Vector a = emission_preactivation(p, h, v_lags, y);
    Vector xi;
    switch (p.spec.obs) {
      case ObsKind::Real: {
        const Vector raw = emission_log_var_raw(p, h, v_lags, y);
        Vector xi_var(raw.size());
        xi.resize(raw.size());
        for (Index i = 0; i < raw.size(); ++i) {
          const double lv = std::clamp(raw[i], kLogVarMin, kLogVarMax);
          const double inv = std::exp(-lv);
          const double r = v[i] - a[i];
          xi[i] = r * inv;
          const bool inside = raw[i] >= kLogVarMin && raw[i] <= kLogVarMax;
          xi_var[i] = inside ? 0.5 * (r * r * inv - 1.0) : 0.0;
        }
        e.w2_var->accumulate_gradient(y, xi_var, h, *ge.w2_var);
        if (e.w4_var) e.w4_var->accumulate_gradient(y, xi_var, v_lags, *ge.w4_var);
        ge.c_var->noalias() += xi_var * y.transpose();
        break;
      }
      case ObsKind::Binary:
        xi = v - sigmoid(a);
        break;
      case ObsKind::Count: {
        Vector s = (a.array() - a.maxCoeff()).exp();
        s /= s.sum();
        xi = v - v.sum() * s;
        break;
      }
    }
    e.w2.accumulate_gradient(y, xi, h, ge.w2);
    if (e.w4) e.w4->accumulate_gradient(y, xi, v_lags, *ge.w4);
    ge.c.noalias() += xi * y.transpose();
  }
}

void accumulate_recognition_gradients(const RecognitionParams& q, const Matrix& V,
                                      const HiddenStates& H, const Matrix& Y,
                                      const Matrix& signals, RecognitionParams& grad) {
  const int layers = q.spec.dims.layers();
  check_size(signals.rows(), layers, "recognition gradients: signal rows L");
  check_size(signals.cols(), V.cols(), "recognition gradients: signal frames T");
  for (Index t = 0; t < V.cols(); ++t) {
    const Vector y = Y.col(t);
    for (int k = 0; k < layers; ++k) {
      const double w = signals(k, t);
      if (w == 0.0) continue;
      const PosteriorInputs in = posterior_inputs(q.spec, k, t, V, H);
      const Vector logits = posterior_logits(q, k, in.self_lags, in.lower_now, in.lower_lags, y);
      const Vector xi = w * (H.layers[k].col(t) - sigmoid(logits));
      const RecognitionLayerParams& lp = q.layers[k];
      RecognitionLayerParams& gp = grad.layers[k];
      lp.self_lag.accumulate_gradient(y, xi, in.self_lags, gp.self_lag);
      lp.lower_now.accumulate_gradient(y, xi, in.lower_now, gp.lower_now);
      lp.lower_lag.accumulate_gradient(y, xi, in.lower_lags, gp.lower_lag);
      gp.bias.noalias() += xi * y.transpose();
    }
  }
}

MinibatchResult nvil_minibatch(const GenerativeParams& p, const RecognitionParams& q,
                               const std::vector<BaselineParams>& baselines,
                               std::vector<SignalStats>& stats, const std::vector<Segment>& batch,
                               Rng& rng, const NvilOptions& options) {
  if (batch.empty()) throw ValueError("nvil_minibatch: empty batch");
  if (!(p.spec == q.spec)) throw ShapeError("nvil_minibatch: generative and recognition specs differ");
  const ModelSpec& spec = p.spec;
  const int layers = spec.dims.layers();
  const bool use_baseline = any_baseline(options.baseline);
  if (use_baseline && static_cast<int>(baselines.size()) != layers) {
    throw ShapeError("nvil_minibatch: " + std::to_string(baselines.size()) +
                     " baselines for " + std::to_string(layers) + " layers");
  }
  if (stats.empty()) stats.resize(layers);
  check_size(static_cast<Index>(stats.size()), layers, "nvil_minibatch: signal stats per layer");
  for (const Segment& s : batch) {
    validate_sequence(spec, s.V, s.Y);
    if (s.V.cols() < 1) throw ValueError("nvil_minibatch: empty segment");
  }

  const Index count = static_cast<Index>(batch.size());
  const Rng streams = rng.fork(rng.next_u64());
  MinibatchResult res;
  res.samples.resize(count);
  res.sequence_elbo.assign(count, 0.0);
  std::vector<Matrix> centered(count);

  // Sample, evaluate signals and baselines.
  for_each_index(count, options.policy, [&](Index i) {
    const Segment& s = batch[i];
    Rng r = streams.fork(static_cast<std::uint64_t>(i));
    res.samples[i] = sample_posterior(q, s.V, s.Y, r);
    centered[i] = signals_of(p, q, s.V, res.samples[i], s.Y, &res.sequence_elbo[i]);
    if (!use_baseline) return;
    for (Index t = 0; t < s.V.cols(); ++t)
      for (int k = 0; k < layers; ++k)
        centered[i](k, t) -= baseline_eval(
            baselines[k], baseline_window(spec, k, t, s.V, res.samples[i], s.Y), options.baseline);
  });

  // Batch statistics over every (segment, frame) signal of each layer.
  res.signal_mean.assign(layers, 0.0);
  res.signal_var.assign(layers, 0.0);
  Index frames = 0;
  for (const Matrix& c : centered) frames += c.cols();
  for (int k = 0; k < layers; ++k) {
    double sum = 0.0;
    for (const Matrix& c : centered) sum += c.row(k).sum();
    const double mean = sum / static_cast<double>(frames);
    double ss = 0.0;
    for (const Matrix& c : centered) ss += (c.row(k).array() - mean).square().sum();
    res.signal_mean[k] = mean;
    res.signal_var[k] = ss / static_cast<double>(frames);
    if (options.update_stats) stats[k].update(mean, res.signal_var[k]);
  }
  res.normalized_signals.resize(count);
  for (Index i = 0; i < count; ++i) {
    Matrix& s = res.normalized_signals[i];
    s = centered[i];
    for (int k = 0; k < layers; ++k) {
      if (options.center_running_mean) s.row(k).array() -= stats[k].mean;
      if (options.variance_normalization) s.row(k) /= stats[k].divisor();
    }
  }

  // Per-segment gradients.
  auto segment_gradient = [&](Index i, GradientSet& g) {
    const Segment& s = batch[i];
    const HiddenStates& H = res.samples[i];
    accumulate_model_gradients(p, s.V, H, s.Y, g.model);
    accumulate_recognition_gradients(q, s.V, H, s.Y, res.normalized_signals[i], g.recognition);
    if (!use_baseline) return;
    for (Index t = 0; t < s.V.cols(); ++t)
      for (int k = 0; k < layers; ++k)
        baseline_accumulate_gradient(baselines[k], baseline_window(spec, k, t, s.V, H, s.Y),
                                     res.normalized_signals[i](k, t), g.baselines[k],
                                     options.baseline);
  };
  const std::vector<BaselineParams> none;
  const auto& bref = use_baseline ? baselines : none;
  res.grads = GradientSet::zeros_like(p, q, bref);
  if (options.policy == Policy::Parallel && !options.deterministic) {
    std::exception_ptr error;
#pragma omp parallel
    {
      GradientSet local = GradientSet::zeros_like(p, q, bref);
#pragma omp for schedule(dynamic) nowait
      for (Index i = 0; i < count; ++i) {
        try {
          segment_gradient(i, local);
        } catch (...) {
#pragma omp critical(fctsbn_nvil_error)
          if (!error) error = std::current_exception();
        }
      }
#pragma omp critical(fctsbn_nvil_reduce)
      res.grads.add(local);
    }
    if (error) std::rethrow_exception(error);
  } else {
    std::vector<GradientSet> parts(count);
    for_each_index(count, options.policy, [&](Index i) {
      parts[i] = GradientSet::zeros_like(p, q, bref);
      segment_gradient(i, parts[i]);
    });
    for (const GradientSet& g : parts) res.grads.add(g);
  }

  double total = 0.0;
  for (double e : res.sequence_elbo) total += e;
  res.elbo = total / static_cast<double>(count);
  return res;
}

}  // namespace fctsbn
