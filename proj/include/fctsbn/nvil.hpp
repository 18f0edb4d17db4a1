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

#ifndef FCTSBN_NVIL_HPP
#define FCTSBN_NVIL_HPP

#include <vector>

#include "fctsbn/baseline.hpp"
#include "fctsbn/parallel.hpp"
#include "fctsbn/params.hpp"
#include "fctsbn/rng.hpp"
#include "fctsbn/sequence.hpp"

namespace fctsbn {

// One training unit: a (sub)sequence and its side information.
struct Segment {
  Matrix V;  // M x T
  Matrix Y;  // S x T
};

// Running mean and variance of the centered learning signal.
struct SignalStats {
  double mean = 0.0;  // kappa
  double var = 0.0;   // tau
  double rate = 0.9;  // rho

  void update(double batch_mean, double batch_var) {
    mean = rate * mean + (1.0 - rate) * batch_mean;
    var = rate * var + (1.0 - rate) * batch_var;
  }
  double divisor() const;  // max(1, sqrt(var))
};

struct NvilOptions {
  BaselineOptions baseline;
  bool center_running_mean = true;
  bool variance_normalization = true;
  bool update_stats = true;
  Policy policy = Policy::Parallel;
  // Fixed-order reduction; bit-identical to Policy::Serial.
  bool deterministic = true;
};

struct GradientSet {
  GenerativeParams model;
  RecognitionParams recognition;
  std::vector<BaselineParams> baselines;

  static GradientSet zeros_like(const GenerativeParams& p, const RecognitionParams& q,
                                const std::vector<BaselineParams>& b);
  void add(const GradientSet& other);
  std::vector<TensorRef> tensors();
  std::vector<ConstTensorRef> tensors() const;
};

// One baseline per hidden layer, input [below_t; below_lags; y_t].
std::vector<BaselineParams> make_baselines(const ModelSpec& spec, Rng& rng,
                                           int hidden = kBaselineHidden);
Vector baseline_window(const ModelSpec& spec, int layer, Index t, const Matrix& V,
                       const HiddenStates& H, const Matrix& Y);

// l_t = log p(v_t, h_t | lags, y_t) - log q(h_t | ...), summed over layers.
double elbo_term(const GenerativeParams& p, const RecognitionParams& q, Index t, const Matrix& V,
                 const HiddenStates& H, const Matrix& Y);

// Raw learning signals, one row per layer and one column per frame. Row k
// collects the terms that involve layer k at t: the term of the layer below
// (the emission for k = 0), the layer's own prior term and minus its
// recognition term. With one layer this is exactly elbo_term.
Matrix learning_signals(const GenerativeParams& p, const RecognitionParams& q, const Matrix& V,
                        const HiddenStates& H, const Matrix& Y);

// Selects which terms of log p contribute in accumulate_model_gradients.
struct TermMask {
  std::vector<bool> layers;  // empty: all layers
  bool emission = true;
};

// grad += d/dtheta log p(V, H | Y).
void accumulate_model_gradients(const GenerativeParams& p, const Matrix& V, const HiddenStates& H,
                                const Matrix& Y, GenerativeParams& grad,
                                const TermMask& mask = {});

// grad += sum_{k,t} signals(k, t) * d/dphi log q(h^k_t | ...).
void accumulate_recognition_gradients(const RecognitionParams& q, const Matrix& V,
                                      const HiddenStates& H, const Matrix& Y,
                                      const Matrix& signals, RecognitionParams& grad);

struct MinibatchResult {
  GradientSet grads;
  double elbo = 0.0;                  // mean raw ELBO per segment
  std::vector<double> sequence_elbo;  // raw ELBO per segment
  std::vector<double> signal_mean;    // per layer, centered signal batch mean
  std::vector<double> signal_var;     // per layer, centered signal batch variance
  std::vector<HiddenStates> samples;
  std::vector<Matrix> normalized_signals;
};

// One minibatch of the NVIL estimator. Hidden states of segment i are drawn
// from an Rng stream derived from `rng` and i, so the result does not depend
// on worker count. Gradients are sums over the batch.
MinibatchResult nvil_minibatch(const GenerativeParams& p, const RecognitionParams& q,
                               const std::vector<BaselineParams>& baselines,
                               std::vector<SignalStats>& stats, const std::vector<Segment>& batch,
                               Rng& rng, const NvilOptions& options = {});

}  // namespace fctsbn

#endif  // FCTSBN_NVIL_HPP
