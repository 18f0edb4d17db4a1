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

#ifndef FCTSBN_PARAMS_HPP
#define FCTSBN_PARAMS_HPP

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "fctsbn/cond_weight.hpp"
#include "fctsbn/rng.hpp"
#include "fctsbn/types.hpp"

namespace fctsbn {

// Structural description of a model: everything needed to allocate the
// parameter tensors.
struct ModelSpec {
  Dims dims;
  ObsKind obs = ObsKind::Real;
  // Factored (FCTSBN) when true, dense three-way tensors (CTSBN) otherwise.
  // The hidden->visible map W2 and its variance twin stay dense either way.
  bool factored = true;
  // Drops the visible->hidden and visible->visible maps (W3 = W4 = 0).
  bool hidden_markov = false;

  void validate() const { dims.validate(factored); }
};

bool operator==(const ModelSpec& a, const ModelSpec& b);

/**
 * Generative parameters of one stochastic hidden layer.
 *
 * Layer 1 (index 0): logits = W1 h_lags + W3 v_lags + W5 h2_t + B y.
 * Upper layer l:     logits = W7 h_lags + W6 h(l-1)_lags + W5 h(l+1)_t + A y.
 * Lag inputs are the previous `order` states concatenated newest first.
 */
struct HiddenLayerParams {
  CondWeight self_lag;                  // W1 / W7
  std::optional<CondWeight> lower_lag;  // W3 / W6 (absent: hidden-Markov layer 1)
  std::optional<CondWeight> top_down;   // W5 (absent on the top layer)
  Matrix bias;                          // B / A, J x S
};

// Visible layer: mu = W2 h + W4 v_lags + C y, and for real-valued data
// log sigma^2 = W2' h + W4' v_lags + C' y.
struct EmissionParams {
  CondWeight w2;
  std::optional<CondWeight> w4;
  Matrix c;
  std::optional<CondWeight> w2_var;
  std::optional<CondWeight> w4_var;
  std::optional<Matrix> c_var;
};

struct GenerativeParams {
  ModelSpec spec;
  std::vector<HiddenLayerParams> layers;
  EmissionParams emission;

  GenerativeParams zeros_like() const;
  std::vector<TensorRef> tensors();
  std::vector<ConstTensorRef> tensors() const;
  Index parameter_count() const;
};

// Recognition layer l: logits = U_self h_lags + U_now below_t + U_lag below_lags + D y.
// Layer 1 uses (U1, U2, U3, D) with below = v; upper layers (U4, U5, U6, E).
struct RecognitionLayerParams {
  CondWeight self_lag;
  CondWeight lower_now;
  CondWeight lower_lag;
  Matrix bias;
};

struct RecognitionParams {
  ModelSpec spec;
  std::vector<RecognitionLayerParams> layers;

  RecognitionParams zeros_like() const;
  std::vector<TensorRef> tensors();
  std::vector<ConstTensorRef> tensors() const;
  Index parameter_count() const;
};

// All-zero parameter sets with the shapes implied by `spec`.
GenerativeParams make_generative(const ModelSpec& spec);
RecognitionParams make_recognition(const ModelSpec& spec);

// Training initialization: dense weights ~ N(0, 0.001^2), factor matrices
// ~ N(0, 0.01^2), biases zero.
void initialize(GenerativeParams& params, Rng& rng);
void initialize(RecognitionParams& params, Rng& rng);

// Every weight and bias ~ N(0, scale^2). Used by tests and gradient checks.
void randomize(GenerativeParams& params, Rng& rng, double scale);
void randomize(RecognitionParams& params, Rng& rng, double scale);

// Checkpoint namespace of a layer: "layer1", "layer2", ...
std::string layer_prefix(int layer_index);

// Element-wise helpers over anything exposing tensors().
template <class P>
void add_scaled(P& dst, const P& src, double scale = 1.0) {
  auto d = dst.tensors();
  auto s = src.tensors();
  if (d.size() != s.size()) throw ShapeError("add_scaled: tensor lists differ");
  for (std::size_t i = 0; i < d.size(); ++i) *d[i].data += scale * *s[i].data;
}

template <class P>
double squared_norm(const P& p) {
  double acc = 0.0;
  for (const auto& t : p.tensors()) acc += t.data->squaredNorm();
  return acc;
}

template <class P>
bool all_finite(const P& p) {
  for (const auto& t : p.tensors()) {
    if (!t.data->allFinite()) return false;
  }
  return true;
}

template <class P>
bool bitwise_equal(const P& a, const P& b) {
  auto x = a.tensors();
  auto y = b.tensors();
  if (x.size() != y.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].name != y[i].name || x[i].data->rows() != y[i].data->rows() ||
        x[i].data->cols() != y[i].data->cols())
      return false;
    for (Index k = 0; k < x[i].data->size(); ++k) {
      const double u = x[i].data->data()[k];
      const double v = y[i].data->data()[k];
      if (!(u == v || (std::isnan(u) && std::isnan(v)))) return false;
    }
  }
  return true;
}

}  // namespace fctsbn

#endif  // FCTSBN_PARAMS_HPP
