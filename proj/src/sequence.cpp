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

#include "fctsbn/sequence.hpp"

namespace fctsbn {

HiddenStates zero_hidden(const ModelSpec& spec, Index frames) {
  HiddenStates h;
  for (int j : spec.dims.layer_sizes) h.layers.push_back(Matrix::Zero(j, frames));
  return h;
}

Vector lag_window(const Matrix& states, Index t, int order) {
  const Index d = states.rows();
  Vector out = Vector::Zero(d * order);
  for (int k = 1; k <= order; ++k) {
    const Index src = t - k;
    if (src < 0) break;
    out.segment((k - 1) * d, d) = states.col(src);
  }
  return out;
}

Vector sigmoid(const Vector& x) {
  Vector out(x.size());
  for (Index i = 0; i < x.size(); ++i) out[i] = sigmoid(x[i]);
  return out;
}

double bernoulli_log_pmf(const Vector& logits, const Eigen::Ref<const Vector>& h) {
  double acc = 0.0;
  for (Index j = 0; j < logits.size(); ++j) acc += h[j] * logits[j] - softplus(logits[j]);
  return acc;
}

void check_binary(const Matrix& m, std::string_view what) {
  for (Index t = 0; t < m.cols(); ++t) {
    for (Index j = 0; j < m.rows(); ++j) {
      const double x = m(j, t);
      if (x != 0.0 && x != 1.0) {
        throw ValueError(std::string(what) + ": non-binary entry " + std::to_string(x) +
                         " at (" + std::to_string(j) + ", " + std::to_string(t) + ")");
      }
    }
  }
}

void validate_sequence(const ModelSpec& spec, const Matrix& V, const Matrix& Y) {
  check_size(V.rows(), spec.dims.visible, "sequence: visible rows M");
  check_size(Y.rows(), spec.dims.styles, "sequence: side-information rows S");
  check_size(Y.cols(), V.cols(), "sequence: side-information frames T");
  if (!V.allFinite()) throw ValueError("sequence: non-finite observation");
  if (!Y.allFinite()) throw ValueError("sequence: non-finite side information");
}

void validate_hidden(const ModelSpec& spec, const HiddenStates& H, Index frames) {
  if (static_cast<int>(H.layers.size()) != spec.dims.layers()) {
    throw ShapeError("hidden states: layer count " + std::to_string(H.layers.size()) +
                     ", expected " + std::to_string(spec.dims.layers()));
  }
  for (int k = 0; k < spec.dims.layers(); ++k) {
    const std::string name = "hidden states " + layer_prefix(k);
    check_size(H.layers[k].rows(), spec.dims.layer_sizes[k], name + " rows J");
    check_size(H.layers[k].cols(), frames, name + " frames T");
    check_binary(H.layers[k], name);
  }
}

PriorInputs prior_inputs(const ModelSpec& spec, int layer, Index t, const Matrix& V,
                         const HiddenStates& H) {
  const int n = spec.dims.order;
  PriorInputs in;
  in.self_lags = lag_window(H.layers[layer], t, n);
  if (!(layer == 0 && spec.hidden_markov))
    in.lower_lags = lag_window(layer == 0 ? V : H.layers[layer - 1], t, n);
  if (layer + 1 < spec.dims.layers()) in.above = H.layers[layer + 1].col(t);
  return in;
}

PosteriorInputs posterior_inputs(const ModelSpec& spec, int layer, Index t, const Matrix& V,
                                 const HiddenStates& H) {
  const int n = spec.dims.order;
  const Matrix& below = layer == 0 ? V : H.layers[layer - 1];
  return {lag_window(H.layers[layer], t, n), below.col(t), lag_window(below, t, n)};
}

}  // namespace fctsbn
