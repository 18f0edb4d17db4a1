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

#include "fctsbn/recognition.hpp"

#include <string>

namespace fctsbn {

Vector posterior_logits(const RecognitionParams& q, int layer, const Vector& self_lags,
                        const Vector& lower_now, const Vector& lower_lags, const Vector& y) {
  if (layer < 0 || layer >= static_cast<int>(q.layers.size()))
    throw ShapeError("posterior_logits: layer index " + std::to_string(layer) + " out of range");
  const RecognitionLayerParams& lp = q.layers[layer];
  check_size(y.size(), q.spec.dims.styles, "posterior_logits: y length S");
  Vector out = lp.bias * y;
  lp.self_lag.apply_add(y, self_lags, out);
  lp.lower_now.apply_add(y, lower_now, out);
  lp.lower_lag.apply_add(y, lower_lags, out);
  return out;
}

HiddenStates sample_posterior(const RecognitionParams& q, const Matrix& V, const Matrix& Y,
                              Rng& rng) {
  validate_sequence(q.spec, V, Y);
  HiddenStates H = zero_hidden(q.spec, V.cols());
  for (Index t = 0; t < V.cols(); ++t) {
    for (int k = 0; k < q.spec.dims.layers(); ++k) {
      const PosteriorInputs in = posterior_inputs(q.spec, k, t, V, H);
      const Vector logits =
          posterior_logits(q, k, in.self_lags, in.lower_now, in.lower_lags, Y.col(t));
      for (Index j = 0; j < logits.size(); ++j)
        H.layers[k](j, t) = rng.bernoulli(sigmoid(logits[j])) ? 1.0 : 0.0;
    }
  }
  return H;
}

double step_log_q(const RecognitionParams& q, int layer, Index t, const Matrix& V,
                  const HiddenStates& H, const Matrix& Y) {
  const PosteriorInputs in = posterior_inputs(q.spec, layer, t, V, H);
  const Vector logits = posterior_logits(q, layer, in.self_lags, in.lower_now, in.lower_lags, Y.col(t));
  return bernoulli_log_pmf(logits, H.layers[layer].col(t));
}

double log_q(const RecognitionParams& q, const Matrix& V, const HiddenStates& H, const Matrix& Y) {
  validate_sequence(q.spec, V, Y);
  validate_hidden(q.spec, H, V.cols());
  double acc = 0.0;
  for (Index t = 0; t < V.cols(); ++t)
    for (int k = 0; k < q.spec.dims.layers(); ++k) acc += step_log_q(q, k, t, V, H, Y);
  return acc;
}

}  // namespace fctsbn
