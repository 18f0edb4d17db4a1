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
#include "fctsbn/recognition.hpp"

namespace fctsbn {

namespace {

Vector draw_bits(const Vector& logits, Rng& rng) {
  Vector h(logits.size());
  for (Index j = 0; j < logits.size(); ++j) h[j] = rng.bernoulli(sigmoid(logits[j])) ? 1.0 : 0.0;
  return h;
}

// Expected frame t given posterior samples for frames < t. Upper layers are
// drawn from the prior at t; the bottom layer enters through its prior
// probabilities for real data and through a draw otherwise.
Vector predict_frame(const GenerativeParams& p, const HiddenStates& past, const Matrix& V,
                     const Vector& y, Index t, Rng& rng) {
  const int n = p.spec.dims.order;
  const int top = p.spec.dims.layers() - 1;
  Vector above;
  Vector h0_logits;
  for (int k = top; k >= 0; --k) {
    const Vector self_lags = lag_window(past.layers[k], t, n);
    Vector lower_lags;
    if (p.layers[k].lower_lag) lower_lags = lag_window(k == 0 ? V : past.layers[k - 1], t, n);
    const Vector logits = hidden_prior_logits(p, k, self_lags, lower_lags, above, y);
    if (k == 0) {
      h0_logits = logits;
    } else {
      above = draw_bits(logits, rng);
    }
  }
  const Vector v_lags = lag_window(V, t, n);
  switch (p.spec.obs) {
    case ObsKind::Real:
      return emission_preactivation(p, sigmoid(h0_logits), v_lags, y);
    case ObsKind::Binary:
      return emission_binary(p, draw_bits(h0_logits, rng), v_lags, y);
    case ObsKind::Count: {
      const double total = t > 0 ? V.col(t - 1).sum() : 1.0;
      return total * emission_count(p, draw_bits(h0_logits, rng), v_lags, y);
    }
  }
  return {};
}

void check_pair(const GenerativeParams& p, const RecognitionParams& q) {
  if (!(p.spec == q.spec)) throw ShapeError("prediction: generative and recognition specs differ");
}

}  // namespace

Vector predict_next(const GenerativeParams& p, const RecognitionParams& q,
                    const Matrix& v_history, const Matrix& y_history, const Vector& y_t,
                    int num_samples, Rng& rng) {
  check_pair(p, q);
  if (num_samples < 1) throw ValueError("predict_next: num_samples must be >= 1");
  check_size(y_t.size(), p.spec.dims.styles, "predict_next: y_t length S");
  const Index t = v_history.cols();
  Vector acc = Vector::Zero(p.spec.dims.visible);
  for (int s = 0; s < num_samples; ++s) {
    const HiddenStates past = sample_posterior(q, v_history, y_history, rng);
    acc += predict_frame(p, past, v_history, y_t, t, rng);
  }
  return acc / num_samples;
}

Matrix predict_sequence(const GenerativeParams& p, const RecognitionParams& q, const Matrix& V,
                        const Matrix& Y, int num_samples, Rng& rng) {
  check_pair(p, q);
  if (num_samples < 1) throw ValueError("predict_sequence: num_samples must be >= 1");
  Matrix acc = Matrix::Zero(V.rows(), V.cols());
  for (int s = 0; s < num_samples; ++s) {
    // q factorizes forward in time, so one sweep yields valid histories for
    // every prefix.
    const HiddenStates past = sample_posterior(q, V, Y, rng);
    for (Index t = 0; t < V.cols(); ++t) acc.col(t) += predict_frame(p, past, V, Y.col(t), t, rng);
  }
  return acc / num_samples;
}

}  // namespace fctsbn
