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

#ifndef FCTSBN_MODEL_HPP
#define FCTSBN_MODEL_HPP

#include <vector>

#include "fctsbn/params.hpp"
#include "fctsbn/rng.hpp"
#include "fctsbn/schedule.hpp"
#include "fctsbn/sequence.hpp"

namespace fctsbn {

// Variance logits are clamped before exponentiation.
inline constexpr double kLogVarMin = -10.0;
inline constexpr double kLogVarMax = 10.0;

// Bernoulli logits of hidden layer `layer`. `lower_lags` is ignored when the
// layer has no lower-lag map (hidden-Markov layer 1); `above` must be empty
// on the top layer and hold the layer above's current state otherwise.
Vector hidden_prior_logits(const GenerativeParams& p, int layer, const Vector& self_lags,
                           const Vector& lower_lags, const Vector& above, const Vector& y);

// Single-layer form: W1 h_lags + W3 v_lags + B y.
inline Vector hidden_prior_logits(const GenerativeParams& p, const Vector& h_lags,
                                  const Vector& v_lags, const Vector& y) {
  return hidden_prior_logits(p, 0, h_lags, v_lags, Vector(), y);
}

struct GaussianEmission {
  Vector mean;
  Vector log_var;  // clamped to [kLogVarMin, kLogVarMax]
};

// W2 h + W4 v_lags + C y: the Gaussian mean, Bernoulli logits or softmax logits.
Vector emission_preactivation(const GenerativeParams& p, const Vector& h_t, const Vector& v_lags,
                              const Vector& y);
// W2' h + W4' v_lags + C' y before clamping. Real observations only.
Vector emission_log_var_raw(const GenerativeParams& p, const Vector& h_t, const Vector& v_lags,
                            const Vector& y);

GaussianEmission emission_gaussian(const GenerativeParams& p, const Vector& h_t,
                                   const Vector& v_lags, const Vector& y);
Vector emission_binary(const GenerativeParams& p, const Vector& h_t, const Vector& v_lags,
                       const Vector& y);
Vector emission_count(const GenerativeParams& p, const Vector& h_t, const Vector& v_lags,
                      const Vector& y);

// log p(v_t | h_t, v_lags, y) for the model's observation family. Count
// observations use sum_m v_m log s_m (no multinomial coefficient).
double log_emission(const GenerativeParams& p, const Vector& v_t, const Vector& h_t,
                    const Vector& v_lags, const Vector& y);

// Per-frame terms of log p(V, H | Y).
double step_log_prior(const GenerativeParams& p, int layer, Index t, const Matrix& V,
                      const HiddenStates& H, const Matrix& Y);
double step_log_emission(const GenerativeParams& p, Index t, const Matrix& V,
                         const HiddenStates& H, const Matrix& Y);
double step_log_joint(const GenerativeParams& p, Index t, const Matrix& V, const HiddenStates& H,
                      const Matrix& Y);

// log p(V, H | Y), summed over frames and layers. Rejects non-binary H.
double log_joint(const GenerativeParams& p, const Matrix& V, const HiddenStates& H,
                 const Matrix& Y);

struct GenerateOptions {
  // Optional initial lag window per hidden layer (J x k, oldest first).
  std::vector<Matrix> hidden_seeds;
  // Total count per frame for count observations.
  int count_total = 1;
};

struct GeneratedSequence {
  Matrix V;  // M x T
  HiddenStates H;
  // Set when fewer than `order` seed frames were supplied and the rest of the
  // lag window was zero-filled.
  bool seed_padded = false;
};

// Ancestral sampling, one pass: per frame the top layer is drawn first, then
// each layer below, then the observation. `seed_frames` (M x k, oldest
// first) fills the initial visible lag window.
GeneratedSequence generate(const GenerativeParams& p, const Matrix& seed_frames,
                           const StyleSchedule& schedule, Index frames, Rng& rng,
                           const GenerateOptions& options = {});

// Expected observation at frame t given frames < t. Real: mean; Binary:
// probabilities; Count: proportions scaled by the previous frame's total.
Vector predict_next(const GenerativeParams& p, const RecognitionParams& q,
                    const Matrix& v_history, const Matrix& y_history, const Vector& y_t,
                    int num_samples, Rng& rng);

// Column t holds the prediction of frame t from frames 0..t-1 (column 0 is
// the prediction from an empty history).
Matrix predict_sequence(const GenerativeParams& p, const RecognitionParams& q, const Matrix& V,
                        const Matrix& Y, int num_samples, Rng& rng);

}  // namespace fctsbn

#endif  // FCTSBN_MODEL_HPP
