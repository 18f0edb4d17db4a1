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

#ifndef FCTSBN_RECOGNITION_HPP
#define FCTSBN_RECOGNITION_HPP

#include "fctsbn/params.hpp"
#include "fctsbn/rng.hpp"
#include "fctsbn/sequence.hpp"

namespace fctsbn {

// Posterior logits of layer `layer`:
//   U_self h_lags + U_now below_t + U_lag below_lags + D y.
Vector posterior_logits(const RecognitionParams& q, int layer, const Vector& self_lags,
                        const Vector& lower_now, const Vector& lower_lags, const Vector& y);

inline Vector posterior_logits(const RecognitionParams& q, const Vector& h_lags,
                               const Vector& v_t, const Vector& v_lags, const Vector& y) {
  return posterior_logits(q, 0, h_lags, v_t, v_lags, y);
}

// One forward sweep over frames; within a frame layers are drawn bottom-up.
HiddenStates sample_posterior(const RecognitionParams& q, const Matrix& V, const Matrix& Y,
                              Rng& rng);

double step_log_q(const RecognitionParams& q, int layer, Index t, const Matrix& V,
                  const HiddenStates& H, const Matrix& Y);

// log q(H | V, Y). Rejects non-binary H.
double log_q(const RecognitionParams& q, const Matrix& V, const HiddenStates& H, const Matrix& Y);

}  // namespace fctsbn

#endif  // FCTSBN_RECOGNITION_HPP
