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

#ifndef FCTSBN_SEQUENCE_HPP
#define FCTSBN_SEQUENCE_HPP

#include <cmath>
#include <vector>

#include "fctsbn/params.hpp"
#include "fctsbn/types.hpp"

namespace fctsbn {

// Sequences are stored one frame per column: V is M x T, Y is S x T and
// each hidden layer is J x T with entries in {0, 1}.
struct HiddenStates {
  std::vector<Matrix> layers;

  Index frames() const { return layers.empty() ? 0 : layers.front().cols(); }
};

HiddenStates zero_hidden(const ModelSpec& spec, Index frames);

// [x_{t-1}; x_{t-2}; ...; x_{t-order}], zero for frames before the start.
Vector lag_window(const Matrix& states, Index t, int order);

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

Vector sigmoid(const Vector& x);

// sum_j h_j a_j - log(1 + exp(a_j)) for binary h.
double bernoulli_log_pmf(const Vector& logits, const Eigen::Ref<const Vector>& h);

void check_binary(const Matrix& m, std::string_view what);
void validate_sequence(const ModelSpec& spec, const Matrix& V, const Matrix& Y);
void validate_hidden(const ModelSpec& spec, const HiddenStates& H, Index frames);

// Inputs of hidden layer k at frame t (generative direction).
struct PriorInputs {
  Vector self_lags;
  Vector lower_lags;  // empty for hidden-Markov layer 1
  Vector above;       // empty on the top layer
};
PriorInputs prior_inputs(const ModelSpec& spec, int layer, Index t, const Matrix& V,
                         const HiddenStates& H);

// Inputs of hidden layer k at frame t (recognition direction).
struct PosteriorInputs {
  Vector self_lags;
  Vector lower_now;
  Vector lower_lags;
};
PosteriorInputs posterior_inputs(const ModelSpec& spec, int layer, Index t, const Matrix& V,
                                 const HiddenStates& H);

}  // namespace fctsbn

#endif  // FCTSBN_SEQUENCE_HPP
