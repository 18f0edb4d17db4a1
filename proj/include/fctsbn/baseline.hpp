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

#ifndef FCTSBN_BASELINE_HPP
#define FCTSBN_BASELINE_HPP

#include <string>
#include <vector>

#include "fctsbn/cond_weight.hpp"
#include "fctsbn/rng.hpp"
#include "fctsbn/types.hpp"

namespace fctsbn {

inline constexpr int kBaselineHidden = 100;

struct BaselineOptions {
  bool data_dependent = true;    // tanh network term
  bool data_independent = true;  // learned scalar
};

/**
 * Learning-signal predictor C(x) = w_out . tanh(W x + b) + c0.
 *
 * x is the window the recognition layer sees at t: [below_t; below_lags; y_t].
 */
struct BaselineParams {
  Matrix w_hidden;  // H x D
  Matrix b_hidden;  // H x 1
  Matrix w_out;     // 1 x H
  Matrix c0;        // 1 x 1
  std::string name = "baseline/layer1";

  Index input_dim() const { return w_hidden.cols(); }
  BaselineParams zeros_like() const;
  std::vector<TensorRef> tensors();
  std::vector<ConstTensorRef> tensors() const;
};

BaselineParams make_baseline(Index input_dim, int hidden = kBaselineHidden,
                             std::string name = "baseline/layer1");
// Hidden weights ~ N(0, 1/D); output weights and c0 zero.
void initialize(BaselineParams& b, Rng& rng);

Vector baseline_input(const Vector& below_t, const Vector& below_lags, const Vector& y);

double baseline_eval(const BaselineParams& b, const Vector& x, const BaselineOptions& opt = {});

// grad += signal * dC/dlambda at x.
void baseline_accumulate_gradient(const BaselineParams& b, const Vector& x, double signal,
                                  BaselineParams& grad, const BaselineOptions& opt = {});

}  // namespace fctsbn

#endif  // FCTSBN_BASELINE_HPP
