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

#ifndef FCTSBN_SCHEDULE_HPP
#define FCTSBN_SCHEDULE_HPP

#include <vector>

#include "fctsbn/types.hpp"

namespace fctsbn {

enum class Encoding { OneHot, ConvexMixture, RealValued };

// Side information over time, one column per frame (S x T).
struct StyleSchedule {
  Matrix Y;
  Encoding encoding = Encoding::OneHot;

  Index frames() const { return Y.cols(); }
  Index styles() const { return Y.rows(); }
  // Throws ValueError naming the first offending frame.
  void validate() const;
};

bool is_one_hot(const Eigen::Ref<const Vector>& y);
bool is_convex_mixture(const Eigen::Ref<const Vector>& y, double tol = 1e-12);

// Logistic ramp from one style to another: y_to(t) = sigmoid((t - center) / width),
// y_from(t) = 1 - y_to(t). width == 0 switches hard at `center`.
struct TransitionSpec {
  int from_style = 0;
  int to_style = 1;
  double center = 0.0;
  double width = default_width();

  // Width whose 10%..90% rise spans 60 frames: 60 / (2 ln 9).
  static double default_width();
};

StyleSchedule constant_schedule(Index styles, int style, Index frames);
StyleSchedule blend_schedule(const std::vector<double>& weights, Index frames);
StyleSchedule transition_schedule(Index styles, const TransitionSpec& spec, Index frames);

}  // namespace fctsbn

#endif  // FCTSBN_SCHEDULE_HPP
