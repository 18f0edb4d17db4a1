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

#include "fctsbn/schedule.hpp"

#include <cmath>
#include <string>

#include "fctsbn/sequence.hpp"

namespace fctsbn {

namespace {

void check_style(int style, Index styles) {
  if (style < 0 || style >= styles) {
    throw ValueError("style index " + std::to_string(style) + " out of range [0, " +
                     std::to_string(styles) + ")");
  }
}

}  // namespace

bool is_one_hot(const Eigen::Ref<const Vector>& y) {
  int ones = 0;
  for (Index s = 0; s < y.size(); ++s) {
    if (y[s] == 1.0) {
      ++ones;
    } else if (y[s] != 0.0) {
      return false;
    }
  }
  return ones == 1;
}

bool is_convex_mixture(const Eigen::Ref<const Vector>& y, double tol) {
  double total = 0.0;
  for (Index s = 0; s < y.size(); ++s) {
    if (!(y[s] >= 0.0)) return false;
    total += y[s];
  }
  return std::abs(total - 1.0) <= tol;
}

void StyleSchedule::validate() const {
  if (!Y.allFinite()) throw ValueError("schedule: non-finite side information");
  for (Index t = 0; t < Y.cols(); ++t) {
    const bool ok = encoding == Encoding::OneHot          ? is_one_hot(Y.col(t))
                    : encoding == Encoding::ConvexMixture ? is_convex_mixture(Y.col(t), 1e-9)
                                                          : true;
    if (!ok) throw ValueError("schedule: frame " + std::to_string(t) + " violates its encoding");
  }
}

double TransitionSpec::default_width() { return 60.0 / (2.0 * std::log(9.0)); }

StyleSchedule constant_schedule(Index styles, int style, Index frames) {
  check_style(style, styles);
  StyleSchedule s;
  s.Y = Matrix::Zero(styles, frames);
  s.Y.row(style).setOnes();
  s.encoding = Encoding::OneHot;
  return s;
}

StyleSchedule blend_schedule(const std::vector<double>& weights, Index frames) {
  Vector w = Eigen::Map<const Vector>(weights.data(), static_cast<Index>(weights.size()));
  if (!is_convex_mixture(w, 1e-9)) throw ValueError("blend weights must be nonnegative and sum to 1");
  StyleSchedule s;
  s.Y = w.replicate(1, frames);
  s.encoding = is_one_hot(w) ? Encoding::OneHot : Encoding::ConvexMixture;
  return s;
}

StyleSchedule transition_schedule(Index styles, const TransitionSpec& spec, Index frames) {
  check_style(spec.from_style, styles);
  check_style(spec.to_style, styles);
  if (spec.width < 0.0) throw ValueError("transition width must be >= 0");
  StyleSchedule s;
  s.Y = Matrix::Zero(styles, frames);
  for (Index t = 0; t < frames; ++t) {
    const double post = spec.width == 0.0 ? (static_cast<double>(t) >= spec.center ? 1.0 : 0.0)
                                          : sigmoid((static_cast<double>(t) - spec.center) / spec.width);
    s.Y(spec.to_style, t) += post;
    s.Y(spec.from_style, t) += 1.0 - post;
  }
  s.encoding = Encoding::ConvexMixture;
  return s;
}

}  // namespace fctsbn
