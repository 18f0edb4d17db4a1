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

#include <doctest.h>

#include <cmath>

#include "fctsbn/schedule.hpp"
#include "fctsbn/types.hpp"

using namespace fctsbn;

TEST_SUITE("schedule") {

TEST_CASE("constant schedules are one-hot") {
  const StyleSchedule s = constant_schedule(3, 2, 5);
  CHECK(s.frames() == 5);
  for (Index t = 0; t < 5; ++t) CHECK(is_one_hot(s.Y.col(t)));
  CHECK(s.Y(2, 4) == 1.0);
  CHECK_THROWS_AS(constant_schedule(3, 3, 5), ValueError);
}

TEST_CASE("zero width switches at the center") {
  TransitionSpec spec;
  spec.center = 10;
  spec.width = 0.0;
  const StyleSchedule s = transition_schedule(2, spec, 20);
  for (Index t = 0; t < 20; ++t) CHECK(s.Y(1, t) == (t >= 10 ? 1.0 : 0.0));
}

TEST_CASE("default ramp rises over sixty frames") {
  TransitionSpec spec;
  spec.center = 100;
  const StyleSchedule s = transition_schedule(3, spec, 200);
  Index lo = -1, hi = -1;
  for (Index t = 0; t < 200; ++t) {
    if (lo < 0 && s.Y(1, t) >= 0.1) lo = t;
    if (hi < 0 && s.Y(1, t) >= 0.9) hi = t;
    CHECK(std::abs(s.Y.col(t).sum() - 1.0) <= 1e-12);
    CHECK(s.Y(2, t) == 0.0);
  }
  CHECK(std::abs(static_cast<double>(hi - lo) - 60.0) <= 2.0);
  CHECK(TransitionSpec::default_width() == doctest::Approx(60.0 / (2.0 * std::log(9.0))));
  s.validate();
}

TEST_CASE("blends are convex") {
  const StyleSchedule s = blend_schedule({0.25, 0.75}, 4);
  CHECK(is_convex_mixture(s.Y.col(3)));
  CHECK(s.Y(1, 0) == 0.75);
  CHECK_THROWS_AS(blend_schedule({0.5, 0.6}, 4), ValueError);
  CHECK_THROWS_AS(blend_schedule({-0.5, 1.5}, 4), ValueError);
  StyleSchedule bad = s;
  bad.Y(0, 2) = 0.9;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("frame 2"), ValueError);
}

}  // TEST_SUITE
