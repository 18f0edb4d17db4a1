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
#include <limits>

#include "fctsbn/data_io.hpp"
#include "fctsbn/types.hpp"
#include "fctsbn/trainer.hpp"
#include "fixtures.hpp"

using namespace fctsbn;

namespace {

PlantedModel small_planted(std::uint64_t seed, int sequences = 20) {
  PlantConfig cfg;
  cfg.spec = fixture::spec(ObsKind::Real, true, 3, 2, {4});
  cfg.sequences = sequences;
  cfg.frames = 20;
  Rng rng(seed);
  return plant_model(cfg, rng);
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("segments cover every frame") {
  const PlantedModel pm = small_planted(81, 3);
  const auto segs = make_segments(pm.data, 2, 7);
  REQUIRE(segs.size() == 9);
  CHECK(segs[0].V.cols() == 7);
  CHECK(segs[2].V.cols() == 6);
  CHECK(segs[2].V == pm.data.records[0].V.rightCols(6));
  CHECK(make_segments(pm.data, 2, 0).size() == 3);
  SequenceDataset bare;
  bare.records.push_back({"a", Matrix::Zero(2, 4), std::nullopt, {}});
  CHECK(make_segments(bare, 1, 0)[0].Y == Matrix::Ones(1, 4));
  CHECK_THROWS_AS(make_segments(bare, 2, 0), ValueError);
}

TEST_CASE("zero epochs return the initial parameters") {
  const PlantedModel pm = small_planted(82);
  Rng init_rng(83);
  const Checkpoint init = initial_state(pm.truth.spec, init_rng);
  TrainConfig cfg;
  cfg.epochs = 0;
  Rng rng(84);
  const TrainResult r = train(cfg, init, pm.data, nullptr, rng);
  CHECK(r.metrics.empty());
  CHECK(bitwise_equal(r.checkpoint.model, init.model));
  CHECK(bitwise_equal(r.checkpoint.recognition, init.recognition));
}

TEST_CASE("initialization scales") {
  Rng rng(85);
  const Checkpoint c = initial_state(fixture::spec(ObsKind::Real, false, 20, 1, {30}), rng);
  const Matrix& w = c.model.emission.w2.tensor();
  const double sd = std::sqrt(w.squaredNorm() / static_cast<double>(w.size()));
  CHECK(sd == doctest::Approx(0.001).epsilon(0.1));
  const Matrix& u = c.recognition.layers[0].lower_now.tensor();
  CHECK(std::sqrt(u.squaredNorm() / static_cast<double>(u.size())) == doctest::Approx(0.01).epsilon(0.1));
  Rng again(85);
  CHECK(bitwise_equal(initial_state(c.model.spec, again).model, c.model));
}

TEST_CASE("short training raises the bound and is reproducible") {
  const PlantedModel pm = small_planted(86);
  Rng init_rng(87);
  const Checkpoint init = initial_state(pm.truth.spec, init_rng);
  TrainConfig cfg;
  cfg.epochs = 6;
  cfg.batch_size = 5;
  cfg.subsequence_length = 10;
  cfg.rmsprop.learning_rate = 1e-2;
  Rng a(88), b(88);
  int calls = 0;
  const TrainResult r1 = train(cfg, init, pm.data, &pm.data, a, [&](const EpochMetrics&) { ++calls; });
  const TrainResult r2 = train(cfg, init, pm.data, &pm.data, b);
  CHECK(calls == 6);
  REQUIRE(r1.metrics.size() == 6);
  CHECK(r1.metrics.back().elbo > r1.metrics.front().elbo);
  CHECK(r1.metrics.front().smoothed_elbo == r1.metrics.front().elbo);
  CHECK(r1.metrics[1].smoothed_elbo ==
        doctest::Approx(0.5 * r1.metrics[0].elbo + 0.5 * r1.metrics[1].elbo).epsilon(1e-12));
  REQUIRE(r1.initial_pred_error);
  CHECK(r1.metrics.back().pred_error.has_value());
  CHECK(bitwise_equal(r1.checkpoint.model, r2.checkpoint.model));
  CHECK(bitwise_equal(r1.checkpoint.recognition, r2.checkpoint.recognition));
}

TEST_CASE("non-finite parameters abort training") {
  const PlantedModel pm = small_planted(89);
  Rng init_rng(90);
  Checkpoint init = initial_state(pm.truth.spec, init_rng);
  init.model.emission.c(0, 0) = std::numeric_limits<double>::quiet_NaN();
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 5;
  Rng rng(91);
  try {
    train(cfg, init, pm.data, nullptr, rng);
    FAIL("expected NumericAbort");
  } catch (const NumericAbort& e) {
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

}  // TEST_SUITE
