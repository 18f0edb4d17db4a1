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
#include <filesystem>
#include <fstream>
#include <string>

#include <unistd.h>

#include "fctsbn/data_io.hpp"
#include "fixtures.hpp"

using namespace fctsbn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("fctsbn_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

SequenceDataset two_sequences(Rng& rng) {
  SequenceDataset d;
  d.records.push_back({"a", oracle::random_matrix(3, 5, rng) * 1e3, oracle::random_mixture(2, 5, rng), {{0, 1}, {2, 0}}});
  d.records.push_back({"b", oracle::random_matrix(3, 4, rng) / 7.0, oracle::random_mixture(2, 4, rng), {}});
  return d;
}

PlantConfig plant(double sep) {
  PlantConfig cfg;
  cfg.spec = fixture::spec(ObsKind::Real, true, 4, 2, {4});
  cfg.style_separation = sep;
  cfg.sequences = 60;
  cfg.frames = 40;
  return cfg;
}

}  // namespace

TEST_SUITE("data_io") {

TEST_CASE("empty directory loads as an empty dataset") {
  TempDir dir("empty");
  const SequenceDataset d = load_dataset(dir.path, ObsKind::Real);
  CHECK(d.empty());
  CHECK(d.visible() == 0);
  CHECK_THROWS_AS(load_dataset(dir.path / "missing", ObsKind::Real), IoError);
}

TEST_CASE("save and load round-trip bit-exactly") {
  TempDir dir("roundtrip");
  Rng rng(141);
  const SequenceDataset d = two_sequences(rng);
  for (bool header : {false, true}) {
    save_dataset(d, dir.path, {header});
    const SequenceDataset back = load_dataset(dir.path, ObsKind::Real, {header});
    REQUIRE(back.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(back.records[i].id == d.records[i].id);
      CHECK(back.records[i].V == d.records[i].V);
      CHECK(*back.records[i].Y == *d.records[i].Y);
    }
    REQUIRE(back.records[0].labels.size() == 2);
    CHECK(back.records[0].labels[1].start == 2);
    CHECK(back.records[0].labels[0].style == 1);
  }
}

TEST_CASE("malformed rows cite the line") {
  TempDir dir("ragged");
  {
    std::ofstream out(dir.path / "s.csv");
    out << "1,2,3,4,5\n1,2,3,4,5\n1,2,3\n";
  }
  try {
    load_dataset(dir.path, ObsKind::Real);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("s.csv") != std::string::npos);
    CHECK(msg.find(":3") != std::string::npos);
  }
  {
    std::ofstream out(dir.path / "s.csv");
    out << "1,2\nnan,2\n";
  }
  CHECK_THROWS_AS(load_dataset(dir.path, ObsKind::Real), IoError);
  {
    std::ofstream out(dir.path / "s.csv");
    out << "1,0\n0.5,1\n";
  }
  CHECK_THROWS(load_dataset(dir.path, ObsKind::Binary));
  {
    std::ofstream out(dir.path / "s.csv");
    out << "1,0\n0,1\n";
    std::ofstream t(dir.path / "t.csv");
    t << "1,0,1\n";
  }
  CHECK_THROWS(load_dataset(dir.path, ObsKind::Binary));
}

TEST_CASE("normalization") {
  Rng rng(142);
  SequenceDataset d = two_sequences(rng);
  d.records[1].V.row(2).setConstant(4.0);
  d.records[0].V.row(2).setConstant(4.0);
  const auto [norm, stats] = normalize(d);
  CHECK(stats.constant[2]);
  CHECK_FALSE(stats.constant[0]);
  CHECK(norm.records[0].V.row(2) == d.records[0].V.row(2));
  for (Index m = 0; m < 2; ++m) {
    double s = 0.0, ss = 0.0;
    int n = 0;
    for (const auto& r : norm.records)
      for (Index t = 0; t < r.V.cols(); ++t, ++n) {
        s += r.V(m, t);
        ss += r.V(m, t) * r.V(m, t);
      }
    const double mean = s / n;
    CHECK(std::abs(mean) < 1e-10);
    CHECK(std::abs(std::sqrt(ss / n - mean * mean) - 1.0) < 1e-10);
  }
  for (std::size_t i = 0; i < 2; ++i)
    CHECK((denormalize(norm.records[i].V, stats) - d.records[i].V).cwiseAbs().maxCoeff() <= 1e-12 * 1e3);
  SequenceDataset big;
  big.records.push_back({"x", oracle::random_matrix(5, 200, rng), std::nullopt, {}});
  const auto [bn, bs] = normalize(big);
  CHECK((denormalize(bn.records[0].V, bs) - big.records[0].V).cwiseAbs().maxCoeff() <= 1e-12);
  SequenceDataset bin;
  bin.obs = ObsKind::Binary;
  bin.records.push_back({"x", Matrix::Ones(2, 3), std::nullopt, {}});
  CHECK_THROWS_AS(normalize(bin), ValueError);
}

TEST_CASE("planted data with no separation") {
  Rng rng(143);
  const PlantedModel pm = plant_model(plant(0.0), rng);
  for (Index m = 0; m < 4; ++m) {
    std::vector<double> a, b;
    for (std::size_t i = 0; i < pm.data.size(); ++i)
      (i % 2 == 0 ? a : b).push_back(pm.data.records[i].V.row(m).mean());
    const double se = std::sqrt(std::pow(oracle::std_error(a), 2) + std::pow(oracle::std_error(b), 2));
    CHECK(std::abs(oracle::mean(a) - oracle::mean(b)) < 3.0 * se);
  }
}

TEST_CASE("planted styles are separable") {
  Rng rng(144);
  const PlantedModel pm = plant_model(plant(6.0), rng);
  REQUIRE(pm.data.styles() == 2);
  Index correct = 0, total = 0;
  for (const auto& r : pm.data.records) {
    CHECK(r.frames() == 40);
    for (Index t = 0; t < r.frames(); ++t, ++total) {
      Index truth = 0;
      r.Y->col(t).maxCoeff(&truth);
      const Index guess = r.V.col(t).mean() > 0.0 ? 1 : 0;
      correct += guess == truth;
    }
  }
  CHECK(static_cast<double>(correct) / static_cast<double>(total) >= 0.99);
}

TEST_CASE("planted data is reproducible") {
  Rng a(145), b(145), c(146);
  const PlantedModel x = plant_model(plant(6.0), a);
  const PlantedModel y = plant_model(plant(6.0), b);
  const PlantedModel z = plant_model(plant(6.0), c);
  CHECK(x.data.records[7].V == y.data.records[7].V);
  CHECK(bitwise_equal(x.truth, y.truth));
  CHECK_FALSE(x.data.records[7].V == z.data.records[7].V);
  PlantConfig counts = plant(6.0);
  counts.spec.obs = ObsKind::Count;
  counts.count_total = 12;
  Rng d(147);
  const PlantedModel w = plant_model(counts, d);
  CHECK(w.data.records[0].V.colwise().sum().maxCoeff() == 12.0);
  validate_dataset(w.data);
}

}  // TEST_SUITE
