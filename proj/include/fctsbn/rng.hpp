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

#ifndef FCTSBN_RNG_HPP
#define FCTSBN_RNG_HPP

#include <array>
#include <cstdint>
#include <span>

namespace fctsbn {

// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
// as easy as 1, 2, 3"). Exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

std::uint64_t splitmix64(std::uint64_t x);

/**
 * Counter-based random stream.
 *
 * The 64-bit seed is the Philox key. The 128-bit counter is split into a
 * 64-bit stream id (high half) and a 64-bit block index (low half), so a
 * stream is fully determined by (seed, stream) and independent streams can be
 * handed to worker threads without coordination. Doubles are built from 53
 * random bits; normals use Box-Muller. No std:: distributions are involved,
 * so draws are identical across platforms.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  // Uniform on [0, 1).
  double uniform();
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  bool bernoulli(double p) { return uniform() < p; }
  // Index drawn from unnormalized nonnegative weights.
  int categorical(std::span<const double> weights);

  // Child stream keyed by (this stream, tag). Does not advance this stream.
  Rng fork(std::uint64_t tag) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace fctsbn

#endif  // FCTSBN_RNG_HPP
