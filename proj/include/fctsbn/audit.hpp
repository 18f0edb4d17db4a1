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

#ifndef FCTSBN_AUDIT_HPP
#define FCTSBN_AUDIT_HPP

#include <cstdint>
#include <string>

#include "fctsbn/parallel.hpp"
#include "fctsbn/params.hpp"
#include "fctsbn/rng.hpp"
#include "fctsbn/sequence.hpp"

namespace fctsbn {

// Hard cap on enumerated hidden bits (sum of J_k * T).
inline constexpr int kMaxEnumerationBits = 24;

int hidden_bits(const ModelSpec& spec, Index frames);

// Configuration `code` of all hidden layers: bit (k, j, t) is taken in
// layer-major, then frame-major, then unit order.
HiddenStates decode_hidden(const ModelSpec& spec, Index frames, std::uint64_t code);

struct EnumerationSums {
  double log_marginal = 0.0;  // log sum_H p(V, H | Y)
  double log_q_mass = 0.0;    // log sum_H q(H | V, Y); 0 for a normalized q
  double exact_elbo = 0.0;    // sum_H q(H) [log p(V, H) - log q(H)]
};

// Brute-force sums over every hidden configuration. The parallel kernel
// splits codes into fixed chunks and merges them in chunk order, so its
// result does not depend on worker count; the serial kernel is a single
// running accumulation kept as the reference.
EnumerationSums enumerate_sums(const GenerativeParams& p, const RecognitionParams& q,
                               const Matrix& V, const Matrix& Y, Policy policy = Policy::Parallel);
EnumerationSums enumerate_sums_serial(const GenerativeParams& p, const RecognitionParams& q,
                                      const Matrix& V, const Matrix& Y);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  Index samples = 0;
};

// Mean of log p(V, H) - log q(H) over H ~ q; sample i uses stream i of `rng`.
MonteCarloEstimate monte_carlo_elbo(const GenerativeParams& p, const RecognitionParams& q,
                                    const Matrix& V, const Matrix& Y, Index samples,
                                    const Rng& rng, Policy policy = Policy::Parallel);

// A small enumerable problem for bound audits. Even indices are random
// instances over the observation families and one or two layers; odd indices
// are dense one-layer Gaussian models whose recognition network reproduces
// the exact posterior (W1 = W3 = W4 = 0, W2 with orthogonal columns, fixed
// isotropic variance).
struct AuditInstance {
  std::string label;
  GenerativeParams p;
  RecognitionParams q;
  Matrix V;
  Matrix Y;
  bool exact_posterior = false;
};

AuditInstance make_audit_instance(int index, std::uint64_t seed);

}  // namespace fctsbn

#endif  // FCTSBN_AUDIT_HPP
