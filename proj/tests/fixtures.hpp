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

#ifndef FCTSBN_TESTS_FIXTURES_HPP
#define FCTSBN_TESTS_FIXTURES_HPP

#include <vector>

#include "fctsbn/params.hpp"
#include "oracles.hpp"

namespace fixture {

using namespace fctsbn;

inline ModelSpec spec(ObsKind obs, bool factored, int M, int S, std::vector<int> layers,
                      int order = 1, int F = 2, bool hidden_markov = false) {
  ModelSpec s;
  s.obs = obs;
  s.factored = factored;
  s.hidden_markov = hidden_markov;
  s.dims.visible = M;
  s.dims.styles = S;
  s.dims.factors = factored ? F : 0;
  s.dims.order = order;
  s.dims.layer_sizes = std::move(layers);
  return s;
}

inline Matrix observations(ObsKind obs, Index M, Index T, Rng& rng) {
  switch (obs) {
    case ObsKind::Real:
      return oracle::random_matrix(M, T, rng);
    case ObsKind::Binary:
      return oracle::random_binary(M, T, rng);
    case ObsKind::Count: {
      Matrix V(M, T);
      for (Index i = 0; i < V.size(); ++i) V.data()[i] = static_cast<double>(rng.next_u32() % 4);
      return V;
    }
  }
  return {};
}

inline HiddenStates hidden(const ModelSpec& s, Index T, Rng& rng) {
  HiddenStates H;
  for (int j : s.dims.layer_sizes) H.layers.push_back(oracle::random_binary(j, T, rng));
  return H;
}

}  // namespace fixture

#endif  // FCTSBN_TESTS_FIXTURES_HPP
