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

#ifndef FCTSBN_DEEP_HPP
#define FCTSBN_DEEP_HPP

#include <string>
#include <vector>

#include "fctsbn/model.hpp"
#include "fctsbn/nvil.hpp"

namespace fctsbn {

// log p(V, H^1..H^L | Y); H must carry one binary matrix per layer.
double deep_log_joint(const GenerativeParams& p, const Matrix& V, const HiddenStates& H,
                      const Matrix& Y);

struct DeepResult {
  MinibatchResult batch;
  // Tensor names owned by each layer (generative, recognition and baseline).
  std::vector<std::vector<std::string>> layer_tensors;
};

// Tensor names whose parameters belong to layer k.
std::vector<std::string> layer_tensor_names(const GradientSet& g, int layer);

// The stacked bound and its gradients. Layer k's recognition parameters are
// weighted by the signal of the terms that involve layer k; with one layer
// this is nvil_minibatch exactly.
DeepResult deep_elbo_and_grads(const GenerativeParams& p, const RecognitionParams& q,
                               const std::vector<BaselineParams>& baselines,
                               std::vector<SignalStats>& stats, const std::vector<Segment>& batch,
                               Rng& rng, const NvilOptions& options = {});

// Gradient of layer `layer`'s prior term (or the emission when layer == -1)
// alone, with all other terms masked out.
GenerativeParams term_gradients(const GenerativeParams& p, const Matrix& V, const HiddenStates& H,
                                const Matrix& Y, int layer);

// hidden_seeds[k] is the initial lag window of layer k (J_k x k frames,
// oldest first); empty entries are zero-filled.
GeneratedSequence deep_generate(const GenerativeParams& p, const Matrix& visible_seed,
                                const std::vector<Matrix>& hidden_seeds,
                                const StyleSchedule& schedule, Index frames, Rng& rng);

}  // namespace fctsbn

#endif  // FCTSBN_DEEP_HPP
