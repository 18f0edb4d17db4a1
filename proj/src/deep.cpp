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

#include "fctsbn/deep.hpp"

#include <string>

namespace fctsbn {

double deep_log_joint(const GenerativeParams& p, const Matrix& V, const HiddenStates& H,
                      const Matrix& Y) {
  if (static_cast<int>(H.layers.size()) != p.spec.dims.layers()) {
    throw ShapeError("deep_log_joint: " + std::to_string(H.layers.size()) +
                     " hidden layers supplied, model has " + std::to_string(p.spec.dims.layers()));
  }
  return log_joint(p, V, H, Y);
}

std::vector<std::string> layer_tensor_names(const GradientSet& g, int layer) {
  const std::string pre = layer_prefix(layer) + "/";
  std::vector<std::string> out;
  for (const auto& t : g.tensors()) {
    const std::string& n = t.name;
    if (n.rfind(pre, 0) == 0 || n.rfind("recognition/" + pre, 0) == 0 ||
        n.rfind("baseline/" + pre, 0) == 0)
      out.push_back(n);
  }
  return out;
}

DeepResult deep_elbo_and_grads(const GenerativeParams& p, const RecognitionParams& q,
                               const std::vector<BaselineParams>& baselines,
                               std::vector<SignalStats>& stats, const std::vector<Segment>& batch,
                               Rng& rng, const NvilOptions& options) {
  DeepResult out;
  out.batch = nvil_minibatch(p, q, baselines, stats, batch, rng, options);
  for (int k = 0; k < p.spec.dims.layers(); ++k)
    out.layer_tensors.push_back(layer_tensor_names(out.batch.grads, k));
  return out;
}

GenerativeParams term_gradients(const GenerativeParams& p, const Matrix& V, const HiddenStates& H,
                                const Matrix& Y, int layer) {
  const int layers = p.spec.dims.layers();
  if (layer < -1 || layer >= layers) throw ShapeError("term_gradients: layer index out of range");
  TermMask mask;
  mask.layers.assign(layers, false);
  mask.emission = layer == -1;
  if (layer >= 0) mask.layers[layer] = true;
  GenerativeParams g = p.zeros_like();
  accumulate_model_gradients(p, V, H, Y, g, mask);
  return g;
}

GeneratedSequence deep_generate(const GenerativeParams& p, const Matrix& visible_seed,
                                const std::vector<Matrix>& hidden_seeds,
                                const StyleSchedule& schedule, Index frames, Rng& rng) {
  GenerateOptions opts;
  opts.hidden_seeds = hidden_seeds;
  return generate(p, visible_seed, schedule, frames, rng, opts);
}

}  // namespace fctsbn
