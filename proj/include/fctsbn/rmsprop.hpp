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

#ifndef FCTSBN_RMSPROP_HPP
#define FCTSBN_RMSPROP_HPP

#include <cstdint>
#include <vector>

#include "fctsbn/cond_weight.hpp"

namespace fctsbn {

struct RmsPropConfig {
  double learning_rate = 3e-3;
  double decay = 0.9;
  double epsilon = 1e-6;
};

/**
 * RMSprop in ascent form:
 *   acc <- decay * acc + (1 - decay) * g^2
 *   p   <- p + lr * g / sqrt(acc + eps)
 * Accumulators are allocated on the first step and matched to tensors by
 * position. A step whose gradient has any non-finite entry is skipped.
 */
class RmsProp {
 public:
  explicit RmsProp(RmsPropConfig config = {}) : config_(config) {}

  // Returns false when the step was skipped.
  bool step(const std::vector<TensorRef>& params, const std::vector<ConstTensorRef>& grads);

  const RmsPropConfig& config() const { return config_; }
  std::uint64_t skipped_steps() const { return skipped_; }
  std::uint64_t steps() const { return steps_; }
  const std::vector<Matrix>& accumulators() const { return acc_; }

 private:
  RmsPropConfig config_;
  std::vector<Matrix> acc_;
  std::uint64_t skipped_ = 0;
  std::uint64_t steps_ = 0;
};

// Convenience for parameter sets that expose tensors().
template <class P>
bool rmsprop_step(RmsProp& opt, P& params, const P& grads) {
  return opt.step(params.tensors(), grads.tensors());
}

}  // namespace fctsbn

#endif  // FCTSBN_RMSPROP_HPP
