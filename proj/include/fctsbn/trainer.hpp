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

#ifndef FCTSBN_TRAINER_HPP
#define FCTSBN_TRAINER_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fctsbn/checkpoint.hpp"
#include "fctsbn/dataset.hpp"
#include "fctsbn/nvil.hpp"
#include "fctsbn/rmsprop.hpp"

namespace fctsbn {

struct TrainConfig {
  int epochs = 50;
  Index batch_size = 20;
  Index subsequence_length = 50;
  RmsPropConfig rmsprop;
  NvilOptions nvil;
  int prediction_samples = 10;
  double elbo_smoothing = 0.5;  // weight of the previous smoothed value
};

struct EpochMetrics {
  int epoch = 0;
  double elbo = 0.0;           // raw ELBO per frame, averaged over the epoch
  double smoothed_elbo = 0.0;
  std::optional<double> pred_error;
  double signal_mean = 0.0;
  double signal_var = 0.0;
  std::map<std::string, double> grad_norms;
  std::uint64_t skipped_steps = 0;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

// Training parameters drawn with the documented initialization.
Checkpoint initial_state(const ModelSpec& spec, Rng& rng, const NvilOptions& options = {});

// Contiguous pieces of at most `length` frames (0: whole sequences).
// Sequences without side information get a constant all-ones Y when S = 1.
std::vector<Segment> make_segments(const SequenceDataset& data, Index styles, Index length);

// Mean absolute one-step prediction error over frames t >= 1.
double prediction_mae(const GenerativeParams& p, const RecognitionParams& q,
                      const SequenceDataset& data, int samples, const Rng& rng);

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochMetrics> metrics;
  std::optional<double> initial_pred_error;
};

/**
 * Runs `epochs` passes of shuffled minibatches with one RMSprop step per
 * minibatch. Aborts with NumericAbort after two consecutive minibatches with
 * a non-finite ELBO. When `heldout` is non-empty the one-step prediction
 * error is logged every epoch.
 */
TrainResult train(const TrainConfig& config, Checkpoint init, const SequenceDataset& data,
                  const SequenceDataset* heldout, Rng& rng, const EpochCallback& on_epoch = {});

}  // namespace fctsbn

#endif  // FCTSBN_TRAINER_HPP
