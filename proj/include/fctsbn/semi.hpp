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

#ifndef FCTSBN_SEMI_HPP
#define FCTSBN_SEMI_HPP

#include <optional>
#include <vector>

#include "fctsbn/checkpoint.hpp"
#include "fctsbn/classifier.hpp"
#include "fctsbn/dataset.hpp"
#include "fctsbn/nvil.hpp"
#include "fctsbn/rmsprop.hpp"

namespace fctsbn {

struct SemiConfig {
  Index window = 0;            // 0: order + 1
  double alpha = 0.0;          // 0: 2 * window
  // Probability of drawing a labeled batch; unset: proportional to pool sizes.
  std::optional<double> labeled_probability;
  int epochs = 20;
  Index batch_size = 20;
  RmsPropConfig rmsprop;
  NvilOptions nvil;

  Index resolved_window(const ModelSpec& spec) const { return window > 0 ? window : spec.dims.order + 1; }
  double resolved_alpha(const ModelSpec& spec) const {
    return alpha > 0.0 ? alpha : 2.0 * static_cast<double>(resolved_window(spec));
  }
};

// A window treated as its own short sequence with constant side information.
struct Window {
  Matrix V;               // M x w
  std::optional<int> label;
};

std::vector<Window> labeled_windows(const SequenceDataset& data, Index window);
// Non-overlapping windows tiling every sequence; labels are dropped.
std::vector<Window> unlabeled_windows(const SequenceDataset& data, Index window);

Matrix one_hot_schedule(Index styles, int style, Index frames);

struct SemiGradients {
  GradientSet model;              // theta, phi, lambda
  ClassifierParams classifier;    // psi
};

struct ObjectiveResult {
  SemiGradients grads;
  double objective = 0.0;         // summed over the batch
  double elbo = 0.0;              // summed raw ELBO over the batch
  std::vector<int> sampled_styles;  // unlabeled objective only
};

// sum_i ELBO(V_i | y_i) + alpha * log q(y_i | V_i).
ObjectiveResult labeled_objective(const GenerativeParams& p, const RecognitionParams& q,
                                  const ClassifierParams& c,
                                  const std::vector<BaselineParams>& baselines,
                                  std::vector<SignalStats>& stats, const std::vector<Window>& batch,
                                  double alpha, Rng& rng, const NvilOptions& options = {});

// sum_i ELBO(V_i | y_i) - log q(y_i | V_i) with y_i ~ q(y | V_i). The style
// draws use a stream forked from `rng`; the hidden-state draws use `rng`
// itself, as in labeled_objective. The classifier receives score-function
// gradients of the centered, normalized style signal; its baseline is the
// layer-1 baseline summed over the window with y replaced by q(y | V).
ObjectiveResult unlabeled_objective(const GenerativeParams& p, const RecognitionParams& q,
                                    const ClassifierParams& c,
                                    const std::vector<BaselineParams>& baselines,
                                    std::vector<SignalStats>& stats, SignalStats& style_stats,
                                    const std::vector<Window>& batch, Rng& rng,
                                    const NvilOptions& options = {});

double classification_accuracy(const ClassifierParams& c, const std::vector<Window>& windows);

struct SemiEpochMetrics {
  int epoch = 0;
  std::optional<double> accuracy;
  double elbo = 0.0;  // per frame
  int labeled_batches = 0;
  int unlabeled_batches = 0;
};

struct SemiResult {
  Checkpoint checkpoint;  // carries the classifier
  std::vector<SemiEpochMetrics> metrics;
};

// Alternates labeled and unlabeled minibatches by a weighted coin. An epoch
// is ceil((labeled + unlabeled) / batch_size) minibatches.
SemiResult semi_train(const SemiConfig& config, Checkpoint init, const std::vector<Window>& labeled,
                      const std::vector<Window>& unlabeled, const std::vector<Window>* test, Rng& rng);

// Labeled-only reference: the classifier trained alone on cross-entropy with
// the same optimizer and the same number of minibatches per epoch as the
// labeled branch would see.
ClassifierParams train_softmax_baseline(const SemiConfig& config, const ModelSpec& spec,
                                        const std::vector<Window>& labeled, Rng& rng);

}  // namespace fctsbn

#endif  // FCTSBN_SEMI_HPP
