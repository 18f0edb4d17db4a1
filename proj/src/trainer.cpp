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

#include "fctsbn/trainer.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "fctsbn/model.hpp"

namespace fctsbn {

namespace {

bool uses_baseline(const NvilOptions& o) {
  return o.baseline.data_dependent || o.baseline.data_independent;
}

std::vector<TensorRef> trainable(Checkpoint& c, bool with_baselines) {
  std::vector<TensorRef> out = c.model.tensors();
  for (auto& t : c.recognition.tensors()) out.push_back(t);
  if (with_baselines)
    for (auto& b : c.baselines)
      for (auto& t : b.tensors()) out.push_back(t);
  return out;
}

template <class P>
double norm_of(const P& p) {
  return std::sqrt(squared_norm(p));
}

}  // namespace

Checkpoint initial_state(const ModelSpec& spec, Rng& rng, const NvilOptions& options) {
  Checkpoint c;
  Rng r = rng.fork(0x1417);
  c.model = make_generative(spec);
  initialize(c.model, r);
  c.recognition = make_recognition(spec);
  initialize(c.recognition, r);
  if (uses_baseline(options)) c.baselines = make_baselines(spec, r);
  c.stats.assign(spec.dims.layers(), SignalStats{});
  return c;
}

std::vector<Segment> make_segments(const SequenceDataset& data, Index styles, Index length) {
  std::vector<Segment> out;
  for (const auto& r : data.records) {
    Matrix Y;
    if (r.Y) {
      check_size(r.Y->rows(), styles, "sequence " + r.id + " side-information rows S");
      Y = *r.Y;
    } else if (styles == 1) {
      Y = Matrix::Ones(1, r.frames());
    } else {
      throw ValueError("sequence " + r.id + " has no side information but the model has S = " +
                       std::to_string(styles));
    }
    const Index step = length > 0 ? length : r.frames();
    for (Index start = 0; start < r.frames(); start += step) {
      const Index len = std::min(step, r.frames() - start);
      out.push_back({r.V.middleCols(start, len), Y.middleCols(start, len)});
    }
  }
  return out;
}

double prediction_mae(const GenerativeParams& p, const RecognitionParams& q,
                      const SequenceDataset& data, int samples, const Rng& rng) {
  const auto segments = make_segments(data, p.spec.dims.styles, 0);
  double total = 0.0;
  Index count = 0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Segment& s = segments[i];
    if (s.V.cols() < 2) continue;
    Rng r = rng.fork(i);
    const Matrix pred = predict_sequence(p, q, s.V, s.Y, samples, r);
    const Index t = s.V.cols() - 1;
    total += (pred.rightCols(t) - s.V.rightCols(t)).cwiseAbs().sum();
    count += t * s.V.rows();
  }
  if (count == 0) throw ValueError("prediction_mae: no sequence has two or more frames");
  return total / static_cast<double>(count);
}

TrainResult train(const TrainConfig& config, Checkpoint init, const SequenceDataset& data,
                  const SequenceDataset* heldout, Rng& rng, const EpochCallback& on_epoch) {
  if (data.empty()) throw ValueError("train: dataset is empty");
  if (config.epochs < 0) throw ValueError("train: epochs must be >= 0");
  if (config.batch_size < 1) throw ValueError("train: batch_size must be >= 1");
  if (data.obs != init.model.spec.obs) throw ValueError("train: dataset observation kind differs from model");
  const int layers = init.model.spec.dims.layers();
  const bool with_baselines = uses_baseline(config.nvil);
  if (with_baselines && static_cast<int>(init.baselines.size()) != layers)
    throw ValueError("train: baselines enabled but the initial state has none");
  if (init.stats.empty()) init.stats.assign(layers, SignalStats{});

  TrainResult result;
  result.checkpoint = std::move(init);
  Checkpoint& state = result.checkpoint;
  const bool evaluate = heldout != nullptr && !heldout->empty();
  const Rng eval_rng = rng.fork(0xE7A1);
  if (evaluate && config.epochs > 0)
    result.initial_pred_error =
        prediction_mae(state.model, state.recognition, *heldout, config.prediction_samples, eval_rng);

  std::vector<Segment> segments =
      make_segments(data, state.model.spec.dims.styles, config.subsequence_length);
  RmsProp opt(config.rmsprop);
  Rng shuffle_rng = rng.fork(0x5F1E);
  Rng batch_rng = rng.fork(0xBA7C);
  int nan_run = 0;
  double smoothed = 0.0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<std::size_t> order(segments.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.next_u64() % i]);

    double elbo_sum = 0.0;
    Index frame_sum = 0;
    double sig_mean = 0.0, sig_var = 0.0;
    double norm_model = 0.0, norm_rec = 0.0, norm_base = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      std::vector<Segment> batch;
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      for (std::size_t i = start; i < end; ++i) batch.push_back(segments[order[i]]);
      MinibatchResult res = nvil_minibatch(state.model, state.recognition, state.baselines,
                                           state.stats, batch, batch_rng, config.nvil);
      if (!std::isfinite(res.elbo)) {
        if (++nan_run >= 2) {
          std::ostringstream msg;
          msg << "train: non-finite ELBO in two consecutive minibatches (epoch " << epoch
              << ", batch " << batches << "); parameters finite: model="
              << all_finite(state.model) << " recognition=" << all_finite(state.recognition)
              << "; signal stats layer1 mean=" << state.stats[0].mean
              << " var=" << state.stats[0].var << "; skipped steps=" << opt.skipped_steps();
          throw NumericAbort(msg.str());
        }
      } else {
        nan_run = 0;
      }
      std::vector<TensorRef> params = trainable(state, with_baselines);
      opt.step(params, std::as_const(res.grads).tensors());

      for (std::size_t i = 0; i < batch.size(); ++i) {
        elbo_sum += res.sequence_elbo[i];
        frame_sum += batch[i].V.cols();
      }
      sig_mean += res.signal_mean[0];
      sig_var += res.signal_var[0];
      norm_model += norm_of(res.grads.model);
      norm_rec += norm_of(res.grads.recognition);
      for (const auto& b : res.grads.baselines) norm_base += norm_of(b);
      ++batches;
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.elbo = elbo_sum / static_cast<double>(frame_sum);
    smoothed = epoch == 1 ? m.elbo
                          : config.elbo_smoothing * smoothed + (1.0 - config.elbo_smoothing) * m.elbo;
    m.smoothed_elbo = smoothed;
    m.signal_mean = sig_mean / batches;
    m.signal_var = sig_var / batches;
    m.grad_norms["model"] = norm_model / batches;
    m.grad_norms["recognition"] = norm_rec / batches;
    if (with_baselines) m.grad_norms["baseline"] = norm_base / batches;
    m.skipped_steps = opt.skipped_steps();
    if (evaluate)
      m.pred_error = prediction_mae(state.model, state.recognition, *heldout,
                                    config.prediction_samples, eval_rng);
    result.metrics.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  return result;
}

}  // namespace fctsbn
