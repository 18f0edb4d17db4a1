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

#include "fctsbn/semi.hpp"

#include <cmath>
#include <numeric>
#include <utility>

#include "fctsbn/sequence.hpp"

namespace fctsbn {

namespace {

bool uses_baseline(const NvilOptions& o) {
  return o.baseline.data_dependent || o.baseline.data_independent;
}

// Cycles through a pool in freshly shuffled order.
class PoolCursor {
 public:
  PoolCursor(std::size_t size, Rng rng) : size_(size), rng_(rng) { reshuffle(); }

  std::size_t next() {
    if (pos_ == order_.size()) reshuffle();
    return order_[pos_++];
  }

 private:
  void reshuffle() {
    order_.resize(size_);
    std::iota(order_.begin(), order_.end(), 0);
    for (std::size_t i = order_.size(); i > 1; --i) std::swap(order_[i - 1], order_[rng_.next_u64() % i]);
    pos_ = 0;
  }

  std::size_t size_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

std::vector<Window> take(const std::vector<Window>& pool, PoolCursor& cursor, Index count) {
  std::vector<Window> out;
  const Index n = std::min<Index>(count, static_cast<Index>(pool.size()));
  for (Index i = 0; i < n; ++i) out.push_back(pool[cursor.next()]);
  return out;
}

std::vector<TensorRef> trainable(Checkpoint& c, bool with_baselines) {
  std::vector<TensorRef> out = c.model.tensors();
  for (auto& t : c.recognition.tensors()) out.push_back(t);
  if (with_baselines)
    for (auto& b : c.baselines)
      for (auto& t : b.tensors()) out.push_back(t);
  for (auto& t : c.classifier->tensors()) out.push_back(t);
  return out;
}

std::vector<ConstTensorRef> gradient_refs(const SemiGradients& g) {
  std::vector<ConstTensorRef> out = g.model.tensors();
  for (auto& t : g.classifier.tensors()) out.push_back(t);
  return out;
}

Vector window_vector(const Window& w) { return classifier_window(w.V, 0, w.V.cols()); }

}  // namespace

Matrix one_hot_schedule(Index styles, int style, Index frames) {
  if (style < 0 || style >= styles) throw ValueError("style index " + std::to_string(style) + " out of range");
  Matrix Y = Matrix::Zero(styles, frames);
  Y.row(style).setOnes();
  return Y;
}

std::vector<Window> labeled_windows(const SequenceDataset& data, Index window) {
  std::vector<Window> out;
  for (const auto& r : data.records) {
    for (const auto& l : r.labels) {
      if (l.start + window > r.frames()) continue;
      out.push_back({r.V.middleCols(l.start, window), l.style});
    }
  }
  return out;
}

std::vector<Window> unlabeled_windows(const SequenceDataset& data, Index window) {
  std::vector<Window> out;
  for (const auto& r : data.records)
    for (Index start = 0; start + window <= r.frames(); start += window)
      out.push_back({r.V.middleCols(start, window), std::nullopt});
  return out;
}

ObjectiveResult labeled_objective(const GenerativeParams& p, const RecognitionParams& q,
                                  const ClassifierParams& c,
                                  const std::vector<BaselineParams>& baselines,
                                  std::vector<SignalStats>& stats, const std::vector<Window>& batch,
                                  double alpha, Rng& rng, const NvilOptions& options) {
  const Index styles = p.spec.dims.styles;
  std::vector<Segment> segments;
  for (const auto& w : batch) {
    if (!w.label) throw ValueError("labeled_objective: window without a label");
    segments.push_back({w.V, one_hot_schedule(styles, *w.label, w.V.cols())});
  }
  MinibatchResult res = nvil_minibatch(p, q, baselines, stats, segments, rng, options);
  ObjectiveResult out;
  out.grads.model = std::move(res.grads);
  out.grads.classifier = c.zeros_like();
  double logq = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Vector x = window_vector(batch[i]);
    logq += classifier_log_prob(c, x, *batch[i].label);
    classifier_accumulate_gradient(c, x, *batch[i].label, alpha, out.grads.classifier);
    out.elbo += res.sequence_elbo[i];
  }
  out.objective = out.elbo + alpha * logq;
  return out;
}

ObjectiveResult unlabeled_objective(const GenerativeParams& p, const RecognitionParams& q,
                                    const ClassifierParams& c,
                                    const std::vector<BaselineParams>& baselines,
                                    std::vector<SignalStats>& stats, SignalStats& style_stats,
                                    const std::vector<Window>& batch, Rng& rng,
                                    const NvilOptions& options) {
  if (batch.empty()) throw ValueError("unlabeled_objective: empty batch");
  const Index styles = p.spec.dims.styles;
  const int n = p.spec.dims.order;
  Rng peek = rng;
  Rng style_rng = rng.fork(peek.next_u64() ^ 0x9E3779B97F4A7C15ull);

  const std::size_t count = batch.size();
  std::vector<Vector> probs(count);
  std::vector<Vector> inputs(count);
  std::vector<Segment> segments;
  ObjectiveResult out;
  for (std::size_t i = 0; i < count; ++i) {
    inputs[i] = window_vector(batch[i]);
    probs[i] = classify(c, inputs[i]);
    const int s = style_rng.categorical(std::span<const double>(probs[i].data(), probs[i].size()));
    out.sampled_styles.push_back(s);
    segments.push_back({batch[i].V, one_hot_schedule(styles, s, batch[i].V.cols())});
  }
  MinibatchResult res = nvil_minibatch(p, q, baselines, stats, segments, rng, options);

  std::vector<double> signal(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double logq = std::log(probs[i][out.sampled_styles[i]]);
    const double r = res.sequence_elbo[i] - logq;
    out.objective += r;
    out.elbo += res.sequence_elbo[i];
    double b = 0.0;
    if (uses_baseline(options) && !baselines.empty()) {
      const Matrix& V = batch[i].V;
      for (Index t = 0; t < V.cols(); ++t)
        b += baseline_eval(baselines[0], baseline_input(V.col(t), lag_window(V, t, n), probs[i]),
                           options.baseline);
    }
    signal[i] = r - b;
  }
  double mean = 0.0;
  for (double s : signal) mean += s;
  mean /= static_cast<double>(count);
  double var = 0.0;
  for (double s : signal) var += (s - mean) * (s - mean);
  var /= static_cast<double>(count);
  if (options.update_stats) style_stats.update(mean, var);

  out.grads.model = std::move(res.grads);
  out.grads.classifier = c.zeros_like();
  for (std::size_t i = 0; i < count; ++i) {
    double s = signal[i];
    if (options.center_running_mean) s -= style_stats.mean;
    if (options.variance_normalization) s /= style_stats.divisor();
    classifier_accumulate_gradient(c, inputs[i], out.sampled_styles[i], s, out.grads.classifier);
  }
  return out;
}

double classification_accuracy(const ClassifierParams& c, const std::vector<Window>& windows) {
  if (windows.empty()) throw ValueError("classification_accuracy: no windows");
  Index correct = 0;
  Index total = 0;
  for (const auto& w : windows) {
    if (!w.label) continue;
    Index best = 0;
    classify(c, window_vector(w)).maxCoeff(&best);
    correct += best == *w.label;
    ++total;
  }
  if (total == 0) throw ValueError("classification_accuracy: no labeled windows");
  return static_cast<double>(correct) / static_cast<double>(total);
}

SemiResult semi_train(const SemiConfig& config, Checkpoint init, const std::vector<Window>& labeled,
                      const std::vector<Window>& unlabeled, const std::vector<Window>* test, Rng& rng) {
  if (labeled.empty()) throw ValueError("semi_train: labeled set is empty");
  const ModelSpec spec = init.model.spec;
  const Index window = config.resolved_window(spec);
  const double alpha = config.resolved_alpha(spec);
  for (const auto* pool : {&labeled, &unlabeled})
    for (const auto& w : *pool) check_size(w.V.cols(), window, "semi_train: window frames w");
  const bool with_baselines = uses_baseline(config.nvil);
  if (with_baselines && static_cast<int>(init.baselines.size()) != spec.dims.layers())
    throw ValueError("semi_train: baselines enabled but the initial state has none");
  if (!init.classifier) init.classifier = make_classifier(spec.dims.styles, spec.dims.visible, window);
  if (init.stats.empty()) init.stats.assign(spec.dims.layers(), SignalStats{});

  SemiResult result;
  result.checkpoint = std::move(init);
  Checkpoint& state = result.checkpoint;
  const double p_labeled =
      config.labeled_probability.value_or(static_cast<double>(labeled.size()) /
                                          static_cast<double>(labeled.size() + unlabeled.size()));
  RmsProp opt(config.rmsprop);
  Rng coin = rng.fork(0xC014);
  PoolCursor lab_cursor(labeled.size(), rng.fork(0x1AB));
  PoolCursor unl_cursor(unlabeled.size(), rng.fork(0x2AB));
  Rng step_rng = rng.fork(0x57E9);
  SignalStats style_stats;
  const Index steps = (static_cast<Index>(labeled.size() + unlabeled.size()) + config.batch_size - 1) /
                      config.batch_size;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    SemiEpochMetrics m;
    m.epoch = epoch;
    double elbo = 0.0;
    Index frames = 0;
    for (Index s = 0; s < steps; ++s) {
      const bool use_labeled = unlabeled.empty() || coin.uniform() < p_labeled;
      ObjectiveResult r;
      std::vector<Window> batch;
      if (use_labeled) {
        batch = take(labeled, lab_cursor, config.batch_size);
        r = labeled_objective(state.model, state.recognition, *state.classifier, state.baselines,
                              state.stats, batch, alpha, step_rng, config.nvil);
        ++m.labeled_batches;
      } else {
        batch = take(unlabeled, unl_cursor, config.batch_size);
        r = unlabeled_objective(state.model, state.recognition, *state.classifier, state.baselines,
                                state.stats, style_stats, batch, step_rng, config.nvil);
        ++m.unlabeled_batches;
      }
      opt.step(trainable(state, with_baselines), gradient_refs(r.grads));
      elbo += r.elbo;
      frames += static_cast<Index>(batch.size()) * window;
    }
    m.elbo = elbo / static_cast<double>(frames);
    if (test && !test->empty()) m.accuracy = classification_accuracy(*state.classifier, *test);
    result.metrics.push_back(m);
  }
  return result;
}

ClassifierParams train_softmax_baseline(const SemiConfig& config, const ModelSpec& spec,
                                        const std::vector<Window>& labeled, Rng& rng) {
  if (labeled.empty()) throw ValueError("train_softmax_baseline: labeled set is empty");
  const Index window = config.resolved_window(spec);
  const double alpha = config.resolved_alpha(spec);
  ClassifierParams c = make_classifier(spec.dims.styles, spec.dims.visible, window);
  RmsProp opt(config.rmsprop);
  PoolCursor cursor(labeled.size(), rng.fork(0x1AB));
  const Index steps =
      (static_cast<Index>(labeled.size()) + config.batch_size - 1) / config.batch_size;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (Index s = 0; s < steps; ++s) {
      ClassifierParams g = c.zeros_like();
      for (const auto& w : take(labeled, cursor, config.batch_size)) {
        if (!w.label) throw ValueError("train_softmax_baseline: window without a label");
        classifier_accumulate_gradient(c, window_vector(w), *w.label, alpha, g);
      }
      rmsprop_step(opt, c, g);
    }
  }
  return c;
}

}  // namespace fctsbn
