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

#include "fctsbn/params.hpp"

namespace fctsbn {

namespace {

constexpr double kDenseInitStd = 0.001;
constexpr double kFactorInitStd = 0.01;

CondWeight make_map(const ModelSpec& spec, Index out, Index in, bool allow_factoring = true) {
  if (spec.factored && allow_factoring)
    return CondWeight::factored(out, in, spec.dims.styles, spec.dims.factors);
  return CondWeight::dense(out, in, spec.dims.styles);
}

Index lower_dim(const ModelSpec& spec, int k) {
  return k == 0 ? spec.dims.visible : spec.dims.layer_sizes[k - 1];
}

template <class Ref, class Gen>
void collect_generative(Gen& p, std::vector<Ref>& out) {
  for (int k = 0; k < static_cast<int>(p.layers.size()); ++k) {
    auto& layer = p.layers[k];
    const std::string pre = layer_prefix(k) + "/";
    const bool bottom = k == 0;
    layer.self_lag.append_tensors(pre + (bottom ? "W1" : "W7"), out);
    if (layer.lower_lag) layer.lower_lag->append_tensors(pre + (bottom ? "W3" : "W6"), out);
    if (layer.top_down) layer.top_down->append_tensors(pre + "W5", out);
    out.push_back({pre + (bottom ? "B" : "A"), &layer.bias, {layer.bias.rows(), layer.bias.cols()}});
  }
  auto& e = p.emission;
  e.w2.append_tensors("emission/W2", out);
  if (e.w4) e.w4->append_tensors("emission/W4", out);
  out.push_back({"emission/C", &e.c, {e.c.rows(), e.c.cols()}});
  if (e.w2_var) e.w2_var->append_tensors("emission/W2p", out);
  if (e.w4_var) e.w4_var->append_tensors("emission/W4p", out);
  if (e.c_var) out.push_back({"emission/Cp", &*e.c_var, {e.c_var->rows(), e.c_var->cols()}});
}

template <class Ref, class Rec>
void collect_recognition(Rec& p, std::vector<Ref>& out) {
  for (int k = 0; k < static_cast<int>(p.layers.size()); ++k) {
    auto& layer = p.layers[k];
    const std::string pre = "recognition/" + layer_prefix(k) + "/";
    const bool bottom = k == 0;
    layer.self_lag.append_tensors(pre + (bottom ? "U1" : "U4"), out);
    layer.lower_now.append_tensors(pre + (bottom ? "U2" : "U5"), out);
    layer.lower_lag.append_tensors(pre + (bottom ? "U3" : "U6"), out);
    out.push_back({pre + (bottom ? "D" : "E"), &layer.bias, {layer.bias.rows(), layer.bias.cols()}});
  }
}

void fill(Matrix& m, Rng& rng, double stddev) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) m(i, j) = rng.normal(0.0, stddev);
}

void init_map(CondWeight& w, Rng& rng) {
  w.fill_gaussian(rng, w.is_factored() ? kFactorInitStd : kDenseInitStd);
}

}  // namespace

bool operator==(const ModelSpec& a, const ModelSpec& b) {
  return a.dims == b.dims && a.obs == b.obs && a.factored == b.factored &&
         a.hidden_markov == b.hidden_markov;
}

std::string layer_prefix(int layer_index) { return "layer" + std::to_string(layer_index + 1); }

GenerativeParams make_generative(const ModelSpec& spec) {
  spec.validate();
  const Dims& d = spec.dims;
  const Index n = d.order;
  GenerativeParams p;
  p.spec = spec;
  for (int k = 0; k < d.layers(); ++k) {
    const Index j = d.layer_sizes[k];
    HiddenLayerParams layer;
    layer.self_lag = make_map(spec, j, j * n);
    if (!(k == 0 && spec.hidden_markov)) layer.lower_lag = make_map(spec, j, lower_dim(spec, k) * n);
    if (k + 1 < d.layers()) layer.top_down = make_map(spec, j, d.layer_sizes[k + 1]);
    layer.bias = Matrix::Zero(j, d.styles);
    p.layers.push_back(std::move(layer));
  }
  const Index m = d.visible;
  auto& e = p.emission;
  e.w2 = CondWeight::dense(m, d.hidden(), d.styles);
  if (!spec.hidden_markov) e.w4 = make_map(spec, m, m * n);
  e.c = Matrix::Zero(m, d.styles);
  if (spec.obs == ObsKind::Real) {
    e.w2_var = CondWeight::dense(m, d.hidden(), d.styles);
    if (!spec.hidden_markov) e.w4_var = make_map(spec, m, m * n);
    e.c_var = Matrix::Zero(m, d.styles);
  }
  return p;
}

RecognitionParams make_recognition(const ModelSpec& spec) {
  spec.validate();
  const Dims& d = spec.dims;
  const Index n = d.order;
  RecognitionParams p;
  p.spec = spec;
  for (int k = 0; k < d.layers(); ++k) {
    const Index j = d.layer_sizes[k];
    const Index below = lower_dim(spec, k);
    RecognitionLayerParams layer;
    layer.self_lag = make_map(spec, j, j * n);
    layer.lower_now = make_map(spec, j, below);
    layer.lower_lag = make_map(spec, j, below * n);
    layer.bias = Matrix::Zero(j, d.styles);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

GenerativeParams GenerativeParams::zeros_like() const { return make_generative(spec); }
RecognitionParams RecognitionParams::zeros_like() const { return make_recognition(spec); }

std::vector<TensorRef> GenerativeParams::tensors() {
  std::vector<TensorRef> out;
  collect_generative(*this, out);
  return out;
}

std::vector<ConstTensorRef> GenerativeParams::tensors() const {
  std::vector<ConstTensorRef> out;
  collect_generative(*this, out);
  return out;
}

std::vector<TensorRef> RecognitionParams::tensors() {
  std::vector<TensorRef> out;
  collect_recognition(*this, out);
  return out;
}

std::vector<ConstTensorRef> RecognitionParams::tensors() const {
  std::vector<ConstTensorRef> out;
  collect_recognition(*this, out);
  return out;
}

Index GenerativeParams::parameter_count() const {
  Index total = 0;
  for (const auto& t : tensors()) total += t.data->size();
  return total;
}

Index RecognitionParams::parameter_count() const {
  Index total = 0;
  for (const auto& t : tensors()) total += t.data->size();
  return total;
}

void initialize(GenerativeParams& p, Rng& rng) {
  for (auto& layer : p.layers) {
    init_map(layer.self_lag, rng);
    if (layer.lower_lag) init_map(*layer.lower_lag, rng);
    if (layer.top_down) init_map(*layer.top_down, rng);
    layer.bias.setZero();
  }
  auto& e = p.emission;
  init_map(e.w2, rng);
  if (e.w4) init_map(*e.w4, rng);
  e.c.setZero();
  if (e.w2_var) init_map(*e.w2_var, rng);
  if (e.w4_var) init_map(*e.w4_var, rng);
  if (e.c_var) e.c_var->setZero();
}

void initialize(RecognitionParams& p, Rng& rng) {
  for (auto& layer : p.layers) {
    init_map(layer.self_lag, rng);
    init_map(layer.lower_now, rng);
    init_map(layer.lower_lag, rng);
    layer.bias.setZero();
  }
}

void randomize(GenerativeParams& p, Rng& rng, double scale) {
  for (auto& t : p.tensors()) fill(*t.data, rng, scale);
}

void randomize(RecognitionParams& p, Rng& rng, double scale) {
  for (auto& t : p.tensors()) fill(*t.data, rng, scale);
}

}  // namespace fctsbn
