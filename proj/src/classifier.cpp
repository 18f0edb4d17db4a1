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

#include "fctsbn/classifier.hpp"

#include <cmath>
#include <string>

namespace fctsbn {

namespace {

template <class Ref, class C>
std::vector<Ref> collect(C& c) {
  return {{"classifier/W", &c.weight, {c.weight.rows(), c.weight.cols()}},
          {"classifier/b", &c.bias, {c.bias.rows()}}};
}

}  // namespace

ClassifierParams make_classifier(Index styles, Index visible, Index window) {
  if (styles < 1 || visible < 1 || window < 1)
    throw ShapeError("classifier: styles, visible and window must be positive");
  ClassifierParams c;
  c.weight = Matrix::Zero(styles, visible * window);
  c.bias = Matrix::Zero(styles, 1);
  c.window = window;
  return c;
}

ClassifierParams ClassifierParams::zeros_like() const {
  return make_classifier(styles(), visible(), window);
}

std::vector<TensorRef> ClassifierParams::tensors() { return collect<TensorRef>(*this); }
std::vector<ConstTensorRef> ClassifierParams::tensors() const {
  return collect<ConstTensorRef>(*this);
}

Vector classifier_window(const Matrix& V, Index start, Index window) {
  if (start < 0 || start + window > V.cols()) {
    throw ShapeError("classifier window [" + std::to_string(start) + ", " +
                     std::to_string(start + window) + ") outside " + std::to_string(V.cols()) +
                     " frames");
  }
  Vector x(V.rows() * window);
  for (Index k = 0; k < window; ++k) x.segment(k * V.rows(), V.rows()) = V.col(start + k);
  return x;
}

Vector classify(const ClassifierParams& c, const Vector& window) {
  check_size(window.size(), c.weight.cols(), "classify: window length w*M");
  const Vector a = c.weight * window + c.bias.col(0);
  Vector p = (a.array() - a.maxCoeff()).exp();
  return p / p.sum();
}

double classifier_log_prob(const ClassifierParams& c, const Vector& window, int style) {
  check_size(window.size(), c.weight.cols(), "classify: window length w*M");
  if (style < 0 || style >= c.styles()) throw ValueError("classifier: style index out of range");
  const Vector a = c.weight * window + c.bias.col(0);
  const double top = a.maxCoeff();
  return a[style] - top - std::log((a.array() - top).exp().sum());
}

void classifier_accumulate_gradient(const ClassifierParams& c, const Vector& window, int style,
                                    double scale, ClassifierParams& grad) {
  if (style < 0 || style >= c.styles()) throw ValueError("classifier: style index out of range");
  Vector xi = -classify(c, window);
  xi[style] += 1.0;
  xi *= scale;
  grad.weight.noalias() += xi * window.transpose();
  grad.bias.col(0) += xi;
}

}  // namespace fctsbn
