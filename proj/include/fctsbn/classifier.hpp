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

#ifndef FCTSBN_CLASSIFIER_HPP
#define FCTSBN_CLASSIFIER_HPP

#include <vector>

#include "fctsbn/cond_weight.hpp"
#include "fctsbn/types.hpp"

namespace fctsbn {

// Softmax over styles of a linear map of w consecutive frames.
struct ClassifierParams {
  Matrix weight;  // S x (w * M)
  Matrix bias;    // S x 1
  Index window = 2;

  Index styles() const { return weight.rows(); }
  Index visible() const { return window == 0 ? 0 : weight.cols() / window; }
  ClassifierParams zeros_like() const;
  std::vector<TensorRef> tensors();
  std::vector<ConstTensorRef> tensors() const;
};

ClassifierParams make_classifier(Index styles, Index visible, Index window);

// Frames [start, start + window) of V stacked oldest first.
Vector classifier_window(const Matrix& V, Index start, Index window);

Vector classify(const ClassifierParams& c, const Vector& window);

double classifier_log_prob(const ClassifierParams& c, const Vector& window, int style);

// grad += scale * d/dpsi log q(style | window).
void classifier_accumulate_gradient(const ClassifierParams& c, const Vector& window, int style,
                                    double scale, ClassifierParams& grad);

}  // namespace fctsbn

#endif  // FCTSBN_CLASSIFIER_HPP
