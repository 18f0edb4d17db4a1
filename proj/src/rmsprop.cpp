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

#include "fctsbn/rmsprop.hpp"

#include <cmath>

namespace fctsbn {

bool RmsProp::step(const std::vector<TensorRef>& params, const std::vector<ConstTensorRef>& grads) {
  if (params.size() != grads.size()) throw ShapeError("rmsprop: parameter and gradient lists differ");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].data->rows() != grads[i].data->rows() ||
        params[i].data->cols() != grads[i].data->cols())
      throw ShapeError("rmsprop: gradient shape differs for " + params[i].name);
  }
  for (const auto& g : grads) {
    if (!g.data->allFinite()) {
      ++skipped_;
      return false;
    }
  }
  if (acc_.empty()) {
    for (const auto& p : params) acc_.push_back(Matrix::Zero(p.data->rows(), p.data->cols()));
  } else if (acc_.size() != params.size()) {
    throw ShapeError("rmsprop: parameter list changed between steps");
  }
  const double lr = config_.learning_rate;
  const double rho = config_.decay;
  const double eps = config_.epsilon;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto acc = acc_[i].array();
    const auto g = grads[i].data->array();
    acc = rho * acc + (1.0 - rho) * g.square();
    params[i].data->array() += lr * g / (acc + eps).sqrt();
  }
  ++steps_;
  return true;
}

}  // namespace fctsbn
