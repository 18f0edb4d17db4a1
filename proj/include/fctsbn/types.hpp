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

#ifndef FCTSBN_TYPES_HPP
#define FCTSBN_TYPES_HPP

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fctsbn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ValueError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when training diverges; carries a diagnostic dump in what().
class NumericAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ObsKind { Real, Binary, Count };

std::string_view to_string(ObsKind kind);
ObsKind obs_kind_from_string(std::string_view name);

// Model dimensions. layer_sizes[0] is the hidden layer that touches the
// visibles; higher entries are stacked stochastic layers.
struct Dims {
  int visible = 0;              // M
  int styles = 1;               // S
  int factors = 0;              // F
  int order = 1;                // n
  std::vector<int> layer_sizes; // J per layer

  int hidden() const { return layer_sizes.at(0); }
  int layers() const { return static_cast<int>(layer_sizes.size()); }

  void validate(bool factored) const;
};

bool operator==(const Dims& a, const Dims& b);

// Throws ShapeError with `what` naming the axis when sizes differ.
void check_size(Index actual, Index expected, std::string_view what);

}  // namespace fctsbn

#endif  // FCTSBN_TYPES_HPP
