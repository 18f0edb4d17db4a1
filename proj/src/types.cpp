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

#include "fctsbn/types.hpp"

namespace fctsbn {

std::string_view to_string(ObsKind kind) {
  switch (kind) {
    case ObsKind::Real:
      return "real";
    case ObsKind::Binary:
      return "binary";
    case ObsKind::Count:
      return "count";
  }
  return "unknown";
}

ObsKind obs_kind_from_string(std::string_view name) {
  if (name == "real") return ObsKind::Real;
  if (name == "binary") return ObsKind::Binary;
  if (name == "count") return ObsKind::Count;
  throw ValueError("unknown observation kind '" + std::string(name) +
                   "' (expected real, binary or count)");
}

void Dims::validate(bool factored) const {
  if (visible < 1) throw ShapeError("dims: visible dimension M must be >= 1");
  if (styles < 1) throw ShapeError("dims: side-information dimension S must be >= 1");
  if (order < 1) throw ShapeError("dims: order n must be >= 1");
  if (layer_sizes.empty()) throw ShapeError("dims: at least one hidden layer required");
  for (int j : layer_sizes) {
    if (j < 1) throw ShapeError("dims: every layer size must be >= 1");
  }
  if (factored && factors < 1) throw ShapeError("dims: factor count F must be >= 1 for factored weights");
}

bool operator==(const Dims& a, const Dims& b) {
  return a.visible == b.visible && a.styles == b.styles && a.factors == b.factors &&
         a.order == b.order && a.layer_sizes == b.layer_sizes;
}

void check_size(Index actual, Index expected, std::string_view what) {
  if (actual != expected) {
    throw ShapeError(std::string(what) + ": got " + std::to_string(actual) + ", expected " +
                     std::to_string(expected));
  }
}

}  // namespace fctsbn
