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

#ifndef FCTSBN_CHECKPOINT_HPP
#define FCTSBN_CHECKPOINT_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fctsbn/baseline.hpp"
#include "fctsbn/classifier.hpp"
#include "fctsbn/data_io.hpp"
#include "fctsbn/nvil.hpp"
#include "fctsbn/params.hpp"

namespace fctsbn {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  GenerativeParams model;
  RecognitionParams recognition;
  std::vector<BaselineParams> baselines;
  std::vector<SignalStats> stats;
  std::optional<ClassifierParams> classifier;
  std::optional<NormStats> norm;
};

// File layout: one line of compact JSON manifest terminated by '\n', then a
// blob of little-endian float64 values. Each tensor occupies
// [offset, offset + 8 * prod(shape)) of the blob in column-major order.
// Manifest keys: format_version, dims, obs_kind, factored, hidden_markov,
// tensors [{name, shape, dtype, offset}], blob_bytes.
std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes, const std::string& origin = "checkpoint");

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fctsbn

#endif  // FCTSBN_CHECKPOINT_HPP
