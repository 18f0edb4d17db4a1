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

#ifndef FCTSBN_DATA_IO_HPP
#define FCTSBN_DATA_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "fctsbn/dataset.hpp"
#include "fctsbn/params.hpp"
#include "fctsbn/rng.hpp"

namespace fctsbn {

struct CsvOptions {
  bool header = false;  // skip (on read) or write a header row
};

// Rows are frames, columns are dimensions. Returns a frames x columns matrix.
Matrix read_csv(const std::filesystem::path& path, const CsvOptions& options = {});
void write_csv(const std::filesystem::path& path, const Matrix& rows,
               const CsvOptions& options = {}, const std::vector<std::string>& header = {});

/**
 * Loads `<id>.csv` (observations), optional `<id>.y.csv` (side information)
 * and optional `labels.csv` (sequence_id,start_frame,style_index with a
 * header row) from a directory. Records are ordered by id.
 */
SequenceDataset load_dataset(const std::filesystem::path& dir, ObsKind obs,
                             const CsvOptions& options = {});
void save_dataset(const SequenceDataset& data, const std::filesystem::path& dir,
                  const CsvOptions& options = {});

// Checks ObsKind value constraints, shapes and finiteness.
void validate_dataset(const SequenceDataset& data);

struct NormStats {
  Vector mean;
  Vector stddev;          // 1 for constant dimensions
  std::vector<bool> constant;
};

NormStats compute_norm_stats(const SequenceDataset& data);
void apply_normalization(SequenceDataset& data, const NormStats& stats);
void apply_denormalization(SequenceDataset& data, const NormStats& stats);
Matrix denormalize(const Matrix& V, const NormStats& stats);
// Statistics from `data` itself; Real observations only.
std::pair<SequenceDataset, NormStats> normalize(const SequenceDataset& data);

struct PlantConfig {
  ModelSpec spec;
  double style_separation = 6.0;  // distance between extreme style biases
  int sequences = 200;
  Index frames = 50;
  double hidden_scale = 2.0;      // scale of hidden dynamics
  double loading_scale = 1.0;     // scale of hidden -> visible loadings
  double visible_to_hidden_scale = 0.3;
  double ar_scale = 0.0;          // visible autoregression
  double noise_std = 0.5;
  int burn_in = 10;
  Index label_window = 0;         // 0: order + 1
  int count_total = 10;           // per-frame total for count observations
};

struct PlantedModel {
  GenerativeParams truth;
  SequenceDataset data;
};

/**
 * Draws a ground-truth model whose styles differ only in the emission bias
 * C (columns evenly spread over [-sep/2, sep/2]) and samples sequences from
 * it. Sequence i uses style i mod S, is labeled over consecutive windows and
 * follows a burn-in period that is discarded.
 */
PlantedModel plant_model(const PlantConfig& config, Rng& rng);

// As plant_model, sampling new sequences from existing truth parameters.
SequenceDataset sample_dataset(const GenerativeParams& truth, const PlantConfig& config, Rng& rng);

}  // namespace fctsbn

#endif  // FCTSBN_DATA_IO_HPP
