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

#ifndef FCTSBN_DATASET_HPP
#define FCTSBN_DATASET_HPP

#include <optional>
#include <string>
#include <vector>

#include "fctsbn/types.hpp"

namespace fctsbn {

// A labeled window of a sequence; its length is set by the consumer.
struct LabelWindow {
  Index start = 0;
  int style = 0;
};

struct SequenceRecord {
  std::string id;
  Matrix V;                  // M x T
  std::optional<Matrix> Y;   // S x T
  std::vector<LabelWindow> labels;

  Index frames() const { return V.cols(); }
};

struct SequenceDataset {
  ObsKind obs = ObsKind::Real;
  std::vector<SequenceRecord> records;

  bool empty() const { return records.empty(); }
  std::size_t size() const { return records.size(); }
  // 0 when empty.
  Index visible() const { return records.empty() ? 0 : records.front().V.rows(); }
  Index styles() const;  // 0 when no record has side information
  Index total_frames() const;
};

}  // namespace fctsbn

#endif  // FCTSBN_DATASET_HPP
