/* Copyright 2026 The diva engine authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef DIVA_DATASET_HPP_
#define DIVA_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "diva/tensor.hpp"

namespace diva {

inline constexpr std::uint8_t kTrainSplit = 0;
inline constexpr std::uint8_t kTestSplit = 1;

// Feature table with a per-class split assignment. A class lives entirely in
// one split: retrieval is evaluated zero-shot on classes never seen during
// training, so the train/test boundary runs between classes, not samples.
struct Dataset {
  Tensor features;                  // [N, F]
  std::vector<int> labels;          // length N, values in [0, n_classes)
  std::vector<std::uint8_t> split;  // per class: kTrainSplit / kTestSplit

  std::size_t n_samples() const { return labels.size(); }
  std::size_t feature_dim() const;
  std::size_t n_classes() const { return split.size(); }
};

// Shape agreement, labels in range, split flags 0/1, finite features.
// Throws ConfigError on the first violation.
void validate_dataset(const Dataset& ds);

// Sample indices whose class carries `flag`, ascending.
std::vector<std::size_t> split_indices(const Dataset& ds, std::uint8_t flag);

// Class label -> sample indices, restricted to one split.
std::map<int, std::vector<std::size_t>> indices_by_class(const Dataset& ds,
                                                         std::uint8_t flag);

// Rows of `m` selected by `idx`, in the order given.
Tensor gather_rows(const Tensor& m, const std::vector<std::size_t>& idx);

std::vector<int> gather_labels(const std::vector<int>& labels,
                               const std::vector<std::size_t>& idx);

}  // namespace diva

#endif  // DIVA_DATASET_HPP_
