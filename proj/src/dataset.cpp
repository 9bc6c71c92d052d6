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

#include "diva/dataset.hpp"

#include <string>

#include "diva/errors.hpp"

namespace diva {

std::size_t Dataset::feature_dim() const {
  return features.rank() == 2 ? features.cols() : 0;
}

void validate_dataset(const Dataset& ds) {
  if (ds.features.rank() != 2) {
    throw ConfigError("dataset: features must be a [N, F] matrix");
  }
  if (ds.features.rows() != ds.labels.size()) {
    throw ConfigError("dataset: " + std::to_string(ds.features.rows()) +
                      " feature rows but " + std::to_string(ds.labels.size()) +
                      " labels");
  }
  if (ds.features.cols() == 0) throw ConfigError("dataset: zero feature dim");
  if (ds.split.empty()) throw ConfigError("dataset: no classes declared");
  if (!ds.features.all_finite()) {
    throw ConfigError("dataset: non-finite feature value");
  }
  for (std::size_t c = 0; c < ds.split.size(); ++c) {
    if (ds.split[c] != kTrainSplit && ds.split[c] != kTestSplit) {
      throw ConfigError("dataset: class " + std::to_string(c) +
                        " has split flag " + std::to_string(ds.split[c]));
    }
  }
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    if (ds.labels[i] < 0 ||
        static_cast<std::size_t>(ds.labels[i]) >= ds.split.size()) {
      throw ConfigError("dataset: sample " + std::to_string(i) +
                        " has out-of-range label " +
                        std::to_string(ds.labels[i]));
    }
  }
}

std::vector<std::size_t> split_indices(const Dataset& ds, std::uint8_t flag) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    if (ds.split[static_cast<std::size_t>(ds.labels[i])] == flag) {
      out.push_back(i);
    }
  }
  return out;
}

std::map<int, std::vector<std::size_t>> indices_by_class(const Dataset& ds,
                                                         std::uint8_t flag) {
  std::map<int, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    if (ds.split[static_cast<std::size_t>(ds.labels[i])] == flag) {
      out[ds.labels[i]].push_back(i);
    }
  }
  return out;
}

Tensor gather_rows(const Tensor& m, const std::vector<std::size_t>& idx) {
  const std::size_t cols = m.cols();
  Tensor out({idx.size(), cols});
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= m.rows()) throw Error("gather_rows: index out of range");
    for (std::size_t j = 0; j < cols; ++j) out.at(r, j) = m.at(idx[r], j);
  }
  return out;
}

std::vector<int> gather_labels(const std::vector<int>& labels,
                               const std::vector<std::size_t>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) {
    if (i >= labels.size()) throw Error("gather_labels: index out of range");
    out.push_back(labels[i]);
  }
  return out;
}

}  // namespace diva
