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

#ifndef DIVA_REFERENCE_HPP_
#define DIVA_REFERENCE_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "diva/tensor.hpp"

// Serial reference implementations. Deliberately naive: these are the
// ground truth the parallel kernels and the tuned metric paths are tested
// against, and the baseline the benchmark target compares against.
namespace diva::ref {

void mm_nn(const double* a, const double* b, double* c,
           std::size_t m, std::size_t k, std::size_t n);
void mm_nt(const double* a, const double* b, double* c,
           std::size_t m, std::size_t k, std::size_t n);
void mm_tn(const double* a, const double* b, double* c,
           std::size_t m, std::size_t k, std::size_t n);

Tensor pairwise_distances(const Tensor& x);

// Exhaustive recall@k: full sort of all candidate distances per query,
// ties broken by candidate index, query excluded from its own neighbors.
std::map<int, double> recall_at_k(const Tensor& embeddings,
                                  const std::vector<std::uint32_t>& labels,
                                  const std::vector<int>& ks);

}  // namespace diva::ref

#endif  // DIVA_REFERENCE_HPP_
