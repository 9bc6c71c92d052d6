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

#ifndef DIVA_KERNELS_HPP_
#define DIVA_KERNELS_HPP_

#include <cstddef>

#include "diva/tensor.hpp"

// Data-parallel kernels. Loops are parallelized with OpenMP above a size
// threshold. Every output element is written by exactly one thread and inner
// reductions run in a fixed order, so results are bit-identical for any
// thread count. Serial mirrors live in diva::ref (reference.hpp) and back
// the kernel tests and the benchmark target.
namespace diva::kernels {

// C[m,n] = A[m,k] * B[k,n]
void mm_nn(const double* a, const double* b, double* c,
           std::size_t m, std::size_t k, std::size_t n);

// C[m,n] = A[m,k] * B^T, with B stored as [n,k]
void mm_nt(const double* a, const double* b, double* c,
           std::size_t m, std::size_t k, std::size_t n);

// C[m,n] = A^T * B, with A stored as [k,m], B as [k,n]
void mm_tn(const double* a, const double* b, double* c,
           std::size_t m, std::size_t k, std::size_t n);

// D[n,n] with D[i,j] = Euclidean distance between rows i and j of X[n,d].
Tensor pairwise_distances(const Tensor& x);

}  // namespace diva::kernels

#endif  // DIVA_KERNELS_HPP_
