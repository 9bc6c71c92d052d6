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

#ifndef DIVA_QUEUE_HPP_
#define DIVA_QUEUE_HPP_

#include <cstddef>

#include "diva/rng.hpp"
#include "diva/tensor.hpp"

namespace diva {

// Fixed-capacity FIFO ring of unit vectors backing the noise-contrastive
// negative pool. Initialized full with random directions so the contrastive
// losses are well-defined from the first step; real embeddings displace the
// random ones oldest-first as training pushes batches through.
class MemoryQueue {
 public:
  // Starts at fill == capacity with rows drawn uniformly on the sphere.
  MemoryQueue(std::size_t capacity, std::size_t dim, Rng& rng);
  // Empty shell for deserialization.
  MemoryQueue(std::size_t capacity, std::size_t dim);

  std::size_t capacity() const { return capacity_; }
  std::size_t dim() const { return dim_; }
  std::size_t fill() const { return fill_; }
  std::size_t cursor() const { return cursor_; }

  // Overwrites the oldest slot. `v` must be rank-1 of length dim() with
  // ||v|| within 1e-4 of 1.
  void push(const Tensor& v);
  // Push every row of a [B, dim] matrix in row order.
  void push_rows(const Tensor& m);

  // Copy of the buffer contents, oldest slot first is NOT guaranteed; rows
  // are in storage order. Taken before the current batch is pushed so a step
  // never contrasts an embedding against itself.
  Tensor snapshot() const;

  const Tensor& storage() const { return buf_; }
  // Restores exact state from persisted storage.
  void restore(Tensor buf, std::size_t cursor, std::size_t fill);

 private:
  std::size_t capacity_;
  std::size_t dim_;
  Tensor buf_;  // [capacity, dim]
  std::size_t cursor_ = 0;
  std::size_t fill_ = 0;
};

}  // namespace diva

#endif  // DIVA_QUEUE_HPP_
