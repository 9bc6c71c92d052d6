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

#include "diva/queue.hpp"

#include <cmath>
#include <cstring>

#include "diva/errors.hpp"

namespace diva {

MemoryQueue::MemoryQueue(std::size_t capacity, std::size_t dim)
    : capacity_(capacity), dim_(dim), buf_(Tensor::zeros({capacity, dim})) {
  if (capacity == 0 || dim == 0) throw ConfigError("queue capacity and dim must be positive");
}

MemoryQueue::MemoryQueue(std::size_t capacity, std::size_t dim, Rng& rng)
    : MemoryQueue(capacity, dim) {
  for (std::size_t i = 0; i < capacity_; ++i) {
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (std::size_t j = 0; j < dim_; ++j) {
        const double g = rng.normal();
        buf_.data[i * dim_ + j] = g;
        norm2 += g * g;
      }
    } while (norm2 < 1e-24);  // astronomically unlikely, but keeps rows unit
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t j = 0; j < dim_; ++j) buf_.data[i * dim_ + j] *= inv;
  }
  fill_ = capacity_;
}

void MemoryQueue::push(const Tensor& v) {
  if (v.rank() != 1 || v.size() != dim_) {
    throw Error("queue push: expected a vector of length " + std::to_string(dim_));
  }
  double norm2 = 0.0;
  for (std::size_t j = 0; j < dim_; ++j) norm2 += v.data[j] * v.data[j];
  if (std::abs(std::sqrt(norm2) - 1.0) > 1e-4) {
    throw Error("queue push: vector is not unit-norm");
  }
  std::memcpy(buf_.data.data() + cursor_ * dim_, v.data.data(), dim_ * sizeof(double));
  cursor_ = (cursor_ + 1) % capacity_;
  if (fill_ < capacity_) ++fill_;
}

void MemoryQueue::push_rows(const Tensor& m) {
  if (m.rank() != 2 || m.cols() != dim_) {
    throw Error("queue push_rows: expected [B," + std::to_string(dim_) + "]");
  }
  Tensor row = Tensor::zeros({dim_});
  for (std::size_t i = 0; i < m.rows(); ++i) {
    std::memcpy(row.data.data(), m.data.data() + i * dim_, dim_ * sizeof(double));
    push(row);
  }
}

Tensor MemoryQueue::snapshot() const { return buf_; }

void MemoryQueue::restore(Tensor buf, std::size_t cursor, std::size_t fill) {
  if (buf.rank() != 2 || buf.rows() != capacity_ || buf.cols() != dim_) {
    throw CompatError("queue restore: buffer shape mismatch");
  }
  if (cursor >= capacity_ || fill > capacity_) {
    throw CompatError("queue restore: cursor/fill out of range");
  }
  buf_ = std::move(buf);
  cursor_ = cursor;
  fill_ = fill;
}

}  // namespace diva
