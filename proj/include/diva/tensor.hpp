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

#ifndef DIVA_TENSOR_HPP_
#define DIVA_TENSOR_HPP_

#include <cstddef>
#include <vector>

namespace diva {

// Dense row-major tensor of doubles. Rank 1 and 2 cover everything the
// engine needs; scalars are represented as shape {1}.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s);

  static Tensor zeros(std::vector<std::size_t> s) { return Tensor(std::move(s)); }
  static Tensor full(std::vector<std::size_t> s, double v);
  static Tensor scalar(double v);
  static Tensor from(std::vector<double> values, std::vector<std::size_t> s);

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  bool is_scalar() const { return size() == 1; }

  // Rank-2 accessors.
  std::size_t rows() const;
  std::size_t cols() const;
  double& at(std::size_t i, std::size_t j);
  double at(std::size_t i, std::size_t j) const;

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
  bool all_finite() const;

  void fill(double v);
};

// Euclidean norm of the flat data.
double l2_norm(const Tensor& t);

// Euclidean distance between two equal-length flat tensors.
double euclidean(const Tensor& a, const Tensor& b);

// Distance between row i of a and row j of b (both rank 2, equal cols).
double row_distance(const Tensor& a, std::size_t i, const Tensor& b, std::size_t j);

}  // namespace diva

#endif  // DIVA_TENSOR_HPP_
