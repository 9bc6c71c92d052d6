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

#include "diva/tensor.hpp"

#include <cmath>

#include "diva/errors.hpp"

namespace diva {

namespace {
std::size_t count(const std::vector<std::size_t>& s) {
  std::size_t n = 1;
  for (std::size_t d : s) n *= d;
  return s.empty() ? 0 : n;
}
}  // namespace

Tensor::Tensor(std::vector<std::size_t> s) : shape(std::move(s)), data(count(shape), 0.0) {}

Tensor Tensor::full(std::vector<std::size_t> s, double v) {
  Tensor t(std::move(s));
  t.fill(v);
  return t;
}

Tensor Tensor::scalar(double v) {
  Tensor t({1});
  t.data[0] = v;
  return t;
}

Tensor Tensor::from(std::vector<double> values, std::vector<std::size_t> s) {
  Tensor t;
  t.shape = std::move(s);
  if (count(t.shape) != values.size()) {
    throw ConfigError("Tensor::from: shape does not match value count");
  }
  t.data = std::move(values);
  return t;
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw ConfigError("Tensor::rows requires rank 2");
  return shape[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw ConfigError("Tensor::cols requires rank 2");
  return shape[1];
}

double& Tensor::at(std::size_t i, std::size_t j) {
  return data[i * cols() + j];
}

double Tensor::at(std::size_t i, std::size_t j) const {
  return data[i * cols() + j];
}

bool Tensor::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::fill(double v) {
  for (double& x : data) x = v;
}

double l2_norm(const Tensor& t) {
  double s = 0.0;
  for (double v : t.data) s += v * v;
  return std::sqrt(s);
}

double euclidean(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) throw ConfigError("euclidean: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a.data[i] - b.data[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double row_distance(const Tensor& a, std::size_t i, const Tensor& b, std::size_t j) {
  std::size_t d = a.cols();
  if (d != b.cols()) throw ConfigError("row_distance: column mismatch");
  const double* pa = a.data.data() + i * d;
  const double* pb = b.data.data() + j * d;
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    double diff = pa[k] - pb[k];
    s += diff * diff;
  }
  return std::sqrt(s);
}

}  // namespace diva
