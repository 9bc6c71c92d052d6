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

#include "diva/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "diva/errors.hpp"
#include "diva/reference.hpp"

namespace diva::kernels {

namespace {
// Below this many multiply-adds the OpenMP fork/join overhead dominates.
constexpr std::size_t kParallelFlops = 1u << 18;
}  // namespace

void mm_nn(const double* a, const double* b, double* c,
           std::size_t m, std::size_t k, std::size_t n) {
  const bool par = m * k * n >= kParallelFlops && m > 1;
#pragma omp parallel for schedule(static) if (par)
  for (long long ii = 0; ii < static_cast<long long>(m); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    double* crow = c + i * n;
    std::memset(crow, 0, n * sizeof(double));
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void mm_nt(const double* a, const double* b, double* c,
           std::size_t m, std::size_t k, std::size_t n) {
  const bool par = m * k * n >= kParallelFlops && m > 1;
#pragma omp parallel for schedule(static) if (par)
  for (long long ii = 0; ii < static_cast<long long>(m); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = b + j * k;
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] = acc;
    }
  }
}

void mm_tn(const double* a, const double* b, double* c,
           std::size_t m, std::size_t k, std::size_t n) {
  const bool par = m * k * n >= kParallelFlops && m > 1;
#pragma omp parallel for schedule(static) if (par)
  for (long long ii = 0; ii < static_cast<long long>(m); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    double* crow = c + i * n;
    std::memset(crow, 0, n * sizeof(double));
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[p * m + i];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

Tensor pairwise_distances(const Tensor& x) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  Tensor out({n, n});
  const double* px = x.data.data();
  double* po = out.data.data();
#pragma omp parallel for schedule(static) if (n * n * d >= kParallelFlops)
  for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    const double* xi = px + i * d;
    double* orow = po + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* xj = px + j * d;
      double s = 0.0;
      for (std::size_t kk = 0; kk < d; ++kk) {
        const double diff = xi[kk] - xj[kk];
        s += diff * diff;
      }
      orow[j] = std::sqrt(s);
    }
  }
  return out;
}

}  // namespace diva::kernels

namespace diva::ref {

void mm_nn(const double* a, const double* b, double* c,
           std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      c[i * n + j] = acc;
    }
  }
}

void mm_nt(const double* a, const double* b, double* c,
           std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[j * k + p];
      c[i * n + j] = acc;
    }
  }
}

void mm_tn(const double* a, const double* b, double* c,
           std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a[p * m + i] * b[p * n + j];
      c[i * n + j] = acc;
    }
  }
}

Tensor pairwise_distances(const Tensor& x) {
  const std::size_t n = x.rows();
  Tensor out({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out.at(i, j) = row_distance(x, i, x, j);
    }
  }
  return out;
}

std::map<int, double> recall_at_k(const Tensor& embeddings,
                                  const std::vector<std::uint32_t>& labels,
                                  const std::vector<int>& ks) {
  const std::size_t n = embeddings.rows();
  if (labels.size() != n) throw ConfigError("recall_at_k: label count mismatch");
  for (int k : ks) {
    if (k <= 0 || static_cast<std::size_t>(k) >= n) {
      throw ConfigError("recall_at_k: k must be in [1, sample_count)");
    }
  }
  std::map<int, double> hits;
  for (int k : ks) hits[k] = 0.0;
  for (std::size_t q = 0; q < n; ++q) {
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == q) continue;
      order.emplace_back(row_distance(embeddings, q, embeddings, j), j);
    }
    std::sort(order.begin(), order.end());
    for (int k : ks) {
      bool hit = false;
      for (int r = 0; r < k; ++r) {
        if (labels[order[static_cast<std::size_t>(r)].second] == labels[q]) {
          hit = true;
          break;
        }
      }
      if (hit) hits[k] += 1.0;
    }
  }
  for (auto& [k, v] : hits) v /= static_cast<double>(n);
  return hits;
}

}  // namespace diva::ref
