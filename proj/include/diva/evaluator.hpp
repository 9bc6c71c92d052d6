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

#ifndef DIVA_EVALUATOR_HPP_
#define DIVA_EVALUATOR_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "diva/dataset.hpp"
#include "diva/model.hpp"
#include "diva/tensor.hpp"

namespace diva {

// Fraction of queries whose k nearest neighbors (Euclidean, self excluded)
// contain at least one same-label point. Distance ties break toward the
// lower candidate index. Parallel over queries; per-query work runs in a
// fixed serial order, so the result matches diva::ref::recall_at_k exactly.
// Throws ConfigError when any k is outside [1, sample_count).
std::map<int, double> recall_at_k(const Tensor& embeddings,
                                  const std::vector<int>& labels,
                                  const std::vector<int>& ks);

// Lloyd iterations from ++-style seeding (first centroid uniform, the rest
// drawn proportionally to squared distance from the chosen set).
// Deterministic given seed. Assignment ties pick the lowest centroid index;
// a cluster left empty keeps its previous centroid. Stops early once an
// iteration leaves the assignment unchanged. `inertia_trace`, when given,
// receives the post-update inertia of every iteration actually run.
std::vector<int> kmeans(const Tensor& points, std::size_t k,
                        std::uint64_t seed, std::size_t iters = 50,
                        std::vector<double>* inertia_trace = nullptr);

// Sum of squared distances from each point to its assigned centroid, with
// centroids recomputed as assignment means.
double kmeans_inertia(const Tensor& points, const std::vector<int>& assign,
                      std::size_t k);

// Mutual information over the joint label histogram, normalized by the
// geometric mean of the two entropies; 0*log 0 = 0. Two constant partitions
// agree perfectly (1.0); exactly one constant partition carries no mutual
// information (0.0).
double nmi(const std::vector<int>& a, const std::vector<int>& b);

// Singular values of the mean-centered embedding matrix, sorted descending,
// truncated to min(D, N-1) entries, normalized to sum 1. Throws Error when
// all rows coincide (rank zero).
std::vector<double> normalized_spectrum(const Tensor& embeddings);

// KL divergence between normalized_spectrum(embeddings) and the uniform
// distribution over the same number of entries. 0 for an isotropic spectrum;
// grows as variance concentrates on fewer directions.
double spectral_decay(const Tensor& embeddings);

struct MetricSet {
  std::map<int, double> recall;  // k -> recall@k
  double spectral = 0.0;
};

struct EvalConfig {
  std::vector<int> ks = {1, 2, 4, 8};
  std::size_t kmeans_iters = 50;
  std::uint64_t seed = 0;
  std::map<Task, double> ensemble_weights;  // absent task -> weight 1
};

struct EvalReport {
  std::vector<std::pair<Task, MetricSet>> per_head;
  MetricSet ensemble;
  double nmi = 0.0;  // clustering the ensemble embedding, K = class count
  std::size_t n_samples = 0;
  std::size_t head_dim = 0;
  std::size_t ensemble_dim = 0;
};

// Embeds the test split once per head plus the weighted ensemble and scores
// retrieval, clustering, and spectrum metrics on each embedding space.
EvalReport evaluate(const Model& m, const Dataset& ds, const EvalConfig& cfg);

}  // namespace diva

#endif  // DIVA_EVALUATOR_HPP_
