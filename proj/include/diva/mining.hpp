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

#ifndef DIVA_MINING_HPP_
#define DIVA_MINING_HPP_

#include <cstddef>
#include <utility>
#include <vector>

#include "diva/rng.hpp"
#include "diva/task.hpp"
#include "diva/tensor.hpp"

namespace diva {

// Class-balanced batch layout: m_per_class samples from each of n_classes
// distinct classes.
struct BatchSpec {
  std::size_t n_classes = 8;
  std::size_t m_per_class = 4;
};

// Rejects batch shapes too small for the active ranking tasks: the
// intra-class task needs m >= 3, the class-shared task n >= 3, the
// discriminative task n >= 2.
void validate_batch_spec(const BatchSpec& spec, const std::vector<Task>& active);

// Draws the batch as indices into a dataset, given per-class index lists.
// Classes with fewer than m_per_class samples are ineligible.
std::vector<std::size_t> build_batch(const std::vector<std::vector<std::size_t>>& by_class,
                                     const BatchSpec& spec, Rng& rng);

// (anchor, positive, negative) indices into the current batch.
struct Triplet {
  std::size_t a = 0;
  std::size_t p = 0;
  std::size_t n = 0;
  Task kind = Task::Disc;
};

// Unnormalized density of the pairwise distance d between uniform points on
// the unit sphere in R^dim: q(d) = d^{dim-2} * (1 - d^2/4)^{(dim-3)/2}.
// Domain d in [0,2], dim >= 2.
double q_density(double d, std::size_t dim);

// Inverse-density sampling weight w(d) = min(lambda, 1/q(clamp(d))), with d
// clamped to [0.5, 2 - 1e-4] before the reciprocal so w stays in (0, lambda].
double sampling_weight(double d, std::size_t dim, double lambda);

// (w, dw/dd). The derivative is zero on the clamped and capped branches and
// -w * ((dim-2)/d - (dim-3) d / (4 - d^2)) on the active branch; used when a
// loss differentiates through the weight map.
std::pair<double, double> sampling_weight_grad(double d, std::size_t dim, double lambda);

// Index of one candidate row, drawn with probability proportional to
// sampling_weight(||anchor - candidate_i||). `masked[i]` excludes row i.
std::size_t sample_negative(const Tensor& anchor_emb, const Tensor& candidate_embs,
                            const std::vector<char>& masked, std::size_t dim,
                            double lambda, Rng& rng);

// One triplet per anchor whose constraints are satisfiable, over a batch of
// unit embeddings [B, D] with per-row labels. Selection per kind:
//   disc   — positive uniform in the anchor's class, negative
//            distance-weighted over every other class;
//   shared — positive distance-weighted over other classes, negative
//            distance-weighted over classes distinct from both;
//   intra  — positive uniform within the class, negative distance-weighted
//            within the class, all three members distinct.
// Anchors with no admissible (p, n) are skipped; an impossible kind yields
// an empty list.
std::vector<Triplet> mine_triplets(Task kind, const Tensor& embeddings,
                                   const std::vector<int>& labels, double lambda,
                                   Rng& rng);

// Throws unless every triplet's labels satisfy its kind's constraints and
// its indices are pairwise distinct.
void check_triplets(const std::vector<Triplet>& triplets, const std::vector<int>& labels);

// Normalized histogram (masses summing to 1, n_bins equal bins on [0,2]) of
// distances between consecutive uniform samples on the unit sphere in
// R^dim. Consecutive pairs keep the cost O(n_points) while each distance
// has the exact pairwise law, so large samples stay cheap.
std::vector<double> sphere_distance_histogram(std::size_t n_points, std::size_t n_bins,
                                              std::size_t dim, Rng& rng);

}  // namespace diva

#endif  // DIVA_MINING_HPP_
