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

#include "diva/mining.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "diva/errors.hpp"

namespace diva {

namespace {

constexpr double kDistMin = 0.5;
constexpr double kDistMax = 2.0 - 1e-4;

}  // namespace

void validate_batch_spec(const BatchSpec& spec, const std::vector<Task>& active) {
  if (spec.n_classes == 0 || spec.m_per_class == 0) {
    throw ConfigError("batch spec: n_classes and m_per_class must be positive");
  }
  if (contains_task(active, Task::Disc) && spec.n_classes < 2) {
    throw ConfigError("batch spec: discriminative task needs >= 2 classes per batch");
  }
  if (contains_task(active, Task::Shared) && spec.n_classes < 3) {
    throw ConfigError("batch spec: class-shared task needs >= 3 classes per batch");
  }
  if (contains_task(active, Task::Intra) && spec.m_per_class < 3) {
    throw ConfigError("batch spec: intra-class task needs >= 3 samples per class");
  }
}

std::vector<std::size_t> build_batch(const std::vector<std::vector<std::size_t>>& by_class,
                                     const BatchSpec& spec, Rng& rng) {
  std::vector<std::size_t> eligible;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (by_class[c].size() >= spec.m_per_class) eligible.push_back(c);
  }
  if (eligible.size() < spec.n_classes) {
    throw Error("build_batch: need " + std::to_string(spec.n_classes) +
                " classes with >= " + std::to_string(spec.m_per_class) +
                " samples, have " + std::to_string(eligible.size()));
  }
  const std::vector<std::size_t> picked =
      rng.sample_without_replacement(eligible.size(), spec.n_classes);
  std::vector<std::size_t> batch;
  batch.reserve(spec.n_classes * spec.m_per_class);
  for (std::size_t k : picked) {
    const std::vector<std::size_t>& pool = by_class[eligible[k]];
    for (std::size_t s : rng.sample_without_replacement(pool.size(), spec.m_per_class)) {
      batch.push_back(pool[s]);
    }
  }
  return batch;
}

double q_density(double d, std::size_t dim) {
  if (!(d >= 0.0 && d <= 2.0)) throw Error("q_density: distance outside [0,2]");
  if (dim < 2) throw Error("q_density: dim must be >= 2");
  const double nd = static_cast<double>(dim);
  const double bracket = 1.0 - 0.25 * d * d;
  // 0^0 = 1 by convention handles (d=0, dim=2) and (d=2, dim=3).
  const double lead = (dim == 2) ? 1.0 : std::pow(d, nd - 2.0);
  const double tail = (dim == 3) ? 1.0 : std::pow(bracket, 0.5 * (nd - 3.0));
  return lead * tail;
}

double sampling_weight(double d, std::size_t dim, double lambda) {
  return sampling_weight_grad(d, dim, lambda).first;
}

std::pair<double, double> sampling_weight_grad(double d, std::size_t dim, double lambda) {
  if (lambda <= 0.0) throw Error("sampling_weight: lambda must be positive");
  const double dc = std::clamp(d, kDistMin, kDistMax);
  const double w = 1.0 / q_density(dc, dim);
  if (w >= lambda) return {lambda, 0.0};
  if (d <= kDistMin || d >= kDistMax) return {w, 0.0};
  const double nd = static_cast<double>(dim);
  const double dlogq = (nd - 2.0) / dc - (nd - 3.0) * dc / (4.0 - dc * dc);
  return {w, -w * dlogq};
}

namespace {

// Picks one of `candidates` (rows of emb) with probability proportional to
// the inverse-density weight of its distance to row `anchor`.
std::size_t weighted_pick(const Tensor& emb, std::size_t anchor,
                          const std::vector<std::size_t>& candidates, double lambda,
                          Rng& rng) {
  std::vector<double> w(candidates.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const double d = row_distance(emb, anchor, emb, candidates[k]);
    w[k] = sampling_weight(d, emb.cols(), lambda);
  }
  return candidates[rng.discrete(w)];
}

}  // namespace

std::size_t sample_negative(const Tensor& anchor_emb, const Tensor& candidate_embs,
                            const std::vector<char>& masked, std::size_t dim,
                            double lambda, Rng& rng) {
  if (candidate_embs.rank() != 2 || candidate_embs.cols() != anchor_emb.size()) {
    throw Error("sample_negative: candidate/anchor dimension mismatch");
  }
  if (!masked.empty() && masked.size() != candidate_embs.rows()) {
    throw Error("sample_negative: mask length mismatch");
  }
  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < candidate_embs.rows(); ++i) {
    if (masked.empty() || !masked[i]) open.push_back(i);
  }
  if (open.empty()) throw Error("sample_negative: no unmasked candidates");
  const std::size_t cols = candidate_embs.cols();
  std::vector<double> w(open.size());
  for (std::size_t k = 0; k < open.size(); ++k) {
    const double* row = candidate_embs.data.data() + open[k] * cols;
    double d2 = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      const double diff = row[j] - anchor_emb.data[j];
      d2 += diff * diff;
    }
    w[k] = sampling_weight(std::sqrt(d2), dim, lambda);
  }
  return open[rng.discrete(w)];
}

std::vector<Triplet> mine_triplets(Task kind, const Tensor& embeddings,
                                   const std::vector<int>& labels, double lambda,
                                   Rng& rng) {
  if (kind == Task::Dance) throw Error("mine_triplets: no triplet kind for the dance task");
  if (embeddings.rank() != 2 || embeddings.rows() != labels.size()) {
    throw Error("mine_triplets: embeddings/labels mismatch");
  }
  const std::size_t b = embeddings.rows();
  std::vector<Triplet> out;
  out.reserve(b);
  std::vector<std::size_t> same, other, third;
  for (std::size_t a = 0; a < b; ++a) {
    same.clear();
    other.clear();
    for (std::size_t i = 0; i < b; ++i) {
      if (i == a) continue;
      (labels[i] == labels[a] ? same : other).push_back(i);
    }
    Triplet t;
    t.a = a;
    t.kind = kind;
    if (kind == Task::Disc) {
      if (same.empty() || other.empty()) continue;
      t.p = same[rng.index(same.size())];
      t.n = weighted_pick(embeddings, a, other, lambda, rng);
    } else if (kind == Task::Shared) {
      if (other.empty()) continue;
      t.p = weighted_pick(embeddings, a, other, lambda, rng);
      third.clear();
      for (std::size_t i : other) {
        if (labels[i] != labels[t.p]) third.push_back(i);
      }
      if (third.empty()) continue;
      t.n = weighted_pick(embeddings, a, third, lambda, rng);
    } else {  // intra
      if (same.size() < 2) continue;
      t.p = same[rng.index(same.size())];
      third.clear();
      for (std::size_t i : same) {
        if (i != t.p) third.push_back(i);
      }
      t.n = weighted_pick(embeddings, a, third, lambda, rng);
    }
    out.push_back(t);
  }
  return out;
}

void check_triplets(const std::vector<Triplet>& triplets, const std::vector<int>& labels) {
  for (const Triplet& t : triplets) {
    if (t.a == t.p || t.a == t.n || t.p == t.n) {
      throw Error("triplet indices must be pairwise distinct");
    }
    const int ya = labels.at(t.a), yp = labels.at(t.p), yn = labels.at(t.n);
    bool ok = false;
    switch (t.kind) {
      case Task::Disc:
        ok = (ya == yp) && (ya != yn);
        break;
      case Task::Shared:
        ok = (ya != yp) && (yp != yn) && (ya != yn);
        break;
      case Task::Intra:
        ok = (ya == yp) && (ya == yn);
        break;
      case Task::Dance:
        ok = false;
        break;
    }
    if (!ok) throw Error("triplet violates the " + task_name(t.kind) + " label constraint");
  }
}

std::vector<double> sphere_distance_histogram(std::size_t n_points, std::size_t n_bins,
                                              std::size_t dim, Rng& rng) {
  if (n_points < 2 || n_bins == 0 || dim < 2) {
    throw Error("sphere_distance_histogram: need >= 2 points, >= 1 bin, dim >= 2");
  }
  std::vector<double> prev(dim), cur(dim);
  auto draw_unit = [&](std::vector<double>& v) {
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        v[j] = rng.normal();
        norm2 += v[j] * v[j];
      }
    } while (norm2 < 1e-24);
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t j = 0; j < dim; ++j) v[j] *= inv;
  };
  std::vector<std::size_t> counts(n_bins, 0);
  draw_unit(prev);
  for (std::size_t i = 1; i < n_points; ++i) {
    draw_unit(cur);
    double d2 = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double diff = cur[j] - prev[j];
      d2 += diff * diff;
    }
    const double d = std::sqrt(d2);
    std::size_t bin = static_cast<std::size_t>(d / 2.0 * static_cast<double>(n_bins));
    if (bin >= n_bins) bin = n_bins - 1;
    ++counts[bin];
    std::swap(prev, cur);
  }
  std::vector<double> mass(n_bins);
  const double total = static_cast<double>(n_points - 1);
  for (std::size_t k = 0; k < n_bins; ++k) mass[k] = static_cast<double>(counts[k]) / total;
  return mass;
}

}  // namespace diva
