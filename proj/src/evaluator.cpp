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

#include "diva/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "diva/errors.hpp"
#include "diva/rng.hpp"

namespace diva {

namespace {
constexpr std::size_t kParallelQueries = 64;
}  // namespace

std::map<int, double> recall_at_k(const Tensor& embeddings,
                                  const std::vector<int>& labels,
                                  const std::vector<int>& ks) {
  if (embeddings.rank() != 2) {
    throw ConfigError("recall_at_k: embeddings must be [N, D]");
  }
  const std::size_t n = embeddings.rows();
  if (labels.size() != n) throw ConfigError("recall_at_k: label count mismatch");
  if (n < 2) throw ConfigError("recall_at_k: need at least 2 samples");
  if (ks.empty()) throw ConfigError("recall_at_k: no k values given");
  int kmax = 0;
  for (int k : ks) {
    if (k <= 0 || static_cast<std::size_t>(k) >= n) {
      throw ConfigError("recall_at_k: k must be in [1, sample_count)");
    }
    kmax = std::max(kmax, k);
  }

  // One flag per (query, k); filled independently per query, reduced in a
  // fixed order afterwards so the totals match the serial oracle exactly.
  std::vector<unsigned char> hit(n * ks.size(), 0);
  const bool par = n >= kParallelQueries;
#pragma omp parallel for schedule(static) if (par)
  for (long long qq = 0; qq < static_cast<long long>(n); ++qq) {
    const std::size_t q = static_cast<std::size_t>(qq);
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == q) continue;
      order.emplace_back(row_distance(embeddings, q, embeddings, j), j);
    }
    const auto mid = order.begin() + kmax;
    std::partial_sort(order.begin(), mid, order.end());
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      for (int r = 0; r < ks[ki]; ++r) {
        if (labels[order[static_cast<std::size_t>(r)].second] == labels[q]) {
          hit[q * ks.size() + ki] = 1;
          break;
        }
      }
    }
  }

  std::map<int, double> out;
  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    double acc = 0.0;
    for (std::size_t q = 0; q < n; ++q) acc += hit[q * ks.size() + ki];
    out[ks[ki]] = acc / static_cast<double>(n);
  }
  return out;
}

double kmeans_inertia(const Tensor& points, const std::vector<int>& assign,
                      std::size_t k) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  if (assign.size() != n) throw ConfigError("kmeans_inertia: length mismatch");
  Tensor centroids({k, d});
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(assign[i]);
    if (assign[i] < 0 || c >= k) throw ConfigError("kmeans_inertia: bad label");
    counts[c] += 1;
    for (std::size_t j = 0; j < d; ++j) centroids.at(c, j) += points.at(i, j);
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    for (std::size_t j = 0; j < d; ++j) {
      centroids.at(c, j) /= static_cast<double>(counts[c]);
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(assign[i]);
    const double dist = row_distance(points, i, centroids, c);
    total += dist * dist;
  }
  return total;
}

std::vector<int> kmeans(const Tensor& points, std::size_t k,
                        std::uint64_t seed, std::size_t iters,
                        std::vector<double>* inertia_trace) {
  if (points.rank() != 2 || points.rows() == 0) {
    throw ConfigError("kmeans: points must be a non-empty [N, D] matrix");
  }
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  if (k == 0 || k > n) {
    throw ConfigError("kmeans: K must be in [1, sample_count]");
  }

  Rng rng(seed);
  Tensor centroids({k, d});
  std::vector<std::size_t> chosen;
  chosen.push_back(rng.index(n));
  std::vector<double> d2(n, 0.0);
  while (chosen.size() < k) {
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c : chosen) {
        best = std::min(best, row_distance(points, i, points, c));
      }
      d2[i] = best * best;
      mass += d2[i];
    }
    if (mass > 0.0) {
      chosen.push_back(rng.discrete(d2));
    } else {
      // Every point coincides with a chosen centroid; fall back to the
      // lowest index not picked yet so seeding still terminates.
      std::set<std::size_t> seen(chosen.begin(), chosen.end());
      for (std::size_t i = 0; i < n; ++i) {
        if (!seen.count(i)) {
          chosen.push_back(i);
          break;
        }
      }
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t j = 0; j < d; ++j) {
      centroids.at(c, j) = points.at(chosen[c], j);
    }
  }

  std::vector<int> assign(n, -1);
  for (std::size_t it = 0; it < iters; ++it) {
    std::vector<int> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const double dist = row_distance(points, i, centroids, c);
        if (dist < best) {
          best = dist;
          arg = static_cast<int>(c);
        }
      }
      next[i] = arg;
    }
    if (next == assign) break;
    assign = std::move(next);

    std::vector<std::size_t> counts(k, 0);
    Tensor sums({k, d});
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(assign[i]);
      counts[c] += 1;
      for (std::size_t j = 0; j < d; ++j) sums.at(c, j) += points.at(i, j);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centroid
      for (std::size_t j = 0; j < d; ++j) {
        centroids.at(c, j) = sums.at(c, j) / static_cast<double>(counts[c]);
      }
    }
    if (inertia_trace) {
      inertia_trace->push_back(kmeans_inertia(points, assign, k));
    }
  }
  return assign;
}

double nmi(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw ConfigError("nmi: partition length mismatch");
  if (a.empty()) throw ConfigError("nmi: empty partitions");
  const double n = static_cast<double>(a.size());
  std::map<int, double> ca, cb;
  std::map<std::pair<int, int>, double> cab;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
    cab[{a[i], b[i]}] += 1.0;
  }
  auto entropy = [n](const std::map<int, double>& counts) {
    double h = 0.0;
    for (const auto& [label, c] : counts) {
      const double p = c / n;
      if (p > 0.0) h -= p * std::log(p);
    }
    return h;
  };
  const double ha = entropy(ca);
  const double hb = entropy(cb);
  if (ha == 0.0 && hb == 0.0) return 1.0;  // both constant: identical up to naming
  if (ha == 0.0 || hb == 0.0) return 0.0;  // one constant: nothing to share
  double mi = 0.0;
  for (const auto& [key, c] : cab) {
    const double pab = c / n;
    const double pa = ca[key.first] / n;
    const double pb = cb[key.second] / n;
    if (pab > 0.0) mi += pab * std::log(pab / (pa * pb));
  }
  return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

namespace {

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations. The matrix
// is destroyed. Adequate for the Gram sizes the evaluator sees (a few
// hundred); convergence is quadratic once the off-diagonal mass is small.
std::vector<double> symmetric_eigenvalues(std::vector<double>& m,
                                          std::size_t n) {
  constexpr std::size_t kMaxSweeps = 64;
  auto at = [&m, n](std::size_t i, std::size_t j) -> double& {
    return m[i * n + j];
  };
  for (std::size_t sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
    }
    double diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) diag += at(i, i) * at(i, i);
    if (off <= 1e-30 * std::max(diag, 1e-300)) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = at(i, p);
          const double aiq = at(i, q);
          at(i, p) = c * aip - s * aiq;
          at(i, q) = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = at(p, i);
          const double aqi = at(q, i);
          at(p, i) = c * api - s * aqi;
          at(q, i) = s * api + c * aqi;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = at(i, i);
  return eig;
}

}  // namespace

std::vector<double> normalized_spectrum(const Tensor& embeddings) {
  if (embeddings.rank() != 2) {
    throw ConfigError("spectrum: embeddings must be [N, D]");
  }
  const std::size_t n = embeddings.rows();
  const std::size_t d = embeddings.cols();
  if (n < 2) throw ConfigError("spectrum: need at least 2 samples");

  Tensor x = embeddings;
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x.at(i, j);
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) x.at(i, j) -= mean;
  }

  // Gram matrix on the smaller side; its nonzero eigenvalues are the squared
  // singular values either way.
  const std::size_t g = std::min(n, d);
  std::vector<double> gram(g * g, 0.0);
  if (d <= n) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i; j < d; ++j) {
        double acc = 0.0;
        for (std::size_t r = 0; r < n; ++r) acc += x.at(r, i) * x.at(r, j);
        gram[i * d + j] = acc;
        gram[j * d + i] = acc;
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t r = 0; r < d; ++r) acc += x.at(i, r) * x.at(j, r);
        gram[i * n + j] = acc;
        gram[j * n + i] = acc;
      }
    }
  }

  std::vector<double> eig = symmetric_eigenvalues(gram, g);
  std::vector<double> sv;
  sv.reserve(g);
  for (double e : eig) sv.push_back(std::sqrt(std::max(e, 0.0)));
  std::sort(sv.begin(), sv.end(), std::greater<double>());
  sv.resize(std::min(d, n - 1));

  double total = 0.0;
  for (double s : sv) total += s;
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error("spectrum: rank-zero embedding (all rows identical)");
  }
  for (double& s : sv) s /= total;
  return sv;
}

double spectral_decay(const Tensor& embeddings) {
  const std::vector<double> p = normalized_spectrum(embeddings);
  const double m = static_cast<double>(p.size());
  double kl = 0.0;
  for (double pi : p) {
    if (pi > 0.0) kl += pi * std::log(pi * m);
  }
  return kl;
}

namespace {

MetricSet score_embedding(const Tensor& emb, const std::vector<int>& labels,
                          const std::vector<int>& ks) {
  MetricSet out;
  out.recall = recall_at_k(emb, labels, ks);
  out.spectral = spectral_decay(emb);
  return out;
}

}  // namespace

EvalReport evaluate(const Model& m, const Dataset& ds, const EvalConfig& cfg) {
  validate_dataset(ds);
  const std::vector<std::size_t> idx = split_indices(ds, kTestSplit);
  if (idx.empty()) throw ConfigError("evaluate: test split is empty");
  const Tensor x = gather_rows(ds.features, idx);
  const std::vector<int> labels = gather_labels(ds.labels, idx);
  std::set<int> distinct(labels.begin(), labels.end());

  EvalReport report;
  report.n_samples = idx.size();
  report.head_dim = m.config().embed_dim;
  for (Task t : m.config().tasks) {
    report.per_head.emplace_back(t, score_embedding(m.embed(t, x), labels, cfg.ks));
  }
  const Tensor ens = m.ensemble_embed(x, cfg.ensemble_weights);
  report.ensemble_dim = ens.cols();
  report.ensemble = score_embedding(ens, labels, cfg.ks);
  report.nmi = nmi(
      kmeans(ens, distinct.size(), cfg.seed, cfg.kmeans_iters), labels);
  return report;
}

}  // namespace diva
