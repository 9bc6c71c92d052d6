#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "diva/dataset.hpp"
#include "diva/errors.hpp"
#include "diva/evaluator.hpp"
#include "diva/model.hpp"
#include "diva/reference.hpp"
#include "diva/rng.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace diva;

namespace {

std::map<int, double> oracle(const Tensor& emb, const std::vector<int>& labels,
                             const std::vector<int>& ks) {
  std::vector<std::uint32_t> ul(labels.begin(), labels.end());
  return ref::recall_at_k(emb, ul, ks);
}

// Orthogonal matrix from Gram-Schmidt over a random square draw.
Tensor random_orthogonal(std::size_t d, Rng& rng) {
  Tensor q = testutil::random_tensor({d, d}, rng);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t p = 0; p < i; ++p) {
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += q.at(i, j) * q.at(p, j);
      for (std::size_t j = 0; j < d; ++j) q.at(i, j) -= dot * q.at(p, j);
    }
    double norm = 0.0;
    for (std::size_t j = 0; j < d; ++j) norm += q.at(i, j) * q.at(i, j);
    norm = std::sqrt(norm);
    for (std::size_t j = 0; j < d; ++j) q.at(i, j) /= norm;
  }
  return q;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  Tensor out({a.rows(), b.cols()});
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p) acc += a.at(i, p) * b.at(p, j);
      out.at(i, j) = acc;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("retrieval hits when the only other point shares the label") {
  Tensor emb = Tensor::from({0.0, 0.0, 1.0, 1.0}, {2, 2});
  auto r = recall_at_k(emb, {5, 5}, {1});
  CHECK(r.at(1) == 1.0);
}

TEST_CASE("interleaved classes on a line never retrieve a same-label neighbor") {
  const std::size_t n = 12;
  Tensor emb({n, 1});
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    emb[i] = static_cast<double>(i);
    labels[i] = static_cast<int>(i % 2);
  }
  CHECK(recall_at_k(emb, labels, {1}).at(1) == 0.0);
}

TEST_CASE("equidistant candidates resolve toward the lower index") {
  // Query at 0 sees both neighbors at distance 1; only the index decides.
  Tensor emb = Tensor::from({0.0, 1.0, -1.0}, {3, 1});
  CHECK(recall_at_k(emb, {0, 0, 1}, {1}).at(1) == doctest::Approx(2.0 / 3.0));
  CHECK(recall_at_k(emb, {0, 1, 0}, {1}).at(1) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("parallel retrieval equals the exhaustive oracle on random instances") {
  Rng rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + rng.index(70);
    const std::size_t d = 1 + rng.index(8);
    Tensor emb = testutil::random_tensor({n, d}, rng);
    std::vector<int> labels(n);
    for (auto& l : labels) l = static_cast<int>(rng.index(5));
    std::vector<int> ks;
    for (int k : {1, 2, 4, 8}) {
      if (static_cast<std::size_t>(k) < n) ks.push_back(k);
    }
    auto mine = recall_at_k(emb, labels, ks);
    auto want = oracle(emb, labels, ks);
    REQUIRE(mine.size() == want.size());
    for (const auto& [k, v] : want) CHECK(mine.at(k) == v);
  }
}

TEST_CASE("recall grows with k and stays a fraction") {
  Rng rng(32);
  Tensor emb = testutil::random_tensor({40, 4}, rng);
  std::vector<int> labels(40);
  for (auto& l : labels) l = static_cast<int>(rng.index(4));
  auto r = recall_at_k(emb, labels, {1, 2, 4, 8});
  CHECK(r.at(1) >= 0.0);
  CHECK(r.at(1) <= r.at(2));
  CHECK(r.at(2) <= r.at(4));
  CHECK(r.at(4) <= r.at(8));
  CHECK(r.at(8) <= 1.0);
}

TEST_CASE("retrieval validates k and label count") {
  Tensor emb = Tensor::from({0.0, 1.0, 2.0}, {3, 1});
  std::vector<int> labels = {0, 1, 0};
  CHECK_THROWS_AS(recall_at_k(emb, labels, {0}), ConfigError);
  CHECK_THROWS_AS(recall_at_k(emb, labels, {3}), ConfigError);
  CHECK_THROWS_AS(recall_at_k(emb, {0, 1}, {1}), ConfigError);
  CHECK_THROWS_AS(recall_at_k(emb, labels, {}), ConfigError);
}

TEST_CASE("clustering with one cluster per point reaches zero inertia") {
  Rng rng(33);
  Tensor pts = testutil::random_tensor({9, 3}, rng);
  auto assign = kmeans(pts, 9, 7);
  std::vector<int> sorted = assign;
  std::sort(sorted.begin(), sorted.end());
  for (int c = 0; c < 9; ++c) CHECK(sorted[static_cast<std::size_t>(c)] == c);
  CHECK(kmeans_inertia(pts, assign, 9) == doctest::Approx(0.0));
}

TEST_CASE("clustering separates well-spaced blobs") {
  Rng rng(34);
  const std::size_t per = 20;
  Tensor pts({2 * per, 2});
  std::vector<int> blob(2 * per);
  for (std::size_t i = 0; i < 2 * per; ++i) {
    const double cx = i < per ? 0.0 : 10.0;
    pts.at(i, 0) = cx + rng.normal(0.0, 0.3);
    pts.at(i, 1) = cx + rng.normal(0.0, 0.3);
    blob[i] = i < per ? 0 : 1;
  }
  auto assign = kmeans(pts, 2, 11);
  CHECK(nmi(assign, blob) == doctest::Approx(1.0));
}

TEST_CASE("clustering inertia never increases across iterations") {
  Rng rng(35);
  Tensor pts = testutil::random_tensor({60, 4}, rng);
  std::vector<double> trace;
  kmeans(pts, 5, 3, 50, &trace);
  REQUIRE(trace.size() >= 2);
  for (std::size_t i = 1; i < trace.size(); ++i) {
    CHECK(trace[i] <= trace[i - 1] + 1e-9);
  }
}

TEST_CASE("clustering is deterministic given the seed and validates input") {
  Rng rng(36);
  Tensor pts = testutil::random_tensor({30, 3}, rng);
  CHECK(kmeans(pts, 4, 9) == kmeans(pts, 4, 9));
  CHECK_THROWS_AS(kmeans(pts, 0, 9), ConfigError);
  CHECK_THROWS_AS(kmeans(pts, 31, 9), ConfigError);
  CHECK_THROWS_AS(kmeans(Tensor({0, 3}), 1, 9), ConfigError);
}

TEST_CASE("mutual information is 1 for matching partitions up to renaming") {
  std::vector<int> a = {0, 0, 1, 1, 2, 2};
  std::vector<int> renamed = {7, 7, 3, 3, 5, 5};
  CHECK(nmi(a, a) == doctest::Approx(1.0));
  CHECK(nmi(a, renamed) == doctest::Approx(1.0));
}

TEST_CASE("mutual information of a hand-built six-point table") {
  // Joint counts: (0,0)=2, (0,1)=1, (1,1)=1, (1,2)=2 over n=6.
  // I = (2/3) ln 2; H_a = ln 2; H_b = ln 3.
  std::vector<int> a = {0, 0, 0, 1, 1, 1};
  std::vector<int> b = {0, 0, 1, 1, 2, 2};
  const double want =
      (2.0 / 3.0) * std::log(2.0) / std::sqrt(std::log(2.0) * std::log(3.0));
  CHECK(nmi(a, b) == doctest::Approx(want).epsilon(1e-12));
  CHECK(nmi(b, a) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("mutual information handles constant partitions and bad lengths") {
  std::vector<int> flat = {4, 4, 4};
  std::vector<int> mixed = {0, 1, 2};
  CHECK(nmi(flat, flat) == 1.0);
  CHECK(nmi(flat, mixed) == 0.0);
  CHECK(nmi(mixed, flat) == 0.0);
  CHECK_THROWS_AS(nmi(flat, {1, 2}), ConfigError);
  CHECK_THROWS_AS(nmi({}, {}), ConfigError);
}

TEST_CASE("mutual information is symmetric and bounded on random partitions") {
  Rng rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> a(50), b(50);
    for (auto& v : a) v = static_cast<int>(rng.index(6));
    for (auto& v : b) v = static_cast<int>(rng.index(4));
    const double ab = nmi(a, b);
    CHECK(ab == doctest::Approx(nmi(b, a)).epsilon(1e-12));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
  }
}

TEST_CASE("spectrum of a line collapses to one mass and decay log 2") {
  Tensor pts = Tensor::from({0.0, 0.0, 1.0, 0.0, 2.0, 0.0, 3.0, 0.0}, {4, 2});
  auto p = normalized_spectrum(pts);
  REQUIRE(p.size() == 2);  // min(D=2, N-1=3)
  CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(spectral_decay(pts) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("an isotropic cross has zero spectral decay") {
  Tensor pts = Tensor::from({1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0}, {4, 2});
  CHECK(spectral_decay(pts) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("spectral decay survives orthogonal rotation") {
  Rng rng(38);
  Tensor x = testutil::random_tensor({30, 5}, rng);
  Tensor q = random_orthogonal(5, rng);
  const double base = spectral_decay(x);
  const double rotated = spectral_decay(matmul(x, q));
  CHECK(rotated == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("spectrum is a sorted distribution of the expected length") {
  Rng rng(39);
  Tensor wide = testutil::random_tensor({4, 7}, rng);
  auto pw = normalized_spectrum(wide);
  CHECK(pw.size() == 3);  // min(7, 3)
  Tensor tall = testutil::random_tensor({10, 3}, rng);
  auto pt = normalized_spectrum(tall);
  CHECK(pt.size() == 3);
  double total = 0.0;
  for (std::size_t i = 0; i < pt.size(); ++i) {
    CHECK(pt[i] >= 0.0);
    if (i > 0) CHECK(pt[i] <= pt[i - 1]);
    total += pt[i];
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("degenerate spectra are rejected") {
  Tensor same = Tensor::from({2.0, 3.0, 2.0, 3.0, 2.0, 3.0}, {3, 2});
  CHECK_THROWS_AS(normalized_spectrum(same), Error);
  CHECK_THROWS_AS(normalized_spectrum(Tensor::from({1.0, 2.0}, {1, 2})),
                  ConfigError);
}

namespace {

Dataset eval_dataset(std::size_t input_dim, Rng& rng) {
  // Four classes of six samples; classes 2 and 3 held out, pulled apart so
  // retrieval has signal.
  const std::size_t per = 6;
  Dataset ds;
  ds.features = Tensor({4 * per, input_dim});
  ds.labels.resize(4 * per);
  ds.split = {kTrainSplit, kTrainSplit, kTestSplit, kTestSplit};
  for (std::size_t i = 0; i < 4 * per; ++i) {
    const std::size_t c = i / per;
    ds.labels[i] = static_cast<int>(c);
    for (std::size_t j = 0; j < input_dim; ++j) {
      ds.features.at(i, j) = 2.0 * static_cast<double>(c == j % 4) +
                             0.3 * rng.normal();
    }
  }
  return ds;
}

}  // namespace

TEST_CASE("evaluation reports every head plus the ensemble") {
  Rng rng(40);
  ModelConfig cfg;
  cfg.encoder.input_dim = 5;
  cfg.encoder.hidden_dims = {16};
  cfg.encoder.feature_dim = 6;
  cfg.embed_dim = 4;
  Model m(cfg, rng);
  Dataset ds = eval_dataset(5, rng);
  EvalConfig ec;
  ec.ks = {1, 2, 4};
  EvalReport rep = evaluate(m, ds, ec);

  CHECK(rep.n_samples == 12);
  CHECK(rep.head_dim == 4);
  CHECK(rep.ensemble_dim == 16);
  REQUIRE(rep.per_head.size() == 4);
  for (const auto& [task, metrics] : rep.per_head) {
    CHECK(metrics.recall.at(1) <= metrics.recall.at(2));
    CHECK(metrics.recall.at(2) <= metrics.recall.at(4));
    CHECK(metrics.recall.at(4) <= 1.0);
    CHECK(metrics.spectral >= 0.0);
  }
  CHECK(rep.ensemble.recall.at(1) >= 0.0);
  CHECK(rep.nmi >= 0.0);
  CHECK(rep.nmi <= 1.0);
}

TEST_CASE("a single-head model ensembles to itself") {
  Rng rng(41);
  ModelConfig cfg;
  cfg.encoder.input_dim = 5;
  cfg.encoder.hidden_dims = {16};
  cfg.encoder.feature_dim = 6;
  cfg.embed_dim = 4;
  cfg.tasks = {Task::Disc};
  Model m(cfg, rng);
  Dataset ds = eval_dataset(5, rng);
  EvalConfig ec;
  ec.ks = {1, 2};
  EvalReport rep = evaluate(m, ds, ec);
  REQUIRE(rep.per_head.size() == 1);
  CHECK(rep.ensemble_dim == 4);
  CHECK(rep.per_head[0].second.recall.at(1) == rep.ensemble.recall.at(1));
  CHECK(rep.per_head[0].second.recall.at(2) == rep.ensemble.recall.at(2));
  CHECK(rep.per_head[0].second.spectral == rep.ensemble.spectral);
}

TEST_CASE("evaluation requires held-out classes") {
  Rng rng(42);
  ModelConfig cfg;
  cfg.encoder.input_dim = 5;
  cfg.encoder.hidden_dims = {16};
  cfg.encoder.feature_dim = 6;
  cfg.embed_dim = 4;
  Model m(cfg, rng);
  Dataset ds = eval_dataset(5, rng);
  ds.split = {kTrainSplit, kTrainSplit, kTrainSplit, kTrainSplit};
  CHECK_THROWS_AS(evaluate(m, ds, EvalConfig{}), ConfigError);
}
