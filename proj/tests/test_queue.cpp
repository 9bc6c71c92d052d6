#include <algorithm>
#include <cmath>
#include <deque>
#include <vector>

#include "diva/errors.hpp"
#include "diva/queue.hpp"
#include "diva/rng.hpp"
#include "diva/tape.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace diva;

namespace {

Tensor unit2(double theta) {
  return Tensor::from({std::cos(theta), std::sin(theta)}, {2});
}

std::vector<std::vector<double>> sorted_rows(const Tensor& m) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    rows.emplace_back(m.data.begin() + i * m.cols(), m.data.begin() + (i + 1) * m.cols());
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

TEST_CASE("queue initializes full of unit rows, deterministically") {
  Rng r1(42), r2(42);
  MemoryQueue q1(16, 8, r1), q2(16, 8, r2);
  CHECK(q1.fill() == 16);
  CHECK(q1.cursor() == 0);
  const Tensor& buf = q1.storage();
  for (std::size_t i = 0; i < buf.rows(); ++i) {
    double n = 0.0;
    for (std::size_t j = 0; j < buf.cols(); ++j) n += buf.at(i, j) * buf.at(i, j);
    CHECK(std::abs(std::sqrt(n) - 1.0) < 1e-6);
  }
  CHECK(q1.storage().data == q2.storage().data);
  CHECK_THROWS_AS(MemoryQueue(0, 8, r1), ConfigError);
}

TEST_CASE("random unit directions are isotropic on average") {
  Rng rng(7);
  MemoryQueue q(1000, 128, rng);
  const Tensor& v = q.storage();
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < v.rows(); ++i) {
    for (std::size_t j = i + 1; j < v.rows(); ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < v.cols(); ++k) dot += v.at(i, k) * v.at(j, k);
      sum += dot;
      ++pairs;
    }
  }
  CHECK(std::abs(sum / static_cast<double>(pairs)) < 0.01);
}

TEST_CASE("pushing six vectors through capacity four keeps the newest four") {
  Rng rng(1);
  MemoryQueue q(4, 2, rng);
  std::vector<Tensor> v;
  for (int i = 1; i <= 6; ++i) v.push_back(unit2(0.3 * i));
  // batches of two
  for (int i = 0; i < 6; i += 2) {
    Tensor batch = Tensor::zeros({2, 2});
    for (int r = 0; r < 2; ++r) {
      batch.at(r, 0) = v[i + r][0];
      batch.at(r, 1) = v[i + r][1];
    }
    q.push_rows(batch);
  }
  CHECK(q.cursor() == 2);  // 6 mod 4
  Tensor expect = Tensor::zeros({4, 2});
  for (int r = 0; r < 4; ++r) {
    expect.at(r, 0) = v[2 + r][0];
    expect.at(r, 1) = v[2 + r][1];
  }
  CHECK(sorted_rows(q.storage()) == sorted_rows(expect));
}

TEST_CASE("a push of exactly capacity replaces the whole buffer in order") {
  Rng rng(2);
  MemoryQueue q(3, 2, rng);
  Tensor batch = Tensor::zeros({3, 2});
  for (int r = 0; r < 3; ++r) {
    Tensor u = unit2(1.0 + r);
    batch.at(r, 0) = u[0];
    batch.at(r, 1) = u[1];
  }
  q.push_rows(batch);
  CHECK(q.storage().data == batch.data);
  CHECK(q.cursor() == 0);
}

TEST_CASE("snapshot is a copy untouched by later pushes") {
  Rng rng(3);
  MemoryQueue q(4, 2, rng);
  Tensor snap = q.snapshot();
  REQUIRE(snap.rows() == 4);
  for (std::size_t i = 0; i < snap.rows(); ++i) {
    double n = 0.0;
    for (std::size_t j = 0; j < snap.cols(); ++j) n += snap.at(i, j) * snap.at(i, j);
    CHECK(std::abs(std::sqrt(n) - 1.0) < 1e-6);
  }
  Tensor before = snap;
  q.push(unit2(0.123));
  CHECK(snap.data == before.data);
}

TEST_CASE("push validates dimensions and unit norm") {
  Rng rng(4);
  MemoryQueue q(4, 3, rng);
  CHECK_THROWS_AS(q.push(Tensor::from({1.0, 0.0}, {2})), Error);
  CHECK_THROWS_AS(q.push(Tensor::from({1.001, 0.0, 0.0}, {3})), Error);
  q.push(Tensor::from({1.0 + 5e-5, 0.0, 0.0}, {3}));  // within tolerance
  Tensor wide = Tensor::zeros({2, 4});
  CHECK_THROWS_AS(q.push_rows(wide), Error);
}

TEST_CASE("FIFO contents match a list oracle over random push sequences") {
  Rng rng(99);
  const std::size_t cap = 7, dim = 3;
  MemoryQueue q(cap, dim, rng);
  std::deque<std::vector<double>> oracle;
  for (std::size_t i = 0; i < cap; ++i) {
    oracle.emplace_back(q.storage().data.begin() + i * dim,
                        q.storage().data.begin() + (i + 1) * dim);
  }
  for (int round = 0; round < 200; ++round) {
    const std::size_t batch = 1 + rng.index(5);
    Tensor m = Tensor::zeros({batch, dim});
    for (std::size_t r = 0; r < batch; ++r) {
      Tensor u = testutil::random_unit_vector(dim, rng);
      for (std::size_t j = 0; j < dim; ++j) m.at(r, j) = u[j];
      oracle.emplace_back(u.data);
      if (oracle.size() > cap) oracle.pop_front();
    }
    q.push_rows(m);
    std::vector<std::vector<double>> want(oracle.begin(), oracle.end());
    std::sort(want.begin(), want.end());
    CHECK(sorted_rows(q.storage()) == want);
  }
}

TEST_CASE("state restore round-trips and rejects mismatched shapes") {
  Rng rng(5);
  MemoryQueue q(4, 2, rng);
  q.push(unit2(0.5));
  Tensor buf = q.storage();
  MemoryQueue fresh(4, 2);
  fresh.restore(buf, q.cursor(), q.fill());
  CHECK(fresh.storage().data == q.storage().data);
  CHECK(fresh.cursor() == q.cursor());
  CHECK(fresh.fill() == q.fill());
  CHECK_THROWS_AS(fresh.restore(Tensor::zeros({3, 2}), 0, 0), CompatError);
  CHECK_THROWS_AS(fresh.restore(Tensor::zeros({4, 2}), 4, 0), CompatError);
  CHECK_THROWS_AS(fresh.restore(Tensor::zeros({4, 2}), 0, 5), CompatError);
}

TEST_CASE("losses read the queue through a constant snapshot, no gradient path") {
  Rng rng(6);
  MemoryQueue q(8, 4, rng);
  auto negatives = std::make_shared<const Tensor>(q.snapshot());
  Tensor x0 = testutil::random_unit_vector(4, rng);

  Tape tape;
  Var x = tape.leaf(x0);
  Var logits = tape.matvec_const(negatives, x);
  Var loss = tape.logsumexp(logits);
  tape.backward(loss);
  // Gradient flows into the live input ...
  double gn = 0.0;
  for (double g : tape.grad(x).data) gn += g * g;
  CHECK(gn > 0.0);
  // ... while the stored negatives are untouched by the backward pass.
  CHECK(negatives->data == q.storage().data);
  // Later pushes do not alter what the loss already captured.
  Tensor before = *negatives;
  q.push(testutil::random_unit_vector(4, rng));
  CHECK(negatives->data == before.data);
}
