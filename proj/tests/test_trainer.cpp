#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "diva/dataset.hpp"
#include "diva/errors.hpp"
#include "diva/trainer.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace diva;

namespace {

ModelConfig small_model(std::vector<Task> tasks = {}) {
  ModelConfig cfg;
  cfg.encoder.input_dim = 5;
  cfg.encoder.hidden_dims = {16};
  cfg.encoder.feature_dim = 6;
  cfg.embed_dim = 4;
  if (!tasks.empty()) {
    cfg.tasks = std::move(tasks);
    cfg.pairs.clear();
  }
  return cfg;
}

TrainConfig small_train(std::vector<Task> tasks = {}) {
  TrainConfig cfg;
  cfg.model = small_model(std::move(tasks));
  cfg.batch = BatchSpec{3, 3};
  cfg.optim.lr = 1e-3;
  cfg.epochs = 2;
  cfg.queue_capacity = 16;
  cfg.eval_every = 0;
  cfg.seed = 77;
  return cfg;
}

// Eight classes of six samples, last two classes held out; class centers
// spread along coordinate directions so mining sees real structure.
Dataset small_dataset(Rng& rng) {
  Dataset ds;
  const std::size_t classes = 8, per = 6, dim = 5;
  ds.features = Tensor({classes * per, dim});
  ds.labels.resize(classes * per);
  ds.split.assign(classes, kTrainSplit);
  ds.split[6] = kTestSplit;
  ds.split[7] = kTestSplit;
  for (std::size_t i = 0; i < classes * per; ++i) {
    const std::size_t c = i / per;
    ds.labels[i] = static_cast<int>(c);
    for (std::size_t j = 0; j < dim; ++j) {
      ds.features.at(i, j) =
          1.5 * static_cast<double>(c % dim == j) + 0.4 * rng.normal();
    }
  }
  return ds;
}

// Three samples from each of three classes; the shared-feature task needs
// at least three distinct classes in a batch.
std::vector<std::size_t> three_class_batch() {
  return {0, 1, 2, 6, 7, 8, 12, 13, 14};
}

std::vector<Tensor> param_copy(Model& m) {
  std::vector<Tensor> out;
  for (const ParamRef& p : m.trainable()) out.push_back(*p.tensor);
  return out;
}

bool all_equal(const std::vector<Tensor>& a, const std::vector<Tensor>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].shape != b[i].shape || a[i].data != b[i].data) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("augmentation with zero noise and zero dropout is the identity") {
  Rng rng(1);
  Tensor x = testutil::random_tensor({3, 4}, rng);
  AugmentConfig cfg;
  cfg.noise_sigma = 0.0;
  cfg.dropout_rate = 0.0;
  Tensor y = augment(x, cfg, rng);
  CHECK(y.shape == x.shape);
  CHECK(y.data == x.data);
}

TEST_CASE("full dropout zeroes every coordinate") {
  Rng rng(2);
  Tensor x = testutil::random_tensor({2, 5}, rng);
  AugmentConfig cfg;
  cfg.dropout_rate = 1.0;
  Tensor y = augment(x, cfg, rng);
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == 0.0);
}

TEST_CASE("augmented views average to the dropout-scaled input") {
  Rng rng(3);
  AugmentConfig cfg;
  cfg.noise_sigma = 0.1;
  cfg.dropout_rate = 0.2;
  const Tensor x = Tensor::from({4.0, -3.0}, {2});
  Tensor acc({2});
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    Tensor y = augment(x, cfg, rng);
    acc[0] += y[0];
    acc[1] += y[1];
  }
  for (std::size_t j = 0; j < 2; ++j) {
    const double want = (1.0 - cfg.dropout_rate) * x[j];
    CHECK(acc[j] / draws == doctest::Approx(want).epsilon(0.02));
  }
}

TEST_CASE("augmentation is deterministic given the generator state") {
  AugmentConfig cfg;
  Rng a(9), b(9);
  Tensor x = Tensor::from({1.0, 2.0, 3.0}, {3});
  CHECK(augment(x, cfg, a).data == augment(x, cfg, b).data);
}

TEST_CASE("augmentation rejects bad parameters") {
  Rng rng(4);
  Tensor x = Tensor::from({1.0}, {1});
  AugmentConfig cfg;
  cfg.dropout_rate = 1.5;
  CHECK_THROWS_AS(augment(x, cfg, rng), ConfigError);
  cfg.dropout_rate = 0.5;
  cfg.noise_sigma = -0.1;
  CHECK_THROWS_AS(augment(x, cfg, rng), ConfigError);
}

TEST_CASE("first adaptive step with constant gradient moves by almost -lr") {
  Tensor p({3});
  std::vector<ParamRef> params = {{"p", &p}};
  AdamState st = AdamState::like(params);
  AdamConfig cfg;
  cfg.weight_decay = 0.0;
  std::vector<Tensor> grads = {Tensor::full({3}, 0.5)};
  adam_step(params, grads, st, cfg, 1e-3);
  CHECK(st.t == 1);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(p[j] == doctest::Approx(-1e-3).epsilon(1e-6));
  }
}

TEST_CASE("zero gradient and zero decay leave parameters untouched") {
  Tensor p = Tensor::from({1.0, -2.0}, {2});
  const Tensor before = p;
  std::vector<ParamRef> params = {{"p", &p}};
  AdamState st = AdamState::like(params);
  AdamConfig cfg;
  cfg.weight_decay = 0.0;
  std::vector<Tensor> grads = {Tensor({2})};
  adam_step(params, grads, st, cfg, 1e-3);
  adam_step(params, grads, st, cfg, 1e-3);
  CHECK(p.data == before.data);
}

TEST_CASE("weight decay alone pulls parameters toward zero") {
  Tensor p = Tensor::from({2.0}, {1});
  std::vector<ParamRef> params = {{"p", &p}};
  AdamState st = AdamState::like(params);
  AdamConfig cfg;
  cfg.weight_decay = 0.1;
  std::vector<Tensor> grads = {Tensor({1})};
  adam_step(params, grads, st, cfg, 1e-3);
  // g = 0.1 * 2 = 0.2; first bias-corrected step is -lr * 0.2 / (0.2 + eps).
  CHECK(p[0] == doctest::Approx(2.0 - 1e-3).epsilon(1e-6));
}

TEST_CASE("adaptive updates are bitwise reproducible") {
  auto run = [] {
    Rng rng(5);
    Tensor p = testutil::random_tensor({4}, rng);
    std::vector<ParamRef> params = {{"p", &p}};
    AdamState st = AdamState::like(params);
    AdamConfig cfg;
    for (int i = 0; i < 7; ++i) {
      std::vector<Tensor> grads = {testutil::random_tensor({4}, rng)};
      adam_step(params, grads, st, cfg, 1e-2);
    }
    return p;
  };
  CHECK(run().data == run().data);
}

TEST_CASE("adaptive step validates alignment") {
  Tensor p({2});
  std::vector<ParamRef> params = {{"p", &p}};
  AdamState st = AdamState::like(params);
  AdamConfig cfg;
  std::vector<Tensor> wrong_count;
  CHECK_THROWS_AS(adam_step(params, wrong_count, st, cfg, 1e-3), Error);
  std::vector<Tensor> wrong_shape = {Tensor({3})};
  CHECK_THROWS_AS(adam_step(params, wrong_shape, st, cfg, 1e-3), Error);
}

TEST_CASE("train config validation catches each bad field") {
  CHECK_NOTHROW(small_train().validate());

  TrainConfig cfg = small_train();
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = small_train();
  cfg.optim.lr = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = small_train({Task::Shared, Task::Intra});
  CHECK_THROWS_AS(cfg.validate(), ConfigError);  // no discriminative head

  cfg = small_train();
  cfg.mu = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = small_train();
  cfg.lr_decay_factor = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = small_train();
  cfg.queue_capacity = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = small_train({Task::Disc});
  cfg.queue_capacity = 0;  // no contrastive head, no queue needed
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("a discriminative-only step reports exactly one loss component") {
  TrainConfig cfg = small_train({Task::Disc});
  TrainerState st = TrainerState::init(cfg);
  CHECK(!st.queue.has_value());

  Rng data_rng(11);
  Dataset ds = small_dataset(data_rng);
  auto idx = split_indices(ds, kTrainSplit);
  idx.resize(9);
  Tensor x = gather_rows(ds.features, idx);
  std::vector<int> labels = gather_labels(ds.labels, idx);

  const std::vector<Tensor> before = param_copy(st.model);
  LossBreakdown bd = train_step(st, x, labels, cfg);
  CHECK(bd.disc.has_value());
  CHECK(!bd.shared.has_value());
  CHECK(!bd.intra.has_value());
  CHECK(!bd.dance.has_value());
  CHECK(bd.pair_costs.empty());
  CHECK(bd.aux_total == 0.0);
  CHECK(bd.total == *bd.disc);
  CHECK(!all_equal(before, param_copy(st.model)));
}

TEST_CASE("a full step reports every active component and pair cost") {
  TrainConfig cfg = small_train();
  TrainerState st = TrainerState::init(cfg);
  REQUIRE(st.queue.has_value());
  CHECK(st.queue->capacity() == 16);

  Rng data_rng(12);
  Dataset ds = small_dataset(data_rng);
  const auto idx = three_class_batch();
  Tensor x = gather_rows(ds.features, idx);
  std::vector<int> labels = gather_labels(ds.labels, idx);

  LossBreakdown bd = train_step(st, x, labels, cfg);
  CHECK(bd.disc.has_value());
  CHECK(bd.shared.has_value());
  CHECK(bd.intra.has_value());
  CHECK(bd.dance.has_value());
  CHECK(bd.pair_costs.size() == 3);
  CHECK(std::isfinite(bd.total));
}

TEST_CASE("steps advance the queue cursor by the batch size") {
  TrainConfig cfg = small_train();
  TrainerState st = TrainerState::init(cfg);
  Rng data_rng(13);
  Dataset ds = small_dataset(data_rng);
  const auto idx = three_class_batch();
  Tensor x = gather_rows(ds.features, idx);
  std::vector<int> labels = gather_labels(ds.labels, idx);

  const Tensor initial = st.queue->snapshot();
  train_step(st, x, labels, cfg);
  CHECK(st.queue->cursor() == 9);
  CHECK(st.queue->fill() == 16);
  const Tensor after = st.queue->snapshot();
  std::size_t changed = 0;
  for (std::size_t r = 0; r < 16; ++r) {
    bool same = true;
    for (std::size_t j = 0; j < 4; ++j) {
      if (initial.at(r, j) != after.at(r, j)) same = false;
    }
    if (!same) ++changed;
  }
  CHECK(changed == 9);

  train_step(st, x, labels, cfg);
  CHECK(st.queue->cursor() == (9 + 9) % 16);
}

TEST_CASE("a step touches parameters but never the batch or fixed margin") {
  TrainConfig cfg = small_train();
  cfg.model.beta_learnable = false;
  TrainerState st = TrainerState::init(cfg);
  Rng data_rng(14);
  Dataset ds = small_dataset(data_rng);
  const auto idx = three_class_batch();
  const Tensor x = gather_rows(ds.features, idx);
  const std::vector<int> labels = gather_labels(ds.labels, idx);
  const Tensor x_before = x;
  const std::vector<int> labels_before = labels;
  const Tensor beta_before = st.model.beta;

  train_step(st, x, labels, cfg);
  CHECK(x.data == x_before.data);
  CHECK(labels == labels_before);
  CHECK(st.model.beta.data == beta_before.data);
}

TEST_CASE("a fully-weighted shadow ignores live updates while live moves") {
  TrainConfig cfg = small_train();
  cfg.mu = 1.0;
  TrainerState st = TrainerState::init(cfg);
  std::vector<Tensor> shadow_before;
  for (const ParamRef& p : st.model.shadow_state()) shadow_before.push_back(*p.tensor);
  const std::vector<Tensor> live_before = param_copy(st.model);

  Rng data_rng(15);
  Dataset ds = small_dataset(data_rng);
  const auto idx = three_class_batch();
  Tensor x = gather_rows(ds.features, idx);
  std::vector<int> labels = gather_labels(ds.labels, idx);
  train_step(st, x, labels, cfg);
  train_step(st, x, labels, cfg);

  std::vector<Tensor> shadow_after;
  for (const ParamRef& p : st.model.shadow_state()) shadow_after.push_back(*p.tensor);
  CHECK(all_equal(shadow_before, shadow_after));
  CHECK(!all_equal(live_before, param_copy(st.model)));
}

TEST_CASE("the optimizer state covers exactly the live trainable set") {
  TrainConfig cfg = small_train();
  TrainerState st = TrainerState::init(cfg);
  const auto params = st.model.trainable();
  CHECK(st.opt.m.size() == params.size());
  CHECK(st.opt.v.size() == params.size());
  for (const ParamRef& p : params) {
    CHECK(p.name.find("shadow") == std::string::npos);
  }
}

TEST_CASE("a poisoned probe map drives the loss non-finite and aborts") {
  TrainConfig cfg = small_train();
  TrainerState st = TrainerState::init(cfg);
  st.model.psi[0].layers[0].b[0] = 1e308;

  Rng data_rng(16);
  Dataset ds = small_dataset(data_rng);
  const auto idx = three_class_batch();
  Tensor x = gather_rows(ds.features, idx);
  std::vector<int> labels = gather_labels(ds.labels, idx);
  CHECK_THROWS_AS(train_step(st, x, labels, cfg), DivergenceError);
}

TEST_CASE("fitting is bitwise reproducible from the seed") {
  Rng data_rng(17);
  Dataset ds = small_dataset(data_rng);
  auto run = [&ds] {
    TrainConfig cfg = small_train();
    TrainerState st = TrainerState::init(cfg);
    TrainHistory hist = fit(st, ds, cfg);
    return std::make_pair(param_copy(st.model), std::move(hist));
  };
  auto [pa, ha] = run();
  auto [pb, hb] = run();
  CHECK(all_equal(pa, pb));
  REQUIRE(ha.steps.size() == hb.steps.size());
  CHECK(ha.steps.size() == 2 * 4);  // 2 epochs, 36 train / 9 per batch
  for (std::size_t i = 0; i < ha.steps.size(); ++i) {
    CHECK(ha.steps[i].losses.total == hb.steps[i].losses.total);
  }
}

TEST_CASE("an interrupted fit continues into the uninterrupted trajectory") {
  Rng data_rng(18);
  Dataset ds = small_dataset(data_rng);

  TrainConfig full = small_train();
  full.epochs = 3;
  TrainerState whole = TrainerState::init(full);
  TrainHistory hw = fit(whole, ds, full);

  TrainConfig head = full;
  head.epochs = 1;
  TrainerState parts = TrainerState::init(head);
  TrainHistory h1 = fit(parts, ds, head);
  CHECK(parts.epochs_done == 1);
  TrainHistory h2 = fit(parts, ds, full);  // resumes at epoch 2
  CHECK(parts.epochs_done == 3);

  REQUIRE(hw.steps.size() == h1.steps.size() + h2.steps.size());
  for (std::size_t i = 0; i < h1.steps.size(); ++i) {
    CHECK(hw.steps[i].losses.total == h1.steps[i].losses.total);
  }
  for (std::size_t i = 0; i < h2.steps.size(); ++i) {
    CHECK(hw.steps[h1.steps.size() + i].losses.total == h2.steps[i].losses.total);
  }
  CHECK(all_equal(param_copy(whole.model), param_copy(parts.model)));
  CHECK(whole.rng.serialize() == parts.rng.serialize());
}

TEST_CASE("learning-rate decay multiplies at the configured epochs exactly") {
  Rng data_rng(19);
  Dataset ds = small_dataset(data_rng);
  TrainConfig cfg = small_train();
  cfg.epochs = 3;
  cfg.lr_decay_epochs = {2};
  cfg.lr_decay_factor = 0.5;
  TrainerState st = TrainerState::init(cfg);
  CHECK(st.lr == 1e-3);
  fit(st, ds, cfg);
  CHECK(st.lr == 0.5e-3);
}

TEST_CASE("held-out evaluation runs on the configured cadence plus the end") {
  Rng data_rng(20);
  Dataset ds = small_dataset(data_rng);
  TrainConfig cfg = small_train();
  cfg.epochs = 5;
  cfg.eval_every = 2;
  cfg.eval.ks = {1, 2, 4};
  TrainerState st = TrainerState::init(cfg);
  TrainHistory hist = fit(st, ds, cfg);
  REQUIRE(hist.evals.size() == 3);
  CHECK(hist.evals[0].epoch == 2);
  CHECK(hist.evals[1].epoch == 4);
  CHECK(hist.evals[2].epoch == 5);
  CHECK(hist.evals[0].report.n_samples == 12);
  CHECK(hist.evals[0].report.per_head.size() == 4);
}

TEST_CASE("every history record carries one component per task and pair") {
  Rng data_rng(21);
  Dataset ds = small_dataset(data_rng);
  TrainConfig cfg = small_train();
  cfg.epochs = 1;
  TrainerState st = TrainerState::init(cfg);
  std::ostringstream progress;
  TrainHistory hist = fit(st, ds, cfg, &progress);
  REQUIRE(!hist.steps.empty());
  for (const StepRecord& rec : hist.steps) {
    int components = 0;
    components += rec.losses.disc.has_value();
    components += rec.losses.shared.has_value();
    components += rec.losses.intra.has_value();
    components += rec.losses.dance.has_value();
    components += static_cast<int>(rec.losses.pair_costs.size());
    CHECK(components == 4 + 3);
  }
  // One progress line per step: epoch step disc shared intra dance c total.
  std::istringstream lines(progress.str());
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    std::istringstream fields(line);
    double v;
    std::size_t n = 0;
    while (fields >> v) ++n;
    CHECK(n == 8);
    ++count;
  }
  CHECK(count == hist.steps.size());
}

TEST_CASE("fitting rejects a dataset whose width disagrees with the encoder") {
  Rng data_rng(22);
  Dataset ds = small_dataset(data_rng);
  TrainConfig cfg = small_train();
  cfg.model.encoder.input_dim = 7;
  TrainerState st = TrainerState::init(cfg);
  CHECK_THROWS_AS(fit(st, ds, cfg), ConfigError);
}
