#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "diva/config.hpp"
#include "diva/errors.hpp"

using diva::ConfigError;
using diva::RunConfig;
using nlohmann::json;

TEST_CASE("emit then parse is the identity on defaults") {
  const RunConfig def{};
  const json j = diva::to_json(def);
  const RunConfig back = diva::run_config_from_json(j);
  CHECK(diva::to_json(back) == j);
}

TEST_CASE("emit then parse is the identity on a fully customized config") {
  RunConfig c;
  c.train.model.encoder.input_dim = 10;
  c.train.model.encoder.hidden_dims = {32, 16};
  c.train.model.encoder.feature_dim = 12;
  c.train.model.embed_dim = 6;
  c.train.model.tasks = {diva::Task::Disc, diva::Task::Dance};
  c.train.model.pairs = {{diva::Task::Disc, diva::Task::Dance}};
  c.train.model.beta_init = 0.9;
  c.train.model.beta_learnable = true;
  c.train.weights.alpha_shared = 0.4;
  c.train.weights.base = diva::BaseLoss::TripletHinge;
  c.train.weights.nce_include_positive = false;
  c.train.batch.n_classes = 3;
  c.train.batch.m_per_class = 5;
  c.train.augment.dropout_rate = 0.25;
  c.train.optim.lr = 3e-4;
  c.train.epochs = 7;
  c.train.mu = 0.5;
  c.train.queue_capacity = 64;
  c.train.lr_decay_epochs = {3, 5};
  c.train.lr_decay_factor = 0.1;
  c.train.seed = 99;
  c.train.eval_every = 2;
  c.train.eval.ks = {1, 5};
  c.train.eval.ensemble_weights = {{diva::Task::Disc, 2.0},
                                   {diva::Task::Dance, 0.5}};
  c.synth.n_train_classes = 6;
  c.synth.noise_obs = 0.0;
  c.synth.shared_scale = 0.0;
  c.synth.seed = 11;

  const json j = diva::to_json(c);
  const RunConfig back = diva::run_config_from_json(j);
  CHECK(diva::to_json(back) == j);
  CHECK(back.train.model.tasks == c.train.model.tasks);
  CHECK(back.train.weights.base == diva::BaseLoss::TripletHinge);
  CHECK(back.train.eval.ensemble_weights.at(diva::Task::Dance) == 0.5);
  CHECK(back.synth.shared_scale == 0.0);
}

TEST_CASE("an empty object parses to the defaults") {
  const RunConfig def{};
  const RunConfig parsed = diva::run_config_from_json(json::object());
  CHECK(diva::to_json(parsed) == diva::to_json(def));
}

TEST_CASE("absent keys keep the overlay base, present keys replace it") {
  RunConfig base;
  base.train.epochs = 42;
  base.train.optim.lr = 7e-3;
  const json j = json::parse(R"({"optim": {"lr": 1e-4}})");
  const RunConfig out = diva::run_config_from_json(j, base);
  CHECK(out.train.epochs == 42);
  CHECK(out.train.optim.lr == 1e-4);
  CHECK(out.train.optim.beta1 == 0.9);
}

TEST_CASE("unknown keys are rejected with the offending path") {
  CHECK_THROWS_WITH_AS(
      diva::run_config_from_json(json::parse(R"({"epochz": 3})")),
      doctest::Contains("epochz"), ConfigError);
  CHECK_THROWS_WITH_AS(
      diva::run_config_from_json(json::parse(R"({"model": {"embed": 4}})")),
      doctest::Contains("model.embed"), ConfigError);
  CHECK_THROWS_WITH_AS(
      diva::run_config_from_json(
          json::parse(R"({"weights": {"alpha": 0.1}})")),
      doctest::Contains("weights.alpha"), ConfigError);
  CHECK_THROWS_WITH_AS(
      diva::run_config_from_json(json::parse(R"({"synth": {"dims": 3}})")),
      doctest::Contains("synth.dims"), ConfigError);
}

TEST_CASE("type mismatches and negative counts are rejected") {
  CHECK_THROWS_AS(
      diva::run_config_from_json(json::parse(R"({"epochs": "many"})")),
      ConfigError);
  CHECK_THROWS_AS(diva::run_config_from_json(json::parse(R"({"epochs": -3})")),
                  ConfigError);
  CHECK_THROWS_AS(
      diva::run_config_from_json(json::parse(R"({"mu": [0.9]})")),
      ConfigError);
  CHECK_THROWS_AS(
      diva::run_config_from_json(
          json::parse(R"({"lr_decay_epochs": [10, -1]})")),
      ConfigError);
  CHECK_THROWS_AS(
      diva::run_config_from_json(
          json::parse(R"({"lr_decay_epochs": [1.5]})")),
      ConfigError);
  CHECK_THROWS_AS(diva::run_config_from_json(json::parse(R"([1, 2])")),
                  ConfigError);
}

TEST_CASE("tasks parse from name arrays and from code strings") {
  const RunConfig names = diva::run_config_from_json(
      json::parse(R"({"model": {"tasks": ["disc", "dance"]}})"));
  CHECK(names.train.model.tasks ==
        std::vector<diva::Task>{diva::Task::Disc, diva::Task::Dance});

  const RunConfig codes = diva::run_config_from_json(
      json::parse(R"({"model": {"tasks": "D,S,I"}})"));
  CHECK(codes.train.model.tasks ==
        std::vector<diva::Task>{diva::Task::Disc, diva::Task::Shared,
                                diva::Task::Intra});

  CHECK_THROWS_AS(diva::run_config_from_json(
                      json::parse(R"({"model": {"tasks": ["disc", "disc"]}})")),
                  ConfigError);
  CHECK_THROWS_AS(diva::run_config_from_json(
                      json::parse(R"({"model": {"tasks": ["color"]}})")),
                  ConfigError);
  CHECK_THROWS_AS(diva::run_config_from_json(
                      json::parse(R"({"model": {"tasks": [1, 2]}})")),
                  ConfigError);
}

TEST_CASE("decorrelation pairs parse from two-element name arrays") {
  const RunConfig c = diva::run_config_from_json(json::parse(
      R"({"model": {"pairs": [["disc", "shared"], ["disc", "intra"]]}})"));
  REQUIRE(c.train.model.pairs.size() == 2);
  CHECK(c.train.model.pairs[0].first == diva::Task::Disc);
  CHECK(c.train.model.pairs[0].second == diva::Task::Shared);
  CHECK(c.train.model.pairs[1].second == diva::Task::Intra);

  CHECK_THROWS_AS(diva::run_config_from_json(
                      json::parse(R"({"model": {"pairs": [["disc"]]}})")),
                  ConfigError);
  CHECK_THROWS_AS(diva::run_config_from_json(
                      json::parse(R"({"model": {"pairs": ["disc"]}})")),
                  ConfigError);
}

TEST_CASE("base objective parses by name") {
  CHECK(diva::run_config_from_json(
            json::parse(R"({"weights": {"base": "triplet"}})"))
            .train.weights.base == diva::BaseLoss::TripletHinge);
  CHECK(diva::run_config_from_json(
            json::parse(R"({"weights": {"base": "margin"}})"))
            .train.weights.base == diva::BaseLoss::MarginPair);
  CHECK_THROWS_AS(diva::run_config_from_json(
                      json::parse(R"({"weights": {"base": "hinge2"}})")),
                  ConfigError);
}

TEST_CASE("presets seed the loss weights before explicit keys") {
  const RunConfig cub =
      diva::run_config_from_json(json::parse(R"({"preset": "cub-ibn"})"));
  CHECK(cub.train.weights.rho_dec == 300.0);
  CHECK(cub.train.weights.alpha_shared == 0.15);
  CHECK(cub.train.weights.alpha_intra == 0.15);
  CHECK(cub.train.weights.alpha_dance == 0.15);

  const RunConfig cars =
      diva::run_config_from_json(json::parse(R"({"preset": "cars-ibn"})"));
  CHECK(cars.train.weights.rho_dec == 100.0);
  CHECK(cars.train.weights.alpha_dance == 0.15);

  const RunConfig sop = diva::run_config_from_json(json::parse(
      R"({"preset": "sop-ibn", "weights": {"alpha_intra": 0.9}})"));
  CHECK(sop.train.weights.rho_dec == 150.0);
  CHECK(sop.train.weights.alpha_shared == 0.2);
  CHECK(sop.train.weights.alpha_dance == 0.2);
  CHECK(sop.train.weights.alpha_intra == 0.9);  // explicit key wins

  CHECK_THROWS_WITH_AS(
      diva::run_config_from_json(json::parse(R"({"preset": "inat-ibn"})")),
      doctest::Contains("inat-ibn"), ConfigError);
  CHECK_THROWS_AS(diva::run_config_from_json(json::parse(R"({"preset": 3})")),
                  ConfigError);
}

TEST_CASE("ensemble weights parse from a name-keyed object") {
  const RunConfig c = diva::run_config_from_json(json::parse(
      R"({"eval": {"ensemble_weights": {"disc": 2.0, "intra": 0.25}}})"));
  CHECK(c.train.eval.ensemble_weights.at(diva::Task::Disc) == 2.0);
  CHECK(c.train.eval.ensemble_weights.at(diva::Task::Intra) == 0.25);
  CHECK(c.train.eval.ensemble_weights.count(diva::Task::Shared) == 0);

  CHECK_THROWS_AS(
      diva::run_config_from_json(json::parse(
          R"({"eval": {"ensemble_weights": {"disc": "high"}}})")),
      ConfigError);
  CHECK_THROWS_AS(
      diva::run_config_from_json(
          json::parse(R"({"eval": {"ensemble_weights": {"blur": 1.0}}})")),
      ConfigError);
}

TEST_CASE("malformed JSON reports line and column") {
  const std::string text = "{\n  \"epochs\": 3,\n  \"mu\" 0.9\n}";
  try {
    diva::parse_run_config(text);
    FAIL("expected a parse failure");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("column") != std::string::npos);
  }
}

TEST_CASE("a missing config file is an I/O failure, not a parse failure") {
  CHECK_THROWS_AS(diva::load_run_config("/nonexistent/dir/run.json"),
                  diva::IoError);
}
