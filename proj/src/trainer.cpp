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

#include "diva/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

#include "diva/errors.hpp"
#include "diva/tape.hpp"

namespace diva {

void AugmentConfig::validate() const {
  if (noise_sigma < 0.0 || !std::isfinite(noise_sigma)) {
    throw ConfigError("augment: noise_sigma must be finite and >= 0");
  }
  if (dropout_rate < 0.0 || dropout_rate > 1.0) {
    throw ConfigError("augment: dropout_rate must lie in [0, 1]");
  }
}

Tensor augment(const Tensor& x, const AugmentConfig& cfg, Rng& rng) {
  cfg.validate();
  if (!x.all_finite()) throw Error("augment: non-finite input");
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double noise = rng.normal();
    const double u = rng.uniform();
    out[i] = u < cfg.dropout_rate ? 0.0 : out[i] + cfg.noise_sigma * noise;
  }
  return out;
}

void AdamConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw ConfigError("optim: learning rate must be finite and > 0");
  }
  if (weight_decay < 0.0) throw ConfigError("optim: weight decay must be >= 0");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw ConfigError("optim: betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw ConfigError("optim: eps must be > 0");
}

AdamState AdamState::like(const std::vector<ParamRef>& params) {
  AdamState st;
  st.m.reserve(params.size());
  st.v.reserve(params.size());
  for (const ParamRef& p : params) {
    st.m.push_back(Tensor(p.tensor->shape));
    st.v.push_back(Tensor(p.tensor->shape));
  }
  return st;
}

void adam_step(const std::vector<ParamRef>& params,
               const std::vector<Tensor>& grads, AdamState& state,
               const AdamConfig& cfg, double lr) {
  if (params.size() != grads.size() || params.size() != state.m.size() ||
      params.size() != state.v.size()) {
    throw Error("adam_step: parameter/gradient/state count mismatch");
  }
  state.t += 1;
  const double mc = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double vc = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i].tensor;
    const Tensor& g = grads[i];
    if (!p.same_shape(g) || !p.same_shape(state.m[i])) {
      throw Error("adam_step: shape mismatch at " + params[i].name);
    }
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double grad = g[j] + cfg.weight_decay * p[j];
      state.m[i][j] = cfg.beta1 * state.m[i][j] + (1.0 - cfg.beta1) * grad;
      state.v[i][j] = cfg.beta2 * state.v[i][j] + (1.0 - cfg.beta2) * grad * grad;
      const double mhat = state.m[i][j] / mc;
      const double vhat = state.v[i][j] / vc;
      p[j] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

void TrainConfig::validate() const {
  model.validate();
  weights.validate();
  augment.validate();
  optim.validate();
  if (!contains_task(model.tasks, Task::Disc)) {
    throw ConfigError("train: the active task set must contain disc");
  }
  validate_batch_spec(batch, model.tasks);
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (mu < 0.0 || mu > 1.0) throw ConfigError("train: mu must lie in [0, 1]");
  if (!(lr_decay_factor > 0.0)) {
    throw ConfigError("train: lr_decay_factor must be > 0");
  }
  if (contains_task(model.tasks, Task::Dance) && queue_capacity == 0) {
    throw ConfigError("train: queue_capacity must be >= 1 for the contrastive head");
  }
}

TrainerState TrainerState::init(const TrainConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  Model model(cfg.model, rng);
  AdamState opt = AdamState::like(model.trainable());
  std::optional<MemoryQueue> queue;
  if (model.has_task(Task::Dance)) {
    queue.emplace(cfg.queue_capacity, cfg.model.embed_dim, rng);
  }
  return TrainerState{std::move(model), std::move(opt), std::move(queue),
                      std::move(rng), 0, cfg.optim.lr};
}

LossBreakdown train_step(TrainerState& st, const Tensor& x,
                         const std::vector<int>& labels,
                         const TrainConfig& cfg) {
  Model& m = st.model;
  const LossWeights& w = cfg.weights;

  StepInputs in;
  in.x = x;
  in.labels = labels;
  in.triplets[Task::Disc] =
      mine_triplets(Task::Disc, m.embed(Task::Disc, x), labels, w.lambda, st.rng);
  if (m.has_task(Task::Shared) && w.alpha_shared > 0.0) {
    in.triplets[Task::Shared] = mine_triplets(
        Task::Shared, m.embed(Task::Shared, x), labels, w.lambda, st.rng);
  }
  if (m.has_task(Task::Intra) && w.alpha_intra > 0.0) {
    in.triplets[Task::Intra] = mine_triplets(
        Task::Intra, m.embed(Task::Intra, x), labels, w.lambda, st.rng);
  }

  const bool contrastive = m.has_task(Task::Dance) && w.alpha_dance > 0.0;
  Tensor shadow_keys;
  if (contrastive) {
    in.x_aug = augment(x, cfg.augment, st.rng);
    shadow_keys = m.shadow_embed(in.x_aug);
    in.negatives = std::make_shared<const Tensor>(st.queue->snapshot());
  }

  Tape tape;
  ModelGraph g = ModelGraph::lease(tape, m);
  LossBreakdown bd;
  Var total = joint_loss(tape, g, in, w, &bd);
  if (!total.valid()) {
    throw Error("train_step: no loss term survived (empty triplets everywhere)");
  }
  if (!std::isfinite(bd.total)) {
    std::ostringstream msg;
    msg << "train_step: non-finite loss " << bd.total;
    if (bd.disc) msg << " disc=" << *bd.disc;
    if (bd.shared) msg << " shared=" << *bd.shared;
    if (bd.intra) msg << " intra=" << *bd.intra;
    if (bd.dance) msg << " dance=" << *bd.dance;
    for (double c : bd.pair_costs) msg << " c=" << c;
    throw DivergenceError(msg.str());
  }

  tape.backward(total);
  std::vector<Tensor> grads;
  grads.reserve(g.trainable_vars.size());
  for (Var pv : g.trainable_vars) grads.push_back(tape.grad(pv));
  adam_step(m.trainable(), grads, st.opt, cfg.optim, st.lr);

  m.momentum_step(cfg.mu);
  if (contrastive) st.queue->push_rows(shadow_keys);
  return bd;
}

namespace {

void progress_line(std::ostream& os, std::size_t epoch, std::size_t step,
                   const LossBreakdown& bd) {
  double c_sum = 0.0;
  for (double c : bd.pair_costs) c_sum += c;
  os << epoch << ' ' << step << ' ' << bd.disc.value_or(0.0) << ' '
     << bd.shared.value_or(0.0) << ' ' << bd.intra.value_or(0.0) << ' '
     << bd.dance.value_or(0.0) << ' ' << c_sum << ' ' << bd.total << '\n';
}

}  // namespace

TrainHistory fit(TrainerState& st, const Dataset& ds, const TrainConfig& cfg,
                 std::ostream* progress) {
  cfg.validate();
  validate_dataset(ds);
  if (ds.feature_dim() != cfg.model.encoder.input_dim) {
    throw ConfigError("fit: dataset feature dim " +
                      std::to_string(ds.feature_dim()) +
                      " does not match encoder input dim " +
                      std::to_string(cfg.model.encoder.input_dim));
  }

  std::vector<std::vector<std::size_t>> by_class(ds.n_classes());
  for (const auto& [label, idx] : indices_by_class(ds, kTrainSplit)) {
    by_class[static_cast<std::size_t>(label)] = idx;
  }
  const std::size_t train_count = split_indices(ds, kTrainSplit).size();
  const std::size_t batch_size = cfg.batch.n_classes * cfg.batch.m_per_class;
  if (train_count < batch_size) {
    throw ConfigError("fit: train split smaller than one batch");
  }
  const std::size_t steps_per_epoch = train_count / batch_size;
  const bool want_eval =
      cfg.eval_every > 0 && !split_indices(ds, kTestSplit).empty();

  TrainHistory hist;
  hist.seed = cfg.seed;
  for (std::size_t epoch = st.epochs_done + 1; epoch <= cfg.epochs; ++epoch) {
    if (std::find(cfg.lr_decay_epochs.begin(), cfg.lr_decay_epochs.end(),
                  epoch) != cfg.lr_decay_epochs.end()) {
      st.lr *= cfg.lr_decay_factor;
    }
    for (std::size_t step = 0; step < steps_per_epoch; ++step) {
      const std::vector<std::size_t> idx = build_batch(by_class, cfg.batch, st.rng);
      const Tensor bx = gather_rows(ds.features, idx);
      const std::vector<int> bl = gather_labels(ds.labels, idx);
      LossBreakdown bd = train_step(st, bx, bl, cfg);
      if (progress) progress_line(*progress, epoch, step, bd);
      hist.steps.push_back(StepRecord{epoch, step, std::move(bd)});
    }
    st.epochs_done = epoch;
    if (want_eval && (epoch % cfg.eval_every == 0 || epoch == cfg.epochs)) {
      hist.evals.push_back(EvalSnapshot{epoch, evaluate(st.model, ds, cfg.eval)});
    }
  }
  return hist;
}

}  // namespace diva
