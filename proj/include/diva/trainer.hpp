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

#ifndef DIVA_TRAINER_HPP_
#define DIVA_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "diva/dataset.hpp"
#include "diva/evaluator.hpp"
#include "diva/mining.hpp"
#include "diva/model.hpp"
#include "diva/objectives.hpp"
#include "diva/queue.hpp"
#include "diva/rng.hpp"
#include "diva/tensor.hpp"

namespace diva {

struct AugmentConfig {
  double noise_sigma = 0.05;
  double dropout_rate = 0.1;
  void validate() const;
};

// Stochastic surrogate view of x: coordinatewise Gaussian jitter followed by
// coordinatewise dropout, out = mask .* (x + noise). With sigma = 0 and
// rate = 0 this is the identity.
Tensor augment(const Tensor& x, const AugmentConfig& cfg, Rng& rng);

struct AdamConfig {
  double lr = 1e-5;  // initial value; the schedule owns the live rate
  double weight_decay = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  void validate() const;
};

// First/second moment accumulators, one tensor per parameter, plus the
// shared step counter for bias correction.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::int64_t t = 0;

  static AdamState like(const std::vector<ParamRef>& params);
};

// In-place bias-corrected adaptive-moment update. Weight decay enters the
// gradient as an L2 term (classical Adam, not the decoupled variant).
void adam_step(const std::vector<ParamRef>& params,
               const std::vector<Tensor>& grads, AdamState& state,
               const AdamConfig& cfg, double lr);

struct TrainConfig {
  ModelConfig model;
  LossWeights weights;
  BatchSpec batch;
  AugmentConfig augment;
  AdamConfig optim;
  std::size_t epochs = 150;
  double mu = 0.999;                 // momentum coefficient for the shadow
  std::size_t queue_capacity = 4096;
  std::vector<std::size_t> lr_decay_epochs = {100};  // 1-based epoch numbers
  double lr_decay_factor = 0.3;
  std::uint64_t seed = 0;
  std::size_t eval_every = 5;  // epochs between held-out evals; 0 disables
  EvalConfig eval;

  void validate() const;
};

struct StepRecord {
  std::size_t epoch = 0;  // 1-based
  std::size_t step = 0;   // 0-based within the epoch
  LossBreakdown losses;
};

struct EvalSnapshot {
  std::size_t epoch = 0;
  EvalReport report;
};

struct TrainHistory {
  std::uint64_t seed = 0;
  std::vector<StepRecord> steps;
  std::vector<EvalSnapshot> evals;
};

// Everything a training step mutates, owned as one unit so checkpoints can
// capture and restore it atomically.
struct TrainerState {
  Model model;
  AdamState opt;
  std::optional<MemoryQueue> queue;  // engaged iff the contrastive head is
  Rng rng;
  std::size_t epochs_done = 0;
  double lr = 0.0;  // current rate, after any decays

  static TrainerState init(const TrainConfig& cfg);
};

// One optimization step on the batch (x, labels): forward the ranking heads
// and mine triplets in each head's own space, build the augmented views and
// their shadow keys, score the joint objective against a snapshot of the
// queue, backpropagate and apply the adaptive update, move the shadow toward
// the live weights, and finally push the shadow keys — in that order, so a
// sample never serves as its own negative. Throws DivergenceError when the
// loss comes back non-finite.
LossBreakdown train_step(TrainerState& st, const Tensor& x,
                         const std::vector<int>& labels,
                         const TrainConfig& cfg);

// Epoch loop over the train split: floor(train_size / batch_size) steps per
// epoch with classes resampled every batch, learning-rate decay at the
// configured epochs, and a held-out evaluation every eval_every epochs plus
// after the final one. Resumes after st.epochs_done, so a state restored
// from a checkpoint continues where it stopped. Progress lines go to
// `progress` when given.
TrainHistory fit(TrainerState& st, const Dataset& ds, const TrainConfig& cfg,
                 std::ostream* progress = nullptr);

}  // namespace diva

#endif  // DIVA_TRAINER_HPP_
