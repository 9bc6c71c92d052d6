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

#ifndef DIVA_MODEL_HPP_
#define DIVA_MODEL_HPP_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "diva/nn.hpp"
#include "diva/tape.hpp"
#include "diva/task.hpp"

namespace diva {

struct EncoderConfig {
  std::size_t input_dim = 64;
  std::vector<std::size_t> hidden_dims{256, 256};
  std::size_t feature_dim = 128;
};

// Default decorrelation pair set: the class-discriminative head against
// each active auxiliary head.
std::vector<std::pair<Task, Task>> default_pair_set(const std::vector<Task>& active);

struct ModelConfig {
  EncoderConfig encoder;
  std::size_t embed_dim = 128;  // D, identical across heads
  std::vector<Task> tasks{Task::Disc, Task::Shared, Task::Intra, Task::Dance};
  // Decorrelation pairs; filled from default_pair_set(tasks) when empty and
  // decorrelation is in use.
  std::vector<std::pair<Task, Task>> pairs;
  double beta_init = 1.2;
  bool beta_learnable = false;

  void validate() const;
};

// Named handle to one parameter tensor.
struct ParamRef {
  std::string name;
  Tensor* tensor;
};

// p* <- mu * p* + (1 - mu) * p, elementwise over all pairs.
void momentum_update(const std::vector<ParamRef>& shadow,
                     const std::vector<ParamRef>& live, double mu);

// The full trainable state: shared encoder, one linear head per active
// task (each followed by row normalization onto the unit sphere), one
// two-layer decorrelation map psi per pair, the margin boundary beta, and
// the momentum shadow of encoder + Dance head.
class Model {
 public:
  Model(ModelConfig config, Rng& rng);

  const ModelConfig& config() const { return cfg_; }
  bool has_task(Task t) const { return contains_task(cfg_.tasks, t); }
  bool has_shadow() const { return has_task(Task::Dance); }
  std::size_t head_index(Task t) const;

  // Parameters the optimizer may update, in declared registry order.
  std::vector<ParamRef> trainable();
  // Everything persisted live: trainable() plus beta when it is fixed.
  std::vector<ParamRef> live_state();
  // Shadow parameters (empty when the Dance task is inactive).
  std::vector<ParamRef> shadow_state();

  // Plain inference paths.
  Tensor features(const Tensor& x) const;            // [B,F] -> [B,N]
  Tensor embed(Task t, const Tensor& x) const;       // [B,F] -> [B,D], unit rows
  Tensor embed_features(Task t, const Tensor& f) const;  // [B,N] -> [B,D]
  Tensor shadow_embed(const Tensor& x) const;        // momentum Dance path
  // Concatenation of w_k * phi_k(x) over active heads in canonical order;
  // absent weight entries default to 1.
  Tensor ensemble_embed(const Tensor& x, const std::map<Task, double>& weights) const;

  void momentum_step(double mu);

  // Exposed for persistence and the tape lease.
  Mlp encoder;
  std::vector<LinearLayer> heads;  // aligned with config().tasks
  std::vector<Mlp> psi;            // aligned with config().pairs
  Tensor beta;                     // shape {1}
  Mlp shadow_encoder;              // empty when Dance inactive
  LinearLayer shadow_dance;

 private:
  ModelConfig cfg_;
};

// Per-step lease of a model onto a tape: every live parameter becomes a
// leaf, forward helpers mirror the plain paths, and `trainable_vars` is
// aligned with Model::trainable() for gradient collection.
struct ModelGraph {
  Tape* tape = nullptr;
  const Model* model = nullptr;
  std::vector<Var> trainable_vars;
  std::vector<std::pair<Var, Var>> encoder_vars;            // (w, b) per layer
  std::vector<std::pair<Var, Var>> head_vars;               // aligned with heads
  std::vector<std::vector<std::pair<Var, Var>>> psi_vars;   // aligned with psi
  Var beta_var;

  static ModelGraph lease(Tape& tape, const Model& model);

  Var encode(Var x) const;
  Var embed(Task t, Var x) const;            // full path, rows on the sphere
  Var embed_features(Task t, Var f) const;
  Var psi_forward(std::size_t pair_idx, Var z) const;
};

}  // namespace diva

#endif  // DIVA_MODEL_HPP_
