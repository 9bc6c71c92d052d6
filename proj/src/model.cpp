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

#include "diva/model.hpp"

#include <algorithm>
#include <stdexcept>

#include "diva/errors.hpp"

namespace diva {

std::vector<std::pair<Task, Task>> default_pair_set(const std::vector<Task>& active) {
  std::vector<std::pair<Task, Task>> pairs;
  if (!contains_task(active, Task::Disc)) return pairs;
  for (Task aux : {Task::Dance, Task::Shared, Task::Intra}) {
    if (contains_task(active, aux)) pairs.emplace_back(Task::Disc, aux);
  }
  return pairs;
}

void ModelConfig::validate() const {
  if (encoder.input_dim == 0 || encoder.feature_dim == 0 || embed_dim == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  for (std::size_t h : encoder.hidden_dims) {
    if (h == 0) throw ConfigError("encoder hidden widths must be positive");
  }
  if (tasks.empty()) throw ConfigError("at least one task head is required");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    for (std::size_t j = i + 1; j < tasks.size(); ++j) {
      if (tasks[i] == tasks[j]) throw ConfigError("duplicate task head");
    }
  }
  for (const auto& [a, b] : pairs) {
    if (a == b) throw ConfigError("decorrelation pair must join distinct heads");
    if (!contains_task(tasks, a) || !contains_task(tasks, b)) {
      throw ConfigError("decorrelation pair references an inactive head");
    }
  }
  if (beta_init <= 0.0) throw ConfigError("beta_init must be positive");
}

void momentum_update(const std::vector<ParamRef>& shadow,
                     const std::vector<ParamRef>& live, double mu) {
  if (mu < 0.0 || mu > 1.0) throw ConfigError("momentum must lie in [0,1]");
  if (shadow.size() != live.size()) {
    throw Error("momentum update: shadow/live registries differ in length");
  }
  for (std::size_t k = 0; k < shadow.size(); ++k) {
    Tensor& s = *shadow[k].tensor;
    const Tensor& p = *live[k].tensor;
    if (!s.same_shape(p)) {
      throw Error("momentum update: shape mismatch at " + shadow[k].name);
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      s.data[i] = mu * s.data[i] + (1.0 - mu) * p.data[i];
    }
  }
}

namespace {

std::vector<Task> canonical_tasks(std::vector<Task> tasks) {
  std::sort(tasks.begin(), tasks.end(),
            [](Task a, Task b) { return static_cast<int>(a) < static_cast<int>(b); });
  return tasks;
}

}  // namespace

Model::Model(ModelConfig config, Rng& rng)
    : beta(Tensor::scalar(config.beta_init)), cfg_(std::move(config)) {
  cfg_.tasks = canonical_tasks(cfg_.tasks);
  if (cfg_.pairs.empty()) cfg_.pairs = default_pair_set(cfg_.tasks);
  cfg_.validate();

  encoder = init_mlp(cfg_.encoder.input_dim, cfg_.encoder.hidden_dims,
                     cfg_.encoder.feature_dim, rng);
  heads.reserve(cfg_.tasks.size());
  for (std::size_t k = 0; k < cfg_.tasks.size(); ++k) {
    heads.push_back(init_linear(cfg_.encoder.feature_dim, cfg_.embed_dim, rng));
  }
  psi.reserve(cfg_.pairs.size());
  for (std::size_t k = 0; k < cfg_.pairs.size(); ++k) {
    psi.push_back(init_mlp(cfg_.embed_dim, {cfg_.embed_dim}, cfg_.embed_dim, rng));
  }
  if (has_shadow()) {
    // Shadow starts as an exact copy of the live Dance path.
    shadow_encoder = encoder;
    shadow_dance = heads[head_index(Task::Dance)];
  }
}

std::size_t Model::head_index(Task t) const {
  for (std::size_t k = 0; k < cfg_.tasks.size(); ++k) {
    if (cfg_.tasks[k] == t) return k;
  }
  throw Error("task head not active: " + task_name(t));
}

std::vector<ParamRef> Model::trainable() {
  std::vector<ParamRef> out;
  for (std::size_t l = 0; l < encoder.layers.size(); ++l) {
    const std::string base = "encoder." + std::to_string(l);
    out.push_back({base + ".w", &encoder.layers[l].w});
    out.push_back({base + ".b", &encoder.layers[l].b});
  }
  for (std::size_t k = 0; k < heads.size(); ++k) {
    const std::string base = "head." + task_name(cfg_.tasks[k]);
    out.push_back({base + ".w", &heads[k].w});
    out.push_back({base + ".b", &heads[k].b});
  }
  for (std::size_t p = 0; p < psi.size(); ++p) {
    const std::string base = "psi." + task_name(cfg_.pairs[p].first) + "-" +
                             task_name(cfg_.pairs[p].second);
    for (std::size_t l = 0; l < psi[p].layers.size(); ++l) {
      out.push_back({base + "." + std::to_string(l) + ".w", &psi[p].layers[l].w});
      out.push_back({base + "." + std::to_string(l) + ".b", &psi[p].layers[l].b});
    }
  }
  if (cfg_.beta_learnable) out.push_back({"beta", &beta});
  return out;
}

std::vector<ParamRef> Model::live_state() {
  std::vector<ParamRef> out = trainable();
  if (!cfg_.beta_learnable) out.push_back({"beta", &beta});
  return out;
}

std::vector<ParamRef> Model::shadow_state() {
  std::vector<ParamRef> out;
  if (!has_shadow()) return out;
  for (std::size_t l = 0; l < shadow_encoder.layers.size(); ++l) {
    const std::string base = "shadow.encoder." + std::to_string(l);
    out.push_back({base + ".w", &shadow_encoder.layers[l].w});
    out.push_back({base + ".b", &shadow_encoder.layers[l].b});
  }
  out.push_back({"shadow.head.dance.w", &shadow_dance.w});
  out.push_back({"shadow.head.dance.b", &shadow_dance.b});
  return out;
}

Tensor Model::features(const Tensor& x) const { return mlp_forward(encoder, x); }

Tensor Model::embed(Task t, const Tensor& x) const {
  return embed_features(t, features(x));
}

Tensor Model::embed_features(Task t, const Tensor& f) const {
  Tensor e = linear_forward(heads[head_index(t)], f);
  normalize_rows(e);
  return e;
}

Tensor Model::shadow_embed(const Tensor& x) const {
  if (!has_shadow()) throw Error("no momentum shadow: Dance head inactive");
  Tensor e = linear_forward(shadow_dance, mlp_forward(shadow_encoder, x));
  normalize_rows(e);
  return e;
}

Tensor Model::ensemble_embed(const Tensor& x,
                             const std::map<Task, double>& weights) const {
  const Tensor f = features(x);
  const std::size_t b = (f.rank() == 2) ? f.rows() : 1;
  const std::size_t d = cfg_.embed_dim;
  Tensor out = (f.rank() == 2) ? Tensor::zeros({b, d * cfg_.tasks.size()})
                               : Tensor::zeros({d * cfg_.tasks.size()});
  for (std::size_t k = 0; k < cfg_.tasks.size(); ++k) {
    auto it = weights.find(cfg_.tasks[k]);
    const double w = (it == weights.end()) ? 1.0 : it->second;
    const Tensor e = embed_features(cfg_.tasks[k], f);
    for (std::size_t r = 0; r < b; ++r) {
      for (std::size_t j = 0; j < d; ++j) {
        out.data[r * d * cfg_.tasks.size() + k * d + j] = w * e.data[r * d + j];
      }
    }
  }
  return out;
}

void Model::momentum_step(double mu) {
  if (!has_shadow()) return;
  std::vector<ParamRef> live;
  for (std::size_t l = 0; l < encoder.layers.size(); ++l) {
    live.push_back({"encoder.w", &encoder.layers[l].w});
    live.push_back({"encoder.b", &encoder.layers[l].b});
  }
  LinearLayer& dance = heads[head_index(Task::Dance)];
  live.push_back({"head.dance.w", &dance.w});
  live.push_back({"head.dance.b", &dance.b});
  momentum_update(shadow_state(), live, mu);
}

ModelGraph ModelGraph::lease(Tape& tape, const Model& model) {
  ModelGraph g;
  g.tape = &tape;
  g.model = &model;
  Model& m = const_cast<Model&>(model);
  for (const ParamRef& p : m.trainable()) {
    g.trainable_vars.push_back(tape.leaf(*p.tensor));
  }
  // Slice the flat leaf list back into structured handles; the registry
  // order above is the contract.
  std::size_t i = 0;
  for (std::size_t l = 0; l < model.encoder.layers.size(); ++l) {
    Var w = g.trainable_vars[i++];
    Var b = g.trainable_vars[i++];
    g.encoder_vars.emplace_back(w, b);
  }
  for (std::size_t k = 0; k < model.heads.size(); ++k) {
    Var w = g.trainable_vars[i++];
    Var b = g.trainable_vars[i++];
    g.head_vars.emplace_back(w, b);
  }
  for (std::size_t p = 0; p < model.psi.size(); ++p) {
    std::vector<std::pair<Var, Var>> layers;
    for (std::size_t l = 0; l < model.psi[p].layers.size(); ++l) {
      Var w = g.trainable_vars[i++];
      Var b = g.trainable_vars[i++];
      layers.emplace_back(w, b);
    }
    g.psi_vars.push_back(std::move(layers));
  }
  g.beta_var = model.config().beta_learnable ? g.trainable_vars[i++]
                                             : tape.leaf(model.beta);
  return g;
}

Var ModelGraph::encode(Var x) const {
  Var h = x;
  for (std::size_t l = 0; l < encoder_vars.size(); ++l) {
    h = tape->linear(h, encoder_vars[l].first, encoder_vars[l].second);
    if (l + 1 < encoder_vars.size()) h = tape->relu(h);
  }
  return h;
}

Var ModelGraph::embed(Task t, Var x) const { return embed_features(t, encode(x)); }

Var ModelGraph::embed_features(Task t, Var f) const {
  const std::size_t k = model->head_index(t);
  Var e = tape->linear(f, head_vars[k].first, head_vars[k].second);
  return (tape->value(e).rank() == 2) ? tape->l2_normalize_rows(e)
                                      : tape->l2_normalize(e);
}

Var ModelGraph::psi_forward(std::size_t pair_idx, Var z) const {
  const auto& layers = psi_vars.at(pair_idx);
  Var h = z;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    h = tape->linear(h, layers[l].first, layers[l].second);
    if (l + 1 < layers.size()) h = tape->relu(h);
  }
  return h;
}

}  // namespace diva
