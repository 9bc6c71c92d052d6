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

#include "diva/config.hpp"

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "diva/errors.hpp"
#include "diva/task.hpp"

namespace diva {
namespace {

using nlohmann::json;

// Overlay reader for one JSON object: every known key is consumed through
// get(), finish() rejects whatever was never asked for.
class StrictObject {
 public:
  StrictObject(const json& j, std::string scope)
      : j_(j), scope_(std::move(scope)) {
    if (!j_.is_object())
      throw ConfigError("config: " + scope_ + " must be a JSON object");
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("config: bad value for " + path(key) + ": " + e.what());
    }
  }

  // Unsigned fields go through a signed read so negative literals fail
  // loudly instead of wrapping.
  void get_index(const char* key, std::size_t& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    std::int64_t v = 0;
    try {
      v = j_.at(key).get<std::int64_t>();
    } catch (const json::exception& e) {
      throw ConfigError("config: bad value for " + path(key) + ": " + e.what());
    }
    if (v < 0)
      throw ConfigError("config: " + path(key) + " must be non-negative");
    out = static_cast<std::size_t>(v);
  }

  void get_index_list(const char* key, std::vector<std::size_t>& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& arr = j_.at(key);
    if (!arr.is_array())
      throw ConfigError("config: " + path(key) + " must be an array");
    std::vector<std::size_t> parsed;
    parsed.reserve(arr.size());
    for (const json& e : arr) {
      if (!e.is_number_integer() && !e.is_number_unsigned())
        throw ConfigError("config: " + path(key) + " must hold integers");
      const std::int64_t v = e.get<std::int64_t>();
      if (v < 0)
        throw ConfigError("config: " + path(key) + " must be non-negative");
      parsed.push_back(static_cast<std::size_t>(v));
    }
    out = std::move(parsed);
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key()))
        throw ConfigError("config: unknown key \"" + path(item.key().c_str()) +
                          "\"");
    }
  }

  std::string path(const char* key) const {
    return scope_.empty() ? std::string(key) : scope_ + "." + std::string(key);
  }

 private:
  const json& j_;
  std::string scope_;
  std::set<std::string> seen_;
};

std::vector<Task> tasks_from_json(const json& j, const std::string& where) {
  if (j.is_string()) return parse_task_codes(j.get<std::string>());
  if (!j.is_array())
    throw ConfigError("config: " + where +
                      " must be an array of task names or a code string");
  std::vector<Task> out;
  for (const json& e : j) {
    if (!e.is_string())
      throw ConfigError("config: " + where + " entries must be strings");
    const Task t = task_from_name(e.get<std::string>());
    if (contains_task(out, t))
      throw ConfigError("config: duplicate task \"" + e.get<std::string>() +
                        "\" in " + where);
    out.push_back(t);
  }
  return out;
}

std::vector<std::pair<Task, Task>> pairs_from_json(const json& j,
                                                   const std::string& where) {
  if (!j.is_array())
    throw ConfigError("config: " + where + " must be an array of name pairs");
  std::vector<std::pair<Task, Task>> out;
  for (const json& e : j) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() ||
        !e[1].is_string())
      throw ConfigError("config: each entry of " + where +
                        " must be a two-element array of task names");
    out.emplace_back(task_from_name(e[0].get<std::string>()),
                     task_from_name(e[1].get<std::string>()));
  }
  return out;
}

BaseLoss base_loss_from_json(const json& j, const std::string& where) {
  if (!j.is_string())
    throw ConfigError("config: " + where + " must be a string");
  const std::string s = j.get<std::string>();
  if (s == "margin") return BaseLoss::MarginPair;
  if (s == "triplet") return BaseLoss::TripletHinge;
  throw ConfigError("config: " + where + " must be \"margin\" or \"triplet\"");
}

const char* base_loss_name(BaseLoss b) {
  return b == BaseLoss::MarginPair ? "margin" : "triplet";
}

void apply_preset(const std::string& name, LossWeights& w) {
  double rho = 0.0;
  double alpha = 0.0;
  if (name == "cub-ibn") {
    rho = 300.0;
    alpha = 0.15;
  } else if (name == "cars-ibn") {
    rho = 100.0;
    alpha = 0.15;
  } else if (name == "sop-ibn") {
    rho = 150.0;
    alpha = 0.2;
  } else {
    throw ConfigError("config: unknown preset \"" + name +
                      "\" (expected cub-ibn, cars-ibn, or sop-ibn)");
  }
  w.rho_dec = rho;
  w.alpha_shared = alpha;
  w.alpha_intra = alpha;
  w.alpha_dance = alpha;
}

}  // namespace

json to_json(const EncoderConfig& c) {
  return json{{"input_dim", c.input_dim},
              {"hidden_dims", c.hidden_dims},
              {"feature_dim", c.feature_dim}};
}

EncoderConfig encoder_config_from_json(const json& j, EncoderConfig base) {
  StrictObject o(j, "encoder");
  o.get_index("input_dim", base.input_dim);
  o.get_index_list("hidden_dims", base.hidden_dims);
  o.get_index("feature_dim", base.feature_dim);
  o.finish();
  return base;
}

json to_json(const ModelConfig& c) {
  json tasks = json::array();
  for (Task t : c.tasks) tasks.push_back(task_name(t));
  json pairs = json::array();
  for (const auto& p : c.pairs)
    pairs.push_back(json::array({task_name(p.first), task_name(p.second)}));
  return json{{"encoder", to_json(c.encoder)},
              {"embed_dim", c.embed_dim},
              {"tasks", tasks},
              {"pairs", pairs},
              {"beta_init", c.beta_init},
              {"beta_learnable", c.beta_learnable}};
}

ModelConfig model_config_from_json(const json& j, ModelConfig base) {
  StrictObject o(j, "model");
  if (o.has("encoder"))
    base.encoder = encoder_config_from_json(o.raw("encoder"), base.encoder);
  o.get_index("embed_dim", base.embed_dim);
  if (o.has("tasks")) base.tasks = tasks_from_json(o.raw("tasks"), "model.tasks");
  if (o.has("pairs")) base.pairs = pairs_from_json(o.raw("pairs"), "model.pairs");
  o.get("beta_init", base.beta_init);
  o.get("beta_learnable", base.beta_learnable);
  o.finish();
  return base;
}

json to_json(const LossWeights& c) {
  return json{{"alpha_shared", c.alpha_shared},
              {"alpha_intra", c.alpha_intra},
              {"alpha_dance", c.alpha_dance},
              {"rho_dec", c.rho_dec},
              {"gamma", c.gamma},
              {"tau", c.tau},
              {"lambda", c.lambda},
              {"base", base_loss_name(c.base)},
              {"nce_include_positive", c.nce_include_positive},
              {"dance_weighted", c.dance_weighted}};
}

LossWeights loss_weights_from_json(const json& j, LossWeights base) {
  StrictObject o(j, "weights");
  o.get("alpha_shared", base.alpha_shared);
  o.get("alpha_intra", base.alpha_intra);
  o.get("alpha_dance", base.alpha_dance);
  o.get("rho_dec", base.rho_dec);
  o.get("gamma", base.gamma);
  o.get("tau", base.tau);
  o.get("lambda", base.lambda);
  if (o.has("base")) base.base = base_loss_from_json(o.raw("base"), "weights.base");
  o.get("nce_include_positive", base.nce_include_positive);
  o.get("dance_weighted", base.dance_weighted);
  o.finish();
  return base;
}

json to_json(const BatchSpec& c) {
  return json{{"n_classes", c.n_classes}, {"m_per_class", c.m_per_class}};
}

BatchSpec batch_spec_from_json(const json& j, BatchSpec base) {
  StrictObject o(j, "batch");
  o.get_index("n_classes", base.n_classes);
  o.get_index("m_per_class", base.m_per_class);
  o.finish();
  return base;
}

json to_json(const AugmentConfig& c) {
  return json{{"noise_sigma", c.noise_sigma}, {"dropout_rate", c.dropout_rate}};
}

AugmentConfig augment_config_from_json(const json& j, AugmentConfig base) {
  StrictObject o(j, "augment");
  o.get("noise_sigma", base.noise_sigma);
  o.get("dropout_rate", base.dropout_rate);
  o.finish();
  return base;
}

json to_json(const AdamConfig& c) {
  return json{{"lr", c.lr},
              {"weight_decay", c.weight_decay},
              {"beta1", c.beta1},
              {"beta2", c.beta2},
              {"eps", c.eps}};
}

AdamConfig adam_config_from_json(const json& j, AdamConfig base) {
  StrictObject o(j, "optim");
  o.get("lr", base.lr);
  o.get("weight_decay", base.weight_decay);
  o.get("beta1", base.beta1);
  o.get("beta2", base.beta2);
  o.get("eps", base.eps);
  o.finish();
  return base;
}

json to_json(const EvalConfig& c) {
  json weights = json::object();
  for (const auto& [t, w] : c.ensemble_weights) weights[task_name(t)] = w;
  return json{{"ks", c.ks},
              {"kmeans_iters", c.kmeans_iters},
              {"seed", c.seed},
              {"ensemble_weights", weights}};
}

EvalConfig eval_config_from_json(const json& j, EvalConfig base) {
  StrictObject o(j, "eval");
  o.get("ks", base.ks);
  o.get_index("kmeans_iters", base.kmeans_iters);
  o.get("seed", base.seed);
  if (o.has("ensemble_weights")) {
    const json& w = o.raw("ensemble_weights");
    if (!w.is_object())
      throw ConfigError("config: eval.ensemble_weights must be an object");
    std::map<Task, double> parsed;
    for (const auto& item : w.items()) {
      if (!item.value().is_number())
        throw ConfigError("config: eval.ensemble_weights." + item.key() +
                          " must be a number");
      parsed[task_from_name(item.key())] = item.value().get<double>();
    }
    base.ensemble_weights = std::move(parsed);
  }
  o.finish();
  return base;
}

json to_json(const TrainConfig& c) {
  return json{{"model", to_json(c.model)},
              {"weights", to_json(c.weights)},
              {"batch", to_json(c.batch)},
              {"augment", to_json(c.augment)},
              {"optim", to_json(c.optim)},
              {"epochs", c.epochs},
              {"mu", c.mu},
              {"queue_capacity", c.queue_capacity},
              {"lr_decay_epochs", c.lr_decay_epochs},
              {"lr_decay_factor", c.lr_decay_factor},
              {"seed", c.seed},
              {"eval_every", c.eval_every},
              {"eval", to_json(c.eval)}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig base) {
  StrictObject o(j, "");
  if (o.has("preset")) {
    const json& p = o.raw("preset");
    if (!p.is_string())
      throw ConfigError("config: preset must be a string");
    apply_preset(p.get<std::string>(), base.weights);
  }
  if (o.has("model"))
    base.model = model_config_from_json(o.raw("model"), base.model);
  if (o.has("weights"))
    base.weights = loss_weights_from_json(o.raw("weights"), base.weights);
  if (o.has("batch"))
    base.batch = batch_spec_from_json(o.raw("batch"), base.batch);
  if (o.has("augment"))
    base.augment = augment_config_from_json(o.raw("augment"), base.augment);
  if (o.has("optim"))
    base.optim = adam_config_from_json(o.raw("optim"), base.optim);
  o.get_index("epochs", base.epochs);
  o.get("mu", base.mu);
  o.get_index("queue_capacity", base.queue_capacity);
  o.get_index_list("lr_decay_epochs", base.lr_decay_epochs);
  o.get("lr_decay_factor", base.lr_decay_factor);
  o.get("seed", base.seed);
  o.get_index("eval_every", base.eval_every);
  if (o.has("eval")) base.eval = eval_config_from_json(o.raw("eval"), base.eval);
  o.finish();
  return base;
}

json to_json(const SynthConfig& c) {
  return json{{"n_train_classes", c.n_train_classes},
              {"n_test_classes", c.n_test_classes},
              {"samples_per_class", c.samples_per_class},
              {"disc_dim", c.disc_dim},
              {"shared_dim", c.shared_dim},
              {"intra_dim", c.intra_dim},
              {"obs_dim", c.obs_dim},
              {"mixing_depth", c.mixing_depth},
              {"noise_obs", c.noise_obs},
              {"identity_scale", c.identity_scale},
              {"shared_scale", c.shared_scale},
              {"intra_scale", c.intra_scale},
              {"seed", c.seed}};
}

SynthConfig synth_config_from_json(const json& j, SynthConfig base) {
  StrictObject o(j, "synth");
  o.get_index("n_train_classes", base.n_train_classes);
  o.get_index("n_test_classes", base.n_test_classes);
  o.get_index("samples_per_class", base.samples_per_class);
  o.get_index("disc_dim", base.disc_dim);
  o.get_index("shared_dim", base.shared_dim);
  o.get_index("intra_dim", base.intra_dim);
  o.get_index("obs_dim", base.obs_dim);
  o.get_index("mixing_depth", base.mixing_depth);
  o.get("noise_obs", base.noise_obs);
  o.get("identity_scale", base.identity_scale);
  o.get("shared_scale", base.shared_scale);
  o.get("intra_scale", base.intra_scale);
  o.get("seed", base.seed);
  o.finish();
  return base;
}

json to_json(const RunConfig& c) {
  json j = to_json(c.train);
  j["synth"] = to_json(c.synth);
  return j;
}

RunConfig run_config_from_json(const json& j, RunConfig base) {
  if (!j.is_object())
    throw ConfigError("config: the run config must be a JSON object");
  json train_part = j;
  if (j.contains("synth")) {
    base.synth = synth_config_from_json(j.at("synth"), base.synth);
    train_part.erase("synth");
  }
  base.train = train_config_from_json(train_part, base.train);
  return base;
}

RunConfig parse_run_config(const std::string& text, RunConfig base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset to line/column for a usable message.
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t stop =
        e.byte > 0 ? std::min<std::size_t>(e.byte - 1, text.size())
                   : std::size_t{0};
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream msg;
    msg << "config: JSON parse error at line " << line << ", column " << col
        << ": " << e.what();
    throw ConfigError(msg.str());
  }
  return run_config_from_json(j, std::move(base));
}

RunConfig load_run_config(const std::string& path, RunConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("config: cannot open \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("config: failed reading \"" + path + "\"");
  return parse_run_config(buf.str(), std::move(base));
}

json to_json(const MetricSet& m) {
  json recall = json::object();
  for (const auto& [k, v] : m.recall) recall[std::to_string(k)] = v;
  return json{{"recall", recall}, {"spectral_decay", m.spectral}};
}

json to_json(const EvalReport& r) {
  json heads = json::array();
  for (const auto& [t, ms] : r.per_head) {
    json h = to_json(ms);
    h["task"] = task_name(t);
    heads.push_back(std::move(h));
  }
  return json{{"per_head", heads},
              {"ensemble", to_json(r.ensemble)},
              {"nmi", r.nmi},
              {"n_samples", r.n_samples},
              {"head_dim", r.head_dim},
              {"ensemble_dim", r.ensemble_dim}};
}

json to_json(const TrainHistory& h) {
  json steps = json::array();
  for (const StepRecord& s : h.steps) {
    json rec{{"epoch", s.epoch}, {"step", s.step}, {"total", s.losses.total},
             {"aux_total", s.losses.aux_total}};
    if (s.losses.disc) rec["disc"] = *s.losses.disc;
    if (s.losses.shared) rec["shared"] = *s.losses.shared;
    if (s.losses.intra) rec["intra"] = *s.losses.intra;
    if (s.losses.dance) rec["dance"] = *s.losses.dance;
    if (!s.losses.pair_costs.empty()) rec["pair_costs"] = s.losses.pair_costs;
    steps.push_back(std::move(rec));
  }
  json evals = json::array();
  for (const EvalSnapshot& e : h.evals)
    evals.push_back(json{{"epoch", e.epoch}, {"report", to_json(e.report)}});
  return json{{"seed", h.seed}, {"steps", steps}, {"evals", evals}};
}

}  // namespace diva
