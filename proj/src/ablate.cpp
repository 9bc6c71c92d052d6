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

#include "diva/ablate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>
#include <utility>

#include "diva/errors.hpp"
#include "diva/mining.hpp"
#include "diva/objectives.hpp"
#include "diva/queue.hpp"
#include "diva/rng.hpp"
#include "diva/task.hpp"

namespace diva {
namespace {

// One network that knows only a single task, trained outside the shared
// trainer (whose contract requires the discriminative head). Mirrors
// train_step's phase order for the one head it owns.
class SingleTaskRun {
 public:
  SingleTaskRun(Task t, const TrainConfig& base, std::uint64_t seed)
      : task_(t), cfg_(base), rng_(seed) {
    cfg_.model.tasks = {t};
    cfg_.model.pairs.clear();
    cfg_.seed = seed;
    // The lone task carries the whole objective.
    cfg_.weights.alpha_shared = t == Task::Shared ? 1.0 : 0.0;
    cfg_.weights.alpha_intra = t == Task::Intra ? 1.0 : 0.0;
    cfg_.weights.alpha_dance = t == Task::Dance ? 1.0 : 0.0;
    cfg_.weights.rho_dec = 0.0;
    cfg_.model.validate();
    cfg_.weights.validate();
    validate_batch_spec(cfg_.batch, cfg_.model.tasks);
    model_.emplace(cfg_.model, rng_);
    opt_ = AdamState::like(model_->trainable());
    if (t == Task::Dance)
      queue_.emplace(cfg_.queue_capacity, cfg_.model.embed_dim, rng_);
    lr_ = cfg_.optim.lr;
  }

  Task task() const { return task_; }
  Model& model() { return *model_; }

  void fit(const Dataset& ds) {
    std::vector<std::vector<std::size_t>> by_class(ds.n_classes());
    for (const auto& [label, idx] : indices_by_class(ds, kTrainSplit))
      by_class[static_cast<std::size_t>(label)] = idx;
    const std::size_t batch_size = cfg_.batch.n_classes * cfg_.batch.m_per_class;
    const std::size_t train_count = split_indices(ds, kTrainSplit).size();
    if (train_count < batch_size)
      throw ConfigError("separate models: train split smaller than one batch");
    const std::size_t steps = train_count / batch_size;

    for (std::size_t epoch = 1; epoch <= cfg_.epochs; ++epoch) {
      if (std::find(cfg_.lr_decay_epochs.begin(), cfg_.lr_decay_epochs.end(),
                    epoch) != cfg_.lr_decay_epochs.end())
        lr_ *= cfg_.lr_decay_factor;
      for (std::size_t s = 0; s < steps; ++s) {
        const std::vector<std::size_t> idx =
            build_batch(by_class, cfg_.batch, rng_);
        step(gather_rows(ds.features, idx), gather_labels(ds.labels, idx));
      }
    }
  }

 private:
  void step(const Tensor& x, const std::vector<int>& labels) {
    Model& m = *model_;
    StepInputs in;
    in.x = x;
    in.labels = labels;
    if (task_ != Task::Dance) {
      in.triplets[task_] =
          mine_triplets(task_, m.embed(task_, x), labels, cfg_.weights.lambda,
                        rng_);
    }
    Tensor shadow_keys;
    if (task_ == Task::Dance) {
      in.x_aug = augment(x, cfg_.augment, rng_);
      shadow_keys = m.shadow_embed(in.x_aug);
      in.negatives = std::make_shared<const Tensor>(queue_->snapshot());
    }

    Tape tape;
    ModelGraph g = ModelGraph::lease(tape, m);
    LossBreakdown bd;
    Var total = joint_loss(tape, g, in, cfg_.weights, &bd);
    if (!total.valid())
      throw Error("separate models: the task produced no loss term");
    if (!std::isfinite(bd.total)) {
      std::ostringstream msg;
      msg << "separate models (" << task_name(task_) << "): non-finite loss "
          << bd.total;
      throw DivergenceError(msg.str());
    }
    tape.backward(total);
    std::vector<Tensor> grads;
    grads.reserve(g.trainable_vars.size());
    for (Var pv : g.trainable_vars) grads.push_back(tape.grad(pv));
    adam_step(m.trainable(), grads, opt_, cfg_.optim, lr_);
    m.momentum_step(cfg_.mu);
    if (task_ == Task::Dance) queue_->push_rows(shadow_keys);
  }

  Task task_;
  TrainConfig cfg_;
  Rng rng_;
  std::optional<Model> model_;
  AdamState opt_;
  std::optional<MemoryQueue> queue_;
  double lr_ = 0.0;
};

MetricSet metrics_of(const Tensor& emb, const std::vector<int>& labels,
                     const std::vector<int>& ks) {
  MetricSet ms;
  ms.recall = recall_at_k(emb, labels, ks);
  ms.spectral = spectral_decay(emb);
  return ms;
}

}  // namespace

EvalReport train_and_evaluate(const TrainConfig& cfg, const Dataset& ds) {
  TrainerState st = TrainerState::init(cfg);
  TrainConfig quiet = cfg;
  quiet.eval_every = 0;  // exactly one evaluation, after training
  fit(st, ds, quiet);
  return evaluate(st.model, ds, cfg.eval);
}

std::vector<std::string> ablation_variants() {
  return {"D",      "D,S",    "D,I",    "D,Da",
          "D,S,I",  "D,S,Da", "D,I,Da", "D,S,I,Da",
          "no-decorrelation", "separate-models"};
}

EvalReport run_ablation_variant(const std::string& variant, TrainConfig base,
                                const Dataset& ds, std::uint64_t seed) {
  base.seed = seed;
  if (variant == "separate-models") return train_separate_models(base, ds, seed);
  if (variant == "no-decorrelation") {
    base.model.tasks = {Task::Disc, Task::Shared, Task::Intra, Task::Dance};
    base.model.pairs.clear();
    base.weights.rho_dec = 0.0;
    return train_and_evaluate(base, ds);
  }
  base.model.tasks = parse_task_codes(variant);
  base.model.pairs.clear();  // the default pair set follows the subset
  return train_and_evaluate(base, ds);
}

EvalReport train_separate_models(const TrainConfig& base, const Dataset& ds,
                                 std::uint64_t seed) {
  validate_dataset(ds);
  if (ds.feature_dim() != base.model.encoder.input_dim)
    throw ConfigError("separate models: dataset feature dim does not match "
                      "the encoder input dim");
  if (base.model.tasks.empty())
    throw ConfigError("separate models: no active tasks");

  std::vector<std::unique_ptr<SingleTaskRun>> runs;
  for (std::size_t k = 0; k < base.model.tasks.size(); ++k) {
    runs.push_back(std::make_unique<SingleTaskRun>(
        base.model.tasks[k], base, seed * base.model.tasks.size() + k));
    runs.back()->fit(ds);
  }

  const std::vector<std::size_t> test_idx = split_indices(ds, kTestSplit);
  if (test_idx.empty())
    throw ConfigError("separate models: the dataset has no test split");
  const Tensor x = gather_rows(ds.features, test_idx);
  const std::vector<int> labels = gather_labels(ds.labels, test_idx);

  EvalReport report;
  report.n_samples = test_idx.size();
  report.head_dim = base.model.embed_dim;
  report.ensemble_dim = base.model.embed_dim * runs.size();
  Tensor ensemble = Tensor::zeros({test_idx.size(), report.ensemble_dim});
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const Tensor emb = runs[k]->model().embed(runs[k]->task(), x);
    report.per_head.emplace_back(runs[k]->task(),
                                 metrics_of(emb, labels, base.eval.ks));
    // Same weighted concatenation the shared-encoder ensemble uses.
    const auto it = base.eval.ensemble_weights.find(runs[k]->task());
    const double w = (it == base.eval.ensemble_weights.end()) ? 1.0 : it->second;
    for (std::size_t r = 0; r < test_idx.size(); ++r)
      for (std::size_t j = 0; j < base.model.embed_dim; ++j)
        ensemble.at(r, k * base.model.embed_dim + j) = w * emb.at(r, j);
  }
  report.ensemble = metrics_of(ensemble, labels, base.eval.ks);

  std::map<int, int> distinct;
  for (int l : labels) distinct[l] = 1;
  const std::vector<int> assign =
      kmeans(ensemble, distinct.size(), base.eval.seed, base.eval.kmeans_iters);
  report.nmi = nmi(assign, labels);
  return report;
}

std::vector<AblationCell> run_ablation(const TrainConfig& base,
                                       const Dataset& ds,
                                       const std::vector<std::uint64_t>& seeds,
                                       std::size_t threads,
                                       std::ostream* progress) {
  if (seeds.empty()) throw ConfigError("ablation: need at least one seed");
  const std::vector<std::string> variants = ablation_variants();
  std::vector<AblationCell> cells(variants.size() * seeds.size());
  for (std::size_t v = 0; v < variants.size(); ++v)
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      cells[v * seeds.size() + s].variant = variants[v];
      cells[v * seeds.size() + s].seed = seeds[s];
    }

  std::atomic<std::size_t> next{0};
  std::mutex io_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      AblationCell& cell = cells[i];
      try {
        cell.report = run_ablation_variant(cell.variant, base, ds, cell.seed);
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
      }
      if (progress) {
        std::lock_guard<std::mutex> lock(io_mutex);
        *progress << cell.variant << " seed " << cell.seed << ": "
                  << (cell.ok ? "ok" : cell.error) << '\n';
      }
    }
  };

  const std::size_t n_workers =
      std::max<std::size_t>(1, std::min(threads, cells.size()));
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  return cells;
}

namespace {

// Quote a field when it holds a comma or a quote; inner quotes doubled.
std::string csv_field(const std::string& s) {
  if (s.find(',') == std::string::npos && s.find('"') == std::string::npos)
    return s;
  std::string quoted = "\"";
  for (char c : s) {
    quoted += c;
    if (c == '"') quoted += '"';
  }
  quoted += "\"";
  return quoted;
}

}  // namespace

std::string ablation_csv(const std::vector<AblationCell>& cells,
                         const std::vector<int>& ks) {
  std::string out = "variant,seed,status";
  for (int k : ks) out += ",recall@" + std::to_string(k);
  out += ",nmi,spectral_decay,error\n";

  char num[64];
  for (const AblationCell& cell : cells) {
    out += csv_field(cell.variant) + "," + std::to_string(cell.seed) + ",";
    out += cell.ok ? "ok" : "failed";
    if (cell.ok) {
      for (int k : ks) {
        std::snprintf(num, sizeof(num), ",%.17g",
                      cell.report.ensemble.recall.at(k));
        out += num;
      }
      std::snprintf(num, sizeof(num), ",%.17g,%.17g,", cell.report.nmi,
                    cell.report.ensemble.spectral);
      out += num;
    } else {
      for (std::size_t i = 0; i < ks.size() + 2; ++i) out += ",";
      out += csv_field(cell.error);
    }
    out += "\n";
  }
  return out;
}

}  // namespace diva
