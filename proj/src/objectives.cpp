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

#include "diva/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "diva/errors.hpp"

namespace diva {

void LossWeights::validate() const {
  if (alpha_shared < 0 || alpha_intra < 0 || alpha_dance < 0) {
    throw ConfigError("task weights alpha must be non-negative");
  }
  if (rho_dec < 0) throw ConfigError("rho_dec must be non-negative");
  if (gamma < 0) throw ConfigError("margin gamma must be non-negative");
  if (tau <= 0) throw ConfigError("temperature tau must be positive");
  if (lambda <= 0) throw ConfigError("weight cutoff lambda must be positive");
}

double triplet_hinge(double d_ap, double d_an, double gamma) {
  return std::max(0.0, d_ap - d_an + gamma);
}

Var triplet_hinge(Tape& tape, Var d_ap, Var d_an, double gamma) {
  return tape.relu(tape.add_scalar(tape.sub(d_ap, d_an), gamma));
}

double margin_pair_loss(double d_ap, double d_an, double beta, double gamma) {
  // Same association as the taped build below, so both agree bitwise.
  return std::max(0.0, (gamma + d_ap) - beta) + std::max(0.0, (gamma + beta) - d_an);
}

Var margin_pair_loss(Tape& tape, Var d_ap, Var d_an, Var beta, double gamma) {
  Var pull = tape.relu(tape.sub(tape.add_scalar(d_ap, gamma), beta));
  Var push = tape.relu(tape.sub(tape.add_scalar(beta, gamma), d_an));
  return tape.add(pull, push);
}

Var task_loss(Tape& tape, const std::vector<Triplet>& triplets, Var embeddings,
              const LossWeights& w, Var beta) {
  if (triplets.empty()) return Var{};
  Var acc{};
  for (const Triplet& t : triplets) {
    Var a = tape.row(embeddings, t.a);
    Var d_ap = tape.distance(a, tape.row(embeddings, t.p));
    Var d_an = tape.distance(a, tape.row(embeddings, t.n));
    Var term = (w.base == BaseLoss::MarginPair)
                   ? margin_pair_loss(tape, d_ap, d_an, beta, w.gamma)
                   : triplet_hinge(tape, d_ap, d_an, w.gamma);
    acc = acc.valid() ? tape.add(acc, term) : term;
  }
  return tape.scale(acc, 1.0 / static_cast<double>(triplets.size()));
}

namespace {

void check_negatives(const std::shared_ptr<const Tensor>& negatives, double tau) {
  if (!negatives || negatives->rank() != 2 || negatives->rows() == 0) {
    throw Error("contrastive loss: empty negative set");
  }
  if (tau <= 0) throw ConfigError("temperature tau must be positive");
}

}  // namespace

Var nce_pair_loss(Tape& tape, Var anchor, Var positive,
                  std::shared_ptr<const Tensor> negatives, double tau,
                  bool include_positive) {
  check_negatives(negatives, tau);
  Var pos_logit = tape.scale(tape.dot(anchor, positive), 1.0 / tau);
  Var neg_logits = tape.scale(tape.matvec_const(negatives, anchor), 1.0 / tau);
  Var pool = include_positive ? tape.concat(neg_logits, pos_logit) : neg_logits;
  return tape.sub(tape.logsumexp(pool), pos_logit);
}

Var dance_pair_loss(Tape& tape, Var anchor, Var positive,
                    std::shared_ptr<const Tensor> negatives, double tau,
                    const DistanceWeightFn& wfn, bool include_positive) {
  check_negatives(negatives, tau);
  Var pos_logit = tape.scale(tape.dot(anchor, positive), 1.0 / tau);
  Var dots = tape.matvec_const(negatives, anchor);
  Var dists = tape.cdist_const(negatives, anchor);
  Var weights = tape.unary_pointwise(dists, wfn);
  Var neg_logits = tape.scale(tape.mul(weights, dots), 1.0 / tau);
  Var pool = include_positive ? tape.concat(neg_logits, pos_logit) : neg_logits;
  return tape.sub(tape.logsumexp(pool), pos_logit);
}

Var dance_pair_loss(Tape& tape, Var anchor, Var positive,
                    std::shared_ptr<const Tensor> negatives, double tau,
                    double lambda, std::size_t dim, bool include_positive) {
  DistanceWeightFn wfn = [lambda, dim](double d) {
    return sampling_weight_grad(d, dim, lambda);
  };
  return dance_pair_loss(tape, anchor, positive, std::move(negatives), tau, wfn,
                         include_positive);
}

namespace {

template <typename PerRow>
Var batch_mean(Tape& tape, Var anchors, Var positives, PerRow&& per_row) {
  // Taking the row count up front: node references do not survive pushes.
  if (tape.value(anchors).rank() != 2 ||
      !tape.value(positives).same_shape(tape.value(anchors))) {
    throw Error("contrastive loss: anchors/positives must be matching [B,D]");
  }
  const std::size_t rows = tape.value(anchors).rows();
  Var acc{};
  for (std::size_t i = 0; i < rows; ++i) {
    Var term = per_row(tape.row(anchors, i), tape.row(positives, i));
    acc = acc.valid() ? tape.add(acc, term) : term;
  }
  return tape.scale(acc, 1.0 / static_cast<double>(rows));
}

}  // namespace

Var nce_loss(Tape& tape, Var anchors, Var positives,
             std::shared_ptr<const Tensor> negatives, double tau,
             bool include_positive) {
  return batch_mean(tape, anchors, positives, [&](Var a, Var p) {
    return nce_pair_loss(tape, a, p, negatives, tau, include_positive);
  });
}

Var dance_loss(Tape& tape, Var anchors, Var positives,
               std::shared_ptr<const Tensor> negatives, double tau, double lambda,
               std::size_t dim, bool include_positive) {
  return batch_mean(tape, anchors, positives, [&](Var a, Var p) {
    return dance_pair_loss(tape, a, p, negatives, tau, lambda, dim, include_positive);
  });
}

Var decorrelation_score(Tape& tape, const ModelGraph& g, std::size_t pair_idx,
                        Var ea, Var eb, bool reverse) {
  if (!tape.value(eb).same_shape(tape.value(ea))) {
    throw Error("decorrelation: embeddings must share a shape");
  }
  const double rows = (tape.value(ea).rank() == 2)
                          ? static_cast<double>(tape.value(ea).rows())
                          : 1.0;
  Var ra = reverse ? tape.gradient_reversal(ea) : ea;
  Var rb = reverse ? tape.gradient_reversal(eb) : eb;
  Var probe = g.psi_forward(pair_idx, rb);
  Var c_sum = tape.square_norm(tape.mul(ra, probe));
  return tape.scale(c_sum, 1.0 / rows);
}

Var joint_loss(Tape& tape, const ModelGraph& g, const StepInputs& in,
               const LossWeights& w, LossBreakdown* breakdown, bool reverse_decor) {
  w.validate();
  const Model& model = *g.model;
  const auto& pairs = model.config().pairs;

  auto ranking_live = [&](Task t, double alpha) {
    auto it = in.triplets.find(t);
    const bool mined = it != in.triplets.end() && !it->second.empty();
    return mined && alpha > 0 && model.has_task(t);
  };
  const bool disc_live = [&] {
    auto it = in.triplets.find(Task::Disc);
    return it != in.triplets.end() && !it->second.empty() && model.has_task(Task::Disc);
  }();
  const bool shared_live = ranking_live(Task::Shared, w.alpha_shared);
  const bool intra_live = ranking_live(Task::Intra, w.alpha_intra);
  const bool dance_live = w.alpha_dance > 0 && model.has_task(Task::Dance) &&
                          in.negatives && in.x_aug.size() == in.x.size();
  const bool pairs_live = w.rho_dec > 0 && !pairs.empty();

  std::vector<char> needed(kAllTasks.size(), 0);
  auto mark = [&](Task t) { needed[static_cast<std::size_t>(t)] = 1; };
  if (disc_live) mark(Task::Disc);
  if (shared_live) mark(Task::Shared);
  if (intra_live) mark(Task::Intra);
  if (dance_live) mark(Task::Dance);
  if (pairs_live) {
    for (const auto& [a, b] : pairs) {
      mark(a);
      mark(b);
    }
  }

  Var x = tape.leaf(in.x);
  Var f = g.encode(x);
  std::map<Task, Var> emb;
  for (Task t : model.config().tasks) {
    if (needed[static_cast<std::size_t>(t)]) emb[t] = g.embed_features(t, f);
  }

  LossBreakdown bd;
  std::optional<Var> disc_term;
  if (disc_live) {
    Var l = task_loss(tape, in.triplets.at(Task::Disc), emb.at(Task::Disc), w,
                      g.beta_var);
    disc_term = l;
    bd.disc = tape.value(l)[0];
  }

  // Auxiliary chain in fixed order: shared, intra, dance, then pair costs.
  std::optional<Var> aux;
  auto add_aux = [&](Var v) { aux = aux ? tape.add(*aux, v) : v; };
  if (shared_live) {
    Var l = task_loss(tape, in.triplets.at(Task::Shared), emb.at(Task::Shared), w,
                      g.beta_var);
    bd.shared = tape.value(l)[0];
    add_aux(tape.scale(l, w.alpha_shared));
  }
  if (intra_live) {
    Var l = task_loss(tape, in.triplets.at(Task::Intra), emb.at(Task::Intra), w,
                      g.beta_var);
    bd.intra = tape.value(l)[0];
    add_aux(tape.scale(l, w.alpha_intra));
  }
  if (dance_live) {
    Var ea = g.embed(Task::Dance, tape.leaf(in.x_aug));
    Var l = w.dance_weighted
                ? dance_loss(tape, emb.at(Task::Dance), ea, in.negatives, w.tau,
                             w.lambda, model.config().embed_dim,
                             w.nce_include_positive)
                : nce_loss(tape, emb.at(Task::Dance), ea, in.negatives, w.tau,
                           w.nce_include_positive);
    bd.dance = tape.value(l)[0];
    add_aux(tape.scale(l, w.alpha_dance));
  }
  if (pairs_live) {
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      Var c = decorrelation_score(tape, g, p, emb.at(pairs[p].first),
                                  emb.at(pairs[p].second), reverse_decor);
      bd.pair_costs.push_back(tape.value(c)[0]);
      add_aux(tape.scale(c, -w.rho_dec));
    }
  }

  Var total{};
  if (disc_term && aux) {
    total = tape.add(*disc_term, *aux);
  } else if (disc_term) {
    total = *disc_term;
  } else if (aux) {
    total = *aux;
  }
  bd.aux_total = aux ? tape.value(*aux)[0] : 0.0;
  bd.total = total.valid() ? tape.value(total)[0] : 0.0;
  if (breakdown) *breakdown = bd;
  return total;
}

}  // namespace diva
