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

#ifndef DIVA_OBJECTIVES_HPP_
#define DIVA_OBJECTIVES_HPP_

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "diva/mining.hpp"
#include "diva/model.hpp"
#include "diva/tape.hpp"
#include "diva/task.hpp"

namespace diva {

enum class BaseLoss { MarginPair, TripletHinge };

// Scalar weights of the joint objective. The margin boundary itself lives
// with the model parameters (it may be learnable); only its usage rules are
// here.
struct LossWeights {
  double alpha_shared = 0.15;
  double alpha_intra = 0.15;
  double alpha_dance = 0.15;
  double rho_dec = 300.0;  // one value for every decorrelation pair
  double gamma = 0.2;
  double tau = 0.1;
  double lambda = 1.0;
  BaseLoss base = BaseLoss::MarginPair;
  bool nce_include_positive = true;
  // When false the contrastive term drops the distance weighting and
  // becomes the plain noise-contrastive loss (all negative weights 1).
  bool dance_weighted = true;

  void validate() const;
};

// --- ranking hinges, plain and taped ----------------------------------------
// [d_ap - d_an + gamma]_+
double triplet_hinge(double d_ap, double d_an, double gamma);
Var triplet_hinge(Tape& tape, Var d_ap, Var d_an, double gamma);

// [gamma + d_ap - beta]_+ + [gamma + beta - d_an]_+; beta receives gradients
// whenever it is a trainable leaf.
double margin_pair_loss(double d_ap, double d_an, double beta, double gamma);
Var margin_pair_loss(Tape& tape, Var d_ap, Var d_an, Var beta, double gamma);

// Mean of the configured base loss over the triplet list, distances taken
// between rows of `embeddings` [B, D]. Returns an invalid Var on an empty
// list (the task is skipped this step).
Var task_loss(Tape& tape, const std::vector<Triplet>& triplets, Var embeddings,
              const LossWeights& w, Var beta);

// --- contrastive losses ------------------------------------------------------
// -log( exp(a.p/tau) / sum_n exp(a.n_k/tau) ), negatives read from a constant
// snapshot so no gradient reaches stored vectors. With include_positive the
// denominator also carries the positive term (bounded, >= 0 everywhere).
Var nce_pair_loss(Tape& tape, Var anchor, Var positive,
                  std::shared_ptr<const Tensor> negatives, double tau,
                  bool include_positive);

// Maps a distance to (weight, d weight / d distance).
using DistanceWeightFn = std::function<std::pair<double, double>(double)>;

// nce_pair_loss with each negative logit scaled inside the exponential by
// wfn(||anchor - negative||); the positive logit stays unscaled. Gradients
// flow through the weight map's active branch.
Var dance_pair_loss(Tape& tape, Var anchor, Var positive,
                    std::shared_ptr<const Tensor> negatives, double tau,
                    const DistanceWeightFn& wfn, bool include_positive);
// Weight map = inverse-density sampling weight for embeddings in R^dim,
// capped at lambda.
Var dance_pair_loss(Tape& tape, Var anchor, Var positive,
                    std::shared_ptr<const Tensor> negatives, double tau,
                    double lambda, std::size_t dim, bool include_positive = true);

// Batch means over (anchor, positive) rows of two [B, D] embedding nodes.
Var nce_loss(Tape& tape, Var anchors, Var positives,
             std::shared_ptr<const Tensor> negatives, double tau,
             bool include_positive);
Var dance_loss(Tape& tape, Var anchors, Var positives,
               std::shared_ptr<const Tensor> negatives, double tau, double lambda,
               std::size_t dim, bool include_positive = true);

// --- decorrelation ------------------------------------------------------------
// c = || R(ea) ⊙ psi(R(eb)) ||^2 averaged over batch rows, with R the
// gradient-reversal identity. Sign conventions under the joint loss
// L = ... - rho * c, minimized by gradient descent:
//
//   parameter          path to c         effective update direction
//   ---------          ---------         --------------------------
//   psi weights        not reversed      ascend c (sharpen the probe)
//   head a, encoder    through R(ea)     descend c (decorrelate)
//   head b, encoder    through R(eb)     descend c (decorrelate)
//
// `psi` applies the leased two-layer map of `g` at `pair_idx`.
//
// R intentionally decouples backward() from the true derivative of the
// forward value, so finite differences cannot match it sign-for-sign.
// `reverse = false` swaps R for the identity: the score then differentiates
// exactly, which is what gradient verification runs use. Training always
// keeps the reversal. The flip itself is covered by an exact property:
// embedding-branch gradients with R equal the negation of those without.
Var decorrelation_score(Tape& tape, const ModelGraph& g, std::size_t pair_idx,
                        Var ea, Var eb, bool reverse = true);

// --- the joint objective -------------------------------------------------------
// Everything randomness-dependent (batch draw, mined triplets, augmented
// views, queue snapshot) is assembled by the trainer beforehand, so the
// joint loss is a deterministic function of the parameters — which keeps
// finite-difference checks well-defined.
struct StepInputs {
  Tensor x;                  // [B, F] raw inputs
  std::vector<int> labels;   // per row
  std::map<Task, std::vector<Triplet>> triplets;  // per active ranking task
  Tensor x_aug;              // [B, F] augmented views (contrastive positives)
  std::shared_ptr<const Tensor> negatives;        // queue snapshot [C, D]
};

struct LossBreakdown {
  std::optional<double> disc, shared, intra, dance;
  std::vector<double> pair_costs;  // raw c per decorrelation pair
  double aux_total = 0.0;          // total - disc term, before adding
  double total = 0.0;
};

// L = L_disc + a1 L_shared + a2 L_intra + a3 L_dance - rho * sum_pairs c.
// Terms with zero weight or an empty triplet list are skipped entirely and
// contribute exactly nothing; heads are embedded only when some surviving
// term needs them. Returns an invalid Var when no term survives.
// `reverse_decor` forwards to decorrelation_score (see its note on
// verification versus training wiring).
Var joint_loss(Tape& tape, const ModelGraph& g, const StepInputs& in,
               const LossWeights& w, LossBreakdown* breakdown,
               bool reverse_decor = true);

}  // namespace diva

#endif  // DIVA_OBJECTIVES_HPP_
