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

#ifndef DIVA_TAPE_HPP_
#define DIVA_TAPE_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "diva/tensor.hpp"

namespace diva {

// Handle to a node on a Tape. Only meaningful together with the tape that
// produced it.
struct Var {
  std::uint32_t id = UINT32_MAX;
  bool valid() const { return id != UINT32_MAX; }
};

// Reverse-mode automatic differentiation over a linear tape of operation
// records. A tape owns every intermediate value of one forward pass; the
// graph is rebuilt from scratch each training step. Construction order is a
// topological order, so backward() is a single reverse sweep that visits
// each node exactly once. Gradient accumulators are (re)zeroed at the start
// of every backward() call.
//
// A tape has a single owner and must not be shared across threads; distinct
// tapes on distinct threads are safe.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Differentiable input (parameter or data). The tensor is copied in.
  Var leaf(Tensor value);

  // --- elementwise / arithmetic -------------------------------------------
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);  // Hadamard
  Var scale(Var a, double c);
  Var add_scalar(Var a, double c);
  Var relu(Var a);

  // Elementwise y_i = f(x_i) with caller-supplied (value, derivative) pairs.
  using PointwiseFn = std::function<std::pair<double, double>(double)>;
  Var unary_pointwise(Var a, PointwiseFn fn);

  // --- linear algebra ------------------------------------------------------
  // x:[F] or [B,F], w:[F,G], b:[G] -> [G] or [B,G]
  Var linear(Var x, Var w, Var b);
  // Row i of a rank-2 node, as a rank-1 node.
  Var row(Var m, std::size_t i);
  Var dot(Var a, Var b);
  Var sum(Var a);
  Var mean(Var a);
  Var square_norm(Var a);

  // --- geometry ------------------------------------------------------------
  // Unit-normalize a rank-1 vector; errors if the norm is below 1e-12.
  Var l2_normalize(Var a);
  // Unit-normalize each row of a rank-2 matrix.
  Var l2_normalize_rows(Var a);
  // Euclidean distance between two rank-1 vectors.
  Var distance(Var a, Var b);
  // Identity forward; negated gradient backward.
  Var gradient_reversal(Var a);

  // --- constant-matrix ops (no gradient flows into m) ----------------------
  // y = m * x, m:[C,D] captured by value, x:[D] -> [C]
  Var matvec_const(std::shared_ptr<const Tensor> m, Var x);
  // y_i = || x - m_i ||, m:[C,D], x:[D] -> [C]
  Var cdist_const(std::shared_ptr<const Tensor> m, Var x);

  // --- reductions for losses -----------------------------------------------
  Var concat(Var a, Var b);  // rank-1 concatenation
  Var logsumexp(Var a);      // rank-1 -> scalar, max-shifted

  // Sets every gradient accumulator to zero, seeds d(loss)/d(loss) = 1 and
  // replays the tape in reverse. `loss` must be scalar.
  void backward(Var loss);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  const Tensor& grad(Var v) const { return nodes_[v.id].grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool touched = false;  // received any gradient this backward pass
    // Propagates this node's gradient into its inputs.
    std::function<void(Tape&, const Tensor&)> backprop;
  };

  Var push(Tensor value, std::function<void(Tape&, const Tensor&)> backprop);
  void accumulate(Var v, std::size_t offset, const double* g, std::size_t n);
  void check(Var v) const;

  std::vector<Node> nodes_;
};

}  // namespace diva

#endif  // DIVA_TAPE_HPP_
