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

#ifndef DIVA_GRADCHECK_HPP_
#define DIVA_GRADCHECK_HPP_

#include <functional>
#include <span>
#include <vector>

#include "diva/tensor.hpp"

namespace diva {

struct FiniteDiffReport {
  double max_rel_err = 0.0;
  std::size_t checked = 0;
  // Coordinates sitting on a hinge/clamp kink, detected by disagreement of
  // the one-sided difference quotients and excluded from the comparison.
  std::size_t skipped_kinks = 0;
};

// Central-difference check of analytic gradients. `fn` must be a
// deterministic scalar function of the current contents of `params`;
// `analytic` holds one gradient tensor per parameter, in the same order.
// Per coordinate the error is |analytic - central| / max(1, |analytic|);
// the report carries the max over all checked coordinates. Parameter values
// are perturbed in place and restored exactly.
FiniteDiffReport finite_diff_check(std::span<Tensor* const> params,
                                   const std::function<double()>& fn,
                                   const std::vector<Tensor>& analytic,
                                   double h = 1e-5);

}  // namespace diva

#endif  // DIVA_GRADCHECK_HPP_
