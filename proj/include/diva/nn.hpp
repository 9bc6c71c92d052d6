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

#ifndef DIVA_NN_HPP_
#define DIVA_NN_HPP_

#include <cstddef>
#include <vector>

#include "diva/rng.hpp"
#include "diva/tensor.hpp"

namespace diva {

struct LinearLayer {
  Tensor w;  // [in, out]
  Tensor b;  // [out]
};

// Feed-forward stack: linear layers with a rectifier between them and no
// nonlinearity after the last.
struct Mlp {
  std::vector<LinearLayer> layers;
};

// Zero-mean uniform init scaled by 1/sqrt(fan_in); zero biases.
LinearLayer init_linear(std::size_t in, std::size_t out, Rng& rng);
Mlp init_mlp(std::size_t in, const std::vector<std::size_t>& hidden,
             std::size_t out, Rng& rng);

// Plain forward passes (no tape, no gradients). x is [in] or [B, in].
// These back inference, the momentum shadow and the serial checks of the
// taped forward path.
Tensor linear_forward(const LinearLayer& l, const Tensor& x);
Tensor mlp_forward(const Mlp& m, const Tensor& x);

// Unit-normalizes a vector or each row of a matrix in place; errors on a
// norm below 1e-12.
void normalize_rows(Tensor& x);

}  // namespace diva

#endif  // DIVA_NN_HPP_
