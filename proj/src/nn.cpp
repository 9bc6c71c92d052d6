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

#include "diva/nn.hpp"

#include <cmath>

#include "diva/errors.hpp"
#include "diva/kernels.hpp"

namespace diva {

LinearLayer init_linear(std::size_t in, std::size_t out, Rng& rng) {
  if (in == 0 || out == 0) throw ConfigError("init_linear: dims must be >= 1");
  LinearLayer l{Tensor({in, out}), Tensor({out})};
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (double& v : l.w.data) v = rng.uniform(-bound, bound);
  return l;
}

Mlp init_mlp(std::size_t in, const std::vector<std::size_t>& hidden,
             std::size_t out, Rng& rng) {
  Mlp m;
  std::size_t prev = in;
  for (std::size_t h : hidden) {
    m.layers.push_back(init_linear(prev, h, rng));
    prev = h;
  }
  m.layers.push_back(init_linear(prev, out, rng));
  return m;
}

Tensor linear_forward(const LinearLayer& l, const Tensor& x) {
  const std::size_t in = l.w.rows();
  const std::size_t out = l.w.cols();
  if (x.rank() == 1) {
    if (x.size() != in) throw ConfigError("linear_forward: input dim mismatch");
    Tensor y({out});
    kernels::mm_nn(x.data.data(), l.w.data.data(), y.data.data(), 1, in, out);
    for (std::size_t j = 0; j < out; ++j) y[j] += l.b[j];
    return y;
  }
  if (x.rank() != 2 || x.cols() != in) {
    throw ConfigError("linear_forward: input dim mismatch");
  }
  const std::size_t batch = x.rows();
  Tensor y({batch, out});
  kernels::mm_nn(x.data.data(), l.w.data.data(), y.data.data(), batch, in, out);
  for (std::size_t i = 0; i < batch; ++i) {
    for (std::size_t j = 0; j < out; ++j) y.data[i * out + j] += l.b[j];
  }
  return y;
}

Tensor mlp_forward(const Mlp& m, const Tensor& x) {
  if (m.layers.empty()) throw ConfigError("mlp_forward: empty network");
  Tensor h = x;
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    h = linear_forward(m.layers[i], h);
    if (i + 1 < m.layers.size()) {
      for (double& v : h.data) v = std::max(0.0, v);
    }
  }
  return h;
}

void normalize_rows(Tensor& x) {
  const std::size_t d = x.rank() == 2 ? x.cols() : x.size();
  const std::size_t rows = x.rank() == 2 ? x.rows() : 1;
  for (std::size_t i = 0; i < rows; ++i) {
    double* row = x.data.data() + i * d;
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += row[j] * row[j];
    const double n = std::sqrt(s);
    if (n <= 1e-12) throw ConfigError("normalize_rows: degenerate vector");
    for (std::size_t j = 0; j < d; ++j) row[j] /= n;
  }
}

}  // namespace diva
