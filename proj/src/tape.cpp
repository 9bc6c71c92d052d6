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

#include "diva/tape.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "diva/errors.hpp"
#include "diva/kernels.hpp"

namespace diva {

namespace {
constexpr double kNormEps = 1e-12;
}

void Tape::check(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) {
    throw ConfigError("Tape: variable does not belong to this tape");
  }
}

Var Tape::push(Tensor value, std::function<void(Tape&, const Tensor&)> backprop) {
  if (value.size() == 0) throw ConfigError("Tape: empty tensors are not allowed");
  Node node;
  node.value = std::move(value);
  node.backprop = std::move(backprop);
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

void Tape::accumulate(Var v, std::size_t offset, const double* g, std::size_t n) {
  Node& node = nodes_[v.id];
  double* dst = node.grad.data.data() + offset;
  for (std::size_t i = 0; i < n; ++i) dst[i] += g[i];
  node.touched = true;
}

Var Tape::leaf(Tensor value) {
  return push(std::move(value), nullptr);
}

Var Tape::add(Var a, Var b) {
  check(a);
  check(b);
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (!va.same_shape(vb)) throw ConfigError("add: shape mismatch");
  Tensor out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += vb[i];
  return push(std::move(out), [a, b](Tape& t, const Tensor& g) {
    t.accumulate(a, 0, g.data.data(), g.size());
    t.accumulate(b, 0, g.data.data(), g.size());
  });
}

Var Tape::sub(Var a, Var b) {
  check(a);
  check(b);
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (!va.same_shape(vb)) throw ConfigError("sub: shape mismatch");
  Tensor out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= vb[i];
  return push(std::move(out), [a, b](Tape& t, const Tensor& g) {
    t.accumulate(a, 0, g.data.data(), g.size());
    Node& nb = t.nodes_[b.id];
    for (std::size_t i = 0; i < g.size(); ++i) nb.grad[i] -= g[i];
    nb.touched = true;
  });
}

Var Tape::mul(Var a, Var b) {
  check(a);
  check(b);
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (!va.same_shape(vb)) throw ConfigError("mul: shape mismatch");
  Tensor out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= vb[i];
  return push(std::move(out), [a, b](Tape& t, const Tensor& g) {
    const Tensor& xa = t.value(a);
    const Tensor& xb = t.value(b);
    Node& na = t.nodes_[a.id];
    Node& nb = t.nodes_[b.id];
    for (std::size_t i = 0; i < g.size(); ++i) {
      na.grad[i] += g[i] * xb[i];
      nb.grad[i] += g[i] * xa[i];
    }
    na.touched = nb.touched = true;
  });
}

Var Tape::scale(Var a, double c) {
  check(a);
  Tensor out = value(a);
  for (double& v : out.data) v *= c;
  return push(std::move(out), [a, c](Tape& t, const Tensor& g) {
    Node& na = t.nodes_[a.id];
    for (std::size_t i = 0; i < g.size(); ++i) na.grad[i] += c * g[i];
    na.touched = true;
  });
}

Var Tape::add_scalar(Var a, double c) {
  check(a);
  Tensor out = value(a);
  for (double& v : out.data) v += c;
  return push(std::move(out), [a](Tape& t, const Tensor& g) {
    t.accumulate(a, 0, g.data.data(), g.size());
  });
}

Var Tape::relu(Var a) {
  check(a);
  Tensor out = value(a);
  for (double& v : out.data) v = std::max(0.0, v);
  return push(std::move(out), [a](Tape& t, const Tensor& g) {
    const Tensor& x = t.value(a);
    Node& na = t.nodes_[a.id];
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (x[i] > 0.0) na.grad[i] += g[i];
    }
    na.touched = true;
  });
}

Var Tape::unary_pointwise(Var a, PointwiseFn fn) {
  check(a);
  const Tensor& va = value(a);
  Tensor out = va;
  std::vector<double> deriv(va.size());
  for (std::size_t i = 0; i < va.size(); ++i) {
    auto [y, dy] = fn(va[i]);
    out[i] = y;
    deriv[i] = dy;
  }
  return push(std::move(out), [a, deriv = std::move(deriv)](Tape& t, const Tensor& g) {
    Node& na = t.nodes_[a.id];
    for (std::size_t i = 0; i < g.size(); ++i) na.grad[i] += deriv[i] * g[i];
    na.touched = true;
  });
}

Var Tape::linear(Var x, Var w, Var b) {
  check(x);
  check(w);
  check(b);
  const Tensor& vx = value(x);
  const Tensor& vw = value(w);
  const Tensor& vb = value(b);
  if (vw.rank() != 2) throw ConfigError("linear: weight must be rank 2");
  const std::size_t f = vw.rows();
  const std::size_t gdim = vw.cols();
  if (vb.size() != gdim) throw ConfigError("linear: bias size mismatch");

  if (vx.rank() == 1) {
    if (vx.size() != f) throw ConfigError("linear: input size mismatch");
    Tensor out({gdim});
    kernels::mm_nn(vx.data.data(), vw.data.data(), out.data.data(), 1, f, gdim);
    for (std::size_t j = 0; j < gdim; ++j) out[j] += vb[j];
    return push(std::move(out), [x, w, b, f, gdim](Tape& t, const Tensor& g) {
      const Tensor& xv = t.value(x);
      const Tensor& wv = t.value(w);
      std::vector<double> gx(f);
      kernels::mm_nt(g.data.data(), wv.data.data(), gx.data(), 1, gdim, f);
      t.accumulate(x, 0, gx.data(), f);
      Node& nw = t.nodes_[w.id];
      for (std::size_t i = 0; i < f; ++i) {
        const double xi = xv[i];
        for (std::size_t j = 0; j < gdim; ++j) nw.grad[i * gdim + j] += xi * g[j];
      }
      nw.touched = true;
      t.accumulate(b, 0, g.data.data(), gdim);
    });
  }

  if (vx.rank() != 2 || vx.cols() != f) throw ConfigError("linear: input size mismatch");
  const std::size_t batch = vx.rows();
  Tensor out({batch, gdim});
  kernels::mm_nn(vx.data.data(), vw.data.data(), out.data.data(), batch, f, gdim);
  for (std::size_t i = 0; i < batch; ++i) {
    for (std::size_t j = 0; j < gdim; ++j) out.data[i * gdim + j] += vb[j];
  }
  return push(std::move(out), [x, w, b, f, gdim, batch](Tape& t, const Tensor& g) {
    const Tensor& xv = t.value(x);
    const Tensor& wv = t.value(w);
    std::vector<double> gx(batch * f);
    kernels::mm_nt(g.data.data(), wv.data.data(), gx.data(), batch, gdim, f);
    t.accumulate(x, 0, gx.data(), gx.size());
    std::vector<double> gw(f * gdim);
    kernels::mm_tn(xv.data.data(), g.data.data(), gw.data(), f, batch, gdim);
    t.accumulate(w, 0, gw.data(), gw.size());
    Node& nb = t.nodes_[b.id];
    for (std::size_t i = 0; i < batch; ++i) {
      for (std::size_t j = 0; j < gdim; ++j) nb.grad[j] += g[i * gdim + j];
    }
    nb.touched = true;
  });
}

Var Tape::row(Var m, std::size_t i) {
  check(m);
  const Tensor& vm = value(m);
  if (vm.rank() != 2) throw ConfigError("row: input must be rank 2");
  if (i >= vm.rows()) throw ConfigError("row: index out of range");
  const std::size_t d = vm.cols();
  Tensor out({d});
  std::copy_n(vm.data.data() + i * d, d, out.data.data());
  return push(std::move(out), [m, i, d](Tape& t, const Tensor& g) {
    t.accumulate(m, i * d, g.data.data(), d);
  });
}

Var Tape::dot(Var a, Var b) {
  check(a);
  check(b);
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (va.size() != vb.size()) throw ConfigError("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) s += va[i] * vb[i];
  return push(Tensor::scalar(s), [a, b](Tape& t, const Tensor& g) {
    const double g0 = g[0];
    const Tensor& xa = t.value(a);
    const Tensor& xb = t.value(b);
    Node& na = t.nodes_[a.id];
    Node& nb = t.nodes_[b.id];
    for (std::size_t i = 0; i < xa.size(); ++i) {
      na.grad[i] += g0 * xb[i];
      nb.grad[i] += g0 * xa[i];
    }
    na.touched = nb.touched = true;
  });
}

Var Tape::sum(Var a) {
  check(a);
  double s = 0.0;
  for (double v : value(a).data) s += v;
  return push(Tensor::scalar(s), [a](Tape& t, const Tensor& g) {
    Node& na = t.nodes_[a.id];
    for (double& gv : na.grad.data) gv += g[0];
    na.touched = true;
  });
}

Var Tape::mean(Var a) {
  check(a);
  const std::size_t n = value(a).size();
  double s = 0.0;
  for (double v : value(a).data) s += v;
  return push(Tensor::scalar(s / static_cast<double>(n)), [a, n](Tape& t, const Tensor& g) {
    Node& na = t.nodes_[a.id];
    const double gv = g[0] / static_cast<double>(n);
    for (double& x : na.grad.data) x += gv;
    na.touched = true;
  });
}

Var Tape::square_norm(Var a) {
  check(a);
  double s = 0.0;
  for (double v : value(a).data) s += v * v;
  return push(Tensor::scalar(s), [a](Tape& t, const Tensor& g) {
    const double g0 = g[0];
    const Tensor& x = t.value(a);
    Node& na = t.nodes_[a.id];
    for (std::size_t i = 0; i < x.size(); ++i) na.grad[i] += 2.0 * g0 * x[i];
    na.touched = true;
  });
}

Var Tape::l2_normalize(Var a) {
  check(a);
  const Tensor& va = value(a);
  if (va.rank() != 1) throw ConfigError("l2_normalize: input must be rank 1");
  const double n = l2_norm(va);
  if (n <= kNormEps) throw ConfigError("l2_normalize: degenerate vector");
  Tensor out = va;
  for (double& v : out.data) v /= n;
  const std::uint32_t out_id = static_cast<std::uint32_t>(nodes_.size());
  return push(std::move(out), [a, n, out_id](Tape& t, const Tensor& g) {
    const Tensor& y = t.nodes_[out_id].value;
    double yg = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) yg += y[i] * g[i];
    Node& na = t.nodes_[a.id];
    for (std::size_t i = 0; i < y.size(); ++i) {
      na.grad[i] += (g[i] - y[i] * yg) / n;
    }
    na.touched = true;
  });
}

Var Tape::l2_normalize_rows(Var a) {
  check(a);
  const Tensor& va = value(a);
  if (va.rank() != 2) throw ConfigError("l2_normalize_rows: input must be rank 2");
  const std::size_t rows = va.rows();
  const std::size_t d = va.cols();
  Tensor out = va;
  std::vector<double> norms(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += va.at(i, j) * va.at(i, j);
    const double n = std::sqrt(s);
    if (n <= kNormEps) throw ConfigError("l2_normalize_rows: degenerate row");
    norms[i] = n;
    for (std::size_t j = 0; j < d; ++j) out.at(i, j) /= n;
  }
  const std::uint32_t out_id = static_cast<std::uint32_t>(nodes_.size());
  return push(std::move(out),
              [a, d, rows, norms = std::move(norms), out_id](Tape& t, const Tensor& g) {
    const Tensor& y = t.nodes_[out_id].value;
    Node& na = t.nodes_[a.id];
    for (std::size_t i = 0; i < rows; ++i) {
      const double* yr = y.data.data() + i * d;
      const double* gr = g.data.data() + i * d;
      double yg = 0.0;
      for (std::size_t j = 0; j < d; ++j) yg += yr[j] * gr[j];
      double* out_g = na.grad.data.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) {
        out_g[j] += (gr[j] - yr[j] * yg) / norms[i];
      }
    }
    na.touched = true;
  });
}

Var Tape::distance(Var a, Var b) {
  check(a);
  check(b);
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (va.size() != vb.size()) throw ConfigError("distance: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double d = va[i] - vb[i];
    s += d * d;
  }
  const double dist = std::sqrt(s);
  return push(Tensor::scalar(dist), [a, b, dist](Tape& t, const Tensor& g) {
    const double coeff = g[0] / std::max(dist, kNormEps);
    const Tensor& xa = t.value(a);
    const Tensor& xb = t.value(b);
    Node& na = t.nodes_[a.id];
    Node& nb = t.nodes_[b.id];
    for (std::size_t i = 0; i < xa.size(); ++i) {
      const double d = coeff * (xa[i] - xb[i]);
      na.grad[i] += d;
      nb.grad[i] -= d;
    }
    na.touched = nb.touched = true;
  });
}

Var Tape::gradient_reversal(Var a) {
  check(a);
  Tensor out = value(a);
  return push(std::move(out), [a](Tape& t, const Tensor& g) {
    Node& na = t.nodes_[a.id];
    for (std::size_t i = 0; i < g.size(); ++i) na.grad[i] -= g[i];
    na.touched = true;
  });
}

Var Tape::matvec_const(std::shared_ptr<const Tensor> m, Var x) {
  check(x);
  if (!m || m->rank() != 2) throw ConfigError("matvec_const: matrix must be rank 2");
  const Tensor& vx = value(x);
  const std::size_t c = m->rows();
  const std::size_t d = m->cols();
  if (vx.size() != d) throw ConfigError("matvec_const: size mismatch");
  Tensor out({c});
  kernels::mm_nt(m->data.data(), vx.data.data(), out.data.data(), c, d, 1);
  return push(std::move(out), [m = std::move(m), x, c, d](Tape& t, const Tensor& g) {
    Node& nx = t.nodes_[x.id];
    for (std::size_t i = 0; i < c; ++i) {
      const double gi = g[i];
      const double* mrow = m->data.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) nx.grad[j] += gi * mrow[j];
    }
    nx.touched = true;
  });
}

Var Tape::cdist_const(std::shared_ptr<const Tensor> m, Var x) {
  check(x);
  if (!m || m->rank() != 2) throw ConfigError("cdist_const: matrix must be rank 2");
  const Tensor& vx = value(x);
  const std::size_t c = m->rows();
  const std::size_t d = m->cols();
  if (vx.size() != d) throw ConfigError("cdist_const: size mismatch");
  Tensor out({c});
  for (std::size_t i = 0; i < c; ++i) {
    const double* mrow = m->data.data() + i * d;
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = vx[j] - mrow[j];
      s += diff * diff;
    }
    out[i] = std::sqrt(s);
  }
  const std::uint32_t out_id = static_cast<std::uint32_t>(nodes_.size());
  return push(std::move(out), [m = std::move(m), x, c, d, out_id](Tape& t, const Tensor& g) {
    const Tensor& dist = t.nodes_[out_id].value;
    const Tensor& vx = t.value(x);
    Node& nx = t.nodes_[x.id];
    for (std::size_t i = 0; i < c; ++i) {
      if (g[i] == 0.0) continue;
      const double coeff = g[i] / std::max(dist[i], kNormEps);
      const double* mrow = m->data.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) {
        nx.grad[j] += coeff * (vx[j] - mrow[j]);
      }
    }
    nx.touched = true;
  });
}

Var Tape::concat(Var a, Var b) {
  check(a);
  check(b);
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (va.rank() != 1 || vb.rank() != 1) throw ConfigError("concat: inputs must be rank 1");
  Tensor out({va.size() + vb.size()});
  std::copy(va.data.begin(), va.data.end(), out.data.begin());
  std::copy(vb.data.begin(), vb.data.end(), out.data.begin() + va.size());
  const std::size_t na = va.size();
  const std::size_t nb = vb.size();
  return push(std::move(out), [a, b, na, nb](Tape& t, const Tensor& g) {
    t.accumulate(a, 0, g.data.data(), na);
    t.accumulate(b, 0, g.data.data() + na, nb);
  });
}

Var Tape::logsumexp(Var a) {
  check(a);
  const Tensor& va = value(a);
  if (va.rank() != 1) throw ConfigError("logsumexp: input must be rank 1");
  double m = va[0];
  for (double v : va.data) m = std::max(m, v);
  double s = 0.0;
  for (double v : va.data) s += std::exp(v - m);
  const double out = m + std::log(s);
  return push(Tensor::scalar(out), [a, out](Tape& t, const Tensor& g) {
    const double g0 = g[0];
    const Tensor& x = t.value(a);
    Node& na = t.nodes_[a.id];
    for (std::size_t i = 0; i < x.size(); ++i) {
      na.grad[i] += g0 * std::exp(x[i] - out);
    }
    na.touched = true;
  });
}

void Tape::backward(Var loss) {
  check(loss);
  if (!value(loss).is_scalar()) {
    throw ConfigError("backward: loss must be scalar");
  }
  for (Node& node : nodes_) {
    node.grad = Tensor(node.value.shape);
    node.touched = false;
  }
  nodes_[loss.id].grad[0] = 1.0;
  nodes_[loss.id].touched = true;
  for (std::size_t i = nodes_.size(); i > 0; --i) {
    Node& node = nodes_[i - 1];
    if (node.touched && node.backprop) {
      node.backprop(*this, node.grad);
    }
  }
}

}  // namespace diva
