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

#include "diva/datagen.hpp"

#include <cmath>
#include <cstddef>
#include <vector>

#include "diva/errors.hpp"
#include "diva/rng.hpp"
#include "diva/tensor.hpp"

namespace diva {
namespace {

// Dense layer with fan-in scaled random weights, fixed at construction.
struct MixLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> w;  // out x in, row-major
  std::vector<double> b;

  MixLayer(std::size_t in_dim, std::size_t out_dim, Rng& rng)
      : in(in_dim), out(out_dim), w(in_dim * out_dim), b(out_dim) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
    for (double& v : w) v = scale * rng.normal();
    for (double& v : b) v = 0.1 * rng.normal();
  }

  void apply(const std::vector<double>& x, std::vector<double>& y,
             bool nonlinear) const {
    y.assign(out, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      double acc = b[o];
      const double* row = w.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
      y[o] = nonlinear ? std::tanh(acc) : acc;
    }
  }
};

}  // namespace

void SynthConfig::validate() const {
  if (n_train_classes == 0) throw ConfigError("synth: n_train_classes must be >= 1");
  if (n_test_classes == 0) throw ConfigError("synth: n_test_classes must be >= 1");
  if (samples_per_class == 0) throw ConfigError("synth: samples_per_class must be >= 1");
  if (disc_dim == 0) throw ConfigError("synth: disc_dim must be >= 1");
  if (shared_dim == 0) throw ConfigError("synth: shared_dim must be >= 1");
  if (intra_dim == 0) throw ConfigError("synth: intra_dim must be >= 1");
  if (obs_dim == 0) throw ConfigError("synth: obs_dim must be >= 1");
  if (mixing_depth == 0) throw ConfigError("synth: mixing_depth must be >= 1");
  if (!(noise_obs >= 0.0)) throw ConfigError("synth: noise_obs must be >= 0");
  if (!(identity_scale >= 0.0)) throw ConfigError("synth: identity_scale must be >= 0");
  if (!(shared_scale >= 0.0)) throw ConfigError("synth: shared_scale must be >= 0");
  if (!(intra_scale >= 0.0)) throw ConfigError("synth: intra_scale must be >= 0");
}

Dataset generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);

  const std::size_t n_classes = cfg.n_train_classes + cfg.n_test_classes;
  const std::size_t n_total = n_classes * cfg.samples_per_class;
  const std::size_t latent_dim = cfg.disc_dim + cfg.shared_dim + cfg.intra_dim;

  // One global pool of unit directions in the shared factor space. Every
  // class — train and test alike — composes its samples from this same pool,
  // which is what gives the shared factors something to transfer.
  const std::size_t pool_size = 2 * cfg.shared_dim;
  std::vector<std::vector<double>> pool(pool_size,
                                        std::vector<double>(cfg.shared_dim));
  for (auto& dir : pool) {
    double norm2 = 0.0;
    for (double& v : dir) {
      v = rng.normal();
      norm2 += v * v;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& v : dir) v *= inv;
  }

  // Per-class structure: identity code, pool preference, intra map.
  std::vector<std::vector<double>> identity(n_classes,
                                            std::vector<double>(cfg.disc_dim));
  std::vector<std::vector<double>> preference(n_classes,
                                              std::vector<double>(pool_size));
  std::vector<std::vector<double>> intra_map(
      n_classes, std::vector<double>(cfg.intra_dim * cfg.intra_dim));
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (double& v : identity[c]) v = cfg.identity_scale * rng.normal();
    // Sharp preferences: each class leans on a few pool directions, so the
    // draw signature itself carries class information.
    double total = 0.0;
    for (double& v : preference[c]) {
      v = std::exp(2.0 * rng.normal());
      total += v;
    }
    for (double& v : preference[c]) v /= total;
    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.intra_dim));
    for (double& v : intra_map[c]) v = scale * rng.normal();
  }

  // Fixed mixer: tanh layers with a linear readout at the end.
  std::vector<MixLayer> mixer;
  mixer.reserve(cfg.mixing_depth);
  for (std::size_t l = 0; l < cfg.mixing_depth; ++l) {
    const std::size_t in = (l == 0) ? latent_dim : cfg.obs_dim;
    mixer.emplace_back(in, cfg.obs_dim, rng);
  }

  Dataset ds;
  ds.features = Tensor::zeros({n_total, cfg.obs_dim});
  ds.labels.resize(n_total);
  ds.split.resize(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c)
    ds.split[c] = (c < cfg.n_train_classes) ? kTrainSplit : kTestSplit;

  constexpr std::size_t kPoolDrawsPerSample = 2;
  const double draw_scale =
      1.0 / std::sqrt(static_cast<double>(kPoolDrawsPerSample));

  std::vector<double> latent(latent_dim);
  std::vector<double> buf_a;
  std::vector<double> buf_b;
  std::size_t row = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (std::size_t s = 0; s < cfg.samples_per_class; ++s, ++row) {
      for (std::size_t j = 0; j < cfg.disc_dim; ++j) latent[j] = identity[c][j];

      double* shared = latent.data() + cfg.disc_dim;
      for (std::size_t j = 0; j < cfg.shared_dim; ++j) shared[j] = 0.0;
      for (std::size_t d = 0; d < kPoolDrawsPerSample; ++d) {
        const std::size_t pick = rng.discrete(preference[c]);
        const double coef = cfg.shared_scale * draw_scale * rng.normal();
        for (std::size_t j = 0; j < cfg.shared_dim; ++j)
          shared[j] += coef * pool[pick][j];
      }

      double* intra = latent.data() + cfg.disc_dim + cfg.shared_dim;
      for (std::size_t j = 0; j < cfg.intra_dim; ++j) intra[j] = 0.0;
      for (std::size_t j = 0; j < cfg.intra_dim; ++j) {
        const double n = rng.normal();
        const double* col = intra_map[c].data() + j;
        for (std::size_t i = 0; i < cfg.intra_dim; ++i)
          intra[i] += cfg.intra_scale * col[i * cfg.intra_dim] * n;
      }

      const std::vector<double>* h = &latent;
      for (std::size_t l = 0; l < mixer.size(); ++l) {
        std::vector<double>& dst = (l % 2 == 0) ? buf_a : buf_b;
        mixer[l].apply(*h, dst, /*nonlinear=*/l + 1 < mixer.size());
        h = &dst;
      }

      double* out = ds.features.data.data() + row * cfg.obs_dim;
      for (std::size_t j = 0; j < cfg.obs_dim; ++j) {
        const double v = (*h)[j] + cfg.noise_obs * rng.normal();
        // Quantize through float32 so on-disk storage is lossless.
        out[j] = static_cast<double>(static_cast<float>(v));
      }
      ds.labels[row] = static_cast<int>(c);
    }
  }

  validate_dataset(ds);
  return ds;
}

}  // namespace diva
