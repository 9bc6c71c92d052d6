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

#ifndef DIVA_DATAGEN_HPP_
#define DIVA_DATAGEN_HPP_

#include <cstddef>
#include <cstdint>

#include "diva/dataset.hpp"

namespace diva {

// Controls for the synthetic benchmark generator. Classes split disjointly:
// ids [0, n_train_classes) train, the rest test.
struct SynthConfig {
  std::size_t n_train_classes = 20;
  std::size_t n_test_classes = 20;
  std::size_t samples_per_class = 30;
  std::size_t disc_dim = 8;    // per-class identity code
  std::size_t shared_dim = 8;  // cross-class factor space
  std::size_t intra_dim = 4;   // within-class variation space
  std::size_t obs_dim = 64;    // observation width F
  std::size_t mixing_depth = 2;
  double noise_obs = 0.05;
  // Source amplitudes; 0 removes a factor entirely. The defaults are
  // calibrated so that class identity alone does not saturate retrieval on
  // held-out classes: identity codes are weak, and a good share of the
  // class signal rides on the pool-preference signature that naive
  // within-class contraction tends to erase.
  double identity_scale = 0.5;
  double shared_scale = 3.0;
  double intra_scale = 2.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Latent-factor benchmark with three controlled sources of variation:
//   - a per-class identity code, fixed across the class's samples;
//   - shared factors drawn from one GLOBAL pool of directions that every
//     class (including every test class) mixes with its own preference
//     weights — the pool is what makes cross-class transfer measurable;
//   - intra-class variation through a per-class linear map.
// The concatenated latent passes through a fixed random tanh mixer of the
// configured depth, plus isotropic observation noise. Features are
// quantized to float32 so the binary dataset format round-trips bit-exactly.
Dataset generate_synthetic(const SynthConfig& cfg);

}  // namespace diva

#endif  // DIVA_DATAGEN_HPP_
