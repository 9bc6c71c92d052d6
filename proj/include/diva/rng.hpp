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

#ifndef DIVA_RNG_HPP_
#define DIVA_RNG_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace diva {

std::uint64_t splitmix64(std::uint64_t x);

// Deterministic random source. All distribution transforms are implemented
// by hand on top of std::mt19937_64 so that streams are bit-identical across
// platforms and standard library versions; std::*_distribution makes no such
// guarantee.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal();
  double normal(double mean, double stddev);

  // Uniform index in [0, n). Requires n > 0.
  std::size_t index(std::size_t n);

  // Index drawn proportionally to non-negative weights (not all zero).
  std::size_t discrete(std::span<const double> weights);

  // k distinct values from [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  // Independent child stream. Advances this stream by one draw.
  Rng fork();

  // Exact state round-trip, including the Box-Muller cache.
  std::string serialize() const;
  static Rng deserialize(const std::string& s);

 private:
  std::mt19937_64 engine_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace diva

#endif  // DIVA_RNG_HPP_
