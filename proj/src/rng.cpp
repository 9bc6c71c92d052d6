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

#include "diva/rng.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "diva/errors.hpp"

namespace diva {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  // u1 in (0, 1] so the log is finite.
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * std::numbers::pi * u2;
  cached_ = r * std::sin(theta);
  has_cached_ = true;
  return r * std::cos(theta);
}

double Rng::normal(double mean, double stddev) {
  return mean + stddev * normal();
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw ConfigError("Rng::index requires n > 0");
  return static_cast<std::size_t>(
      (static_cast<unsigned __int128>(engine_()) * n) >> 64);
}

std::size_t Rng::discrete(std::span<const double> weights) {
  if (weights.empty()) throw ConfigError("Rng::discrete requires weights");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ConfigError("Rng::discrete requires finite non-negative weights");
    }
    total += w;
  }
  if (total <= 0.0) throw ConfigError("Rng::discrete requires a positive weight");
  double u = uniform() * total;
  double cum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    cum += weights[i];
    if (u < cum) return i;
  }
  // Rounding can push u past the last boundary; return the last positive entry.
  for (std::size_t i = weights.size(); i > 0; --i) {
    if (weights[i - 1] > 0.0) return i - 1;
  }
  return weights.size() - 1;
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
  if (k > n) throw ConfigError("sample_without_replacement requires k <= n");
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + index(n - i);
    std::swap(pool[i], pool[j]);
    out[i] = pool[i];
  }
  return out;
}

Rng Rng::fork() {
  return Rng(splitmix64(engine_()));
}

std::string Rng::serialize() const {
  std::ostringstream os;
  os << (has_cached_ ? 1 : 0) << ' ';
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", cached_);
  os << buf << ' ' << engine_;
  return os.str();
}

Rng Rng::deserialize(const std::string& s) {
  std::istringstream is(s);
  int cached = 0;
  std::string hexval;
  is >> cached >> hexval;
  Rng rng(0);
  is >> rng.engine_;
  if (!is) throw IoError("corrupt Rng state string");
  rng.has_cached_ = cached != 0;
  rng.cached_ = std::strtod(hexval.c_str(), nullptr);
  return rng;
}

}  // namespace diva
