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

// Times the OpenMP kernels against their serial reference mirrors and
// checks that both produce bit-identical output. Run manually:
//
//   ./build/bench_kernels [n]
//
// where n scales the problem sizes (default 1).

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "diva/kernels.hpp"
#include "diva/reference.hpp"
#include "diva/rng.hpp"
#include "diva/tensor.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_median_ms(const std::function<void()>& fn, int reps) {
  std::vector<double> ms;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    fn();
    const auto t1 = Clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(ms.begin(), ms.end());
  return ms[ms.size() / 2];
}

std::vector<double> random_block(diva::Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

struct Row {
  std::string name;
  double serial_ms;
  double parallel_ms;
  bool identical;
};

void print_row(const Row& r) {
  std::printf("%-28s %10.3f ms %10.3f ms %8.2fx   %s\n", r.name.c_str(),
              r.serial_ms, r.parallel_ms, r.serial_ms / r.parallel_ms,
              r.identical ? "bitwise equal" : "MISMATCH");
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t scale = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
  if (scale == 0 || scale > 64) {
    std::fprintf(stderr, "usage: %s [scale 1..64]\n", argv[0]);
    return 2;
  }
  const int reps = 5;
  diva::Rng rng(1234);
  bool all_ok = true;

  std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "parallel",
              "speedup");

  {
    const std::size_t m = 256 * scale, k = 192, n = 224;
    const std::vector<double> a = random_block(rng, m * k);
    const std::vector<double> b = random_block(rng, k * n);
    std::vector<double> cs(m * n), cp(m * n);
    Row r{"mm_nn " + std::to_string(m) + "x" + std::to_string(k) + "x" +
              std::to_string(n),
          time_median_ms([&] { diva::ref::mm_nn(a.data(), b.data(), cs.data(),
                                                m, k, n); }, reps),
          time_median_ms([&] { diva::kernels::mm_nn(a.data(), b.data(),
                                                    cp.data(), m, k, n); },
                         reps),
          false};
    r.identical = same_bits(cs, cp);
    all_ok = all_ok && r.identical;
    print_row(r);
  }

  {
    const std::size_t m = 256 * scale, k = 192, n = 224;
    const std::vector<double> a = random_block(rng, m * k);
    const std::vector<double> b = random_block(rng, n * k);
    std::vector<double> cs(m * n), cp(m * n);
    Row r{"mm_nt " + std::to_string(m) + "x" + std::to_string(k) + "x" +
              std::to_string(n),
          time_median_ms([&] { diva::ref::mm_nt(a.data(), b.data(), cs.data(),
                                                m, k, n); }, reps),
          time_median_ms([&] { diva::kernels::mm_nt(a.data(), b.data(),
                                                    cp.data(), m, k, n); },
                         reps),
          false};
    r.identical = same_bits(cs, cp);
    all_ok = all_ok && r.identical;
    print_row(r);
  }

  {
    const std::size_t m = 224, k = 256 * scale, n = 192;
    const std::vector<double> a = random_block(rng, k * m);
    const std::vector<double> b = random_block(rng, k * n);
    std::vector<double> cs(m * n), cp(m * n);
    Row r{"mm_tn " + std::to_string(m) + "x" + std::to_string(k) + "x" +
              std::to_string(n),
          time_median_ms([&] { diva::ref::mm_tn(a.data(), b.data(), cs.data(),
                                                m, k, n); }, reps),
          time_median_ms([&] { diva::kernels::mm_tn(a.data(), b.data(),
                                                    cp.data(), m, k, n); },
                         reps),
          false};
    r.identical = same_bits(cs, cp);
    all_ok = all_ok && r.identical;
    print_row(r);
  }

  {
    const std::size_t n = 512 * scale, d = 96;
    diva::Tensor x = diva::Tensor::zeros({n, d});
    for (std::size_t i = 0; i < x.size(); ++i) x.data[i] = rng.normal();
    diva::Tensor ds, dp;
    Row r{"pairwise_distances " + std::to_string(n) + "x" + std::to_string(d),
          time_median_ms([&] { ds = diva::ref::pairwise_distances(x); }, reps),
          time_median_ms([&] { dp = diva::kernels::pairwise_distances(x); },
                         reps),
          false};
    r.identical = same_bits(ds.data, dp.data);
    all_ok = all_ok && r.identical;
    print_row(r);
  }

  if (!all_ok) {
    std::fprintf(stderr, "parallel kernels disagree with the reference\n");
    return 1;
  }
  return 0;
}
