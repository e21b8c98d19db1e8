/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 advstyle contributors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>

namespace advstyle {

inline constexpr const char* kVersionString = "0.1.0";

/// Worker cap for kernel-internal parallelism. Resolution order:
/// set_max_threads() > ADVSTYLE_THREADS env > hardware concurrency.
std::size_t max_threads();
void set_max_threads(std::size_t n);

/// Splits [begin, end) into contiguous chunks and runs body(b, e) on a shared
/// pool, the calling thread included. Runs inline when the pool is busy
/// (nested use), the range is below min_grain, or max_threads() == 1.
/// body must only write state owned by its indices; under that contract the
/// result is independent of scheduling and thread count.
void parallel_for(std::size_t begin, std::size_t end, std::size_t min_grain,
                  const std::function<void(std::size_t, std::size_t)>& body);

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a stream tag.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t tag) {
  return splitmix64(base ^ splitmix64(tag));
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t tag_a, std::uint64_t tag_b) {
  return mix_seed(mix_seed(base, tag_a), tag_b);
}

/// Deterministic RNG: mt19937_64 core with hand-rolled transforms, so the
/// exact draw sequence is pinned by this file rather than by the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform index in [0, n) via Lemire's multiply-shift reduction.
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
  }

  /// Box-Muller; consumes two uniforms per draw.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 0x1.0p-60) u1 = 0x1.0p-60;
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Johnk's algorithm; adequate for the small shape parameters used here.
  double beta(double alpha, double beta_param) {
    for (int attempt = 0; attempt < 1024; ++attempt) {
      double x = std::pow(uniform(), 1.0 / alpha);
      double y = std::pow(uniform(), 1.0 / beta_param);
      double s = x + y;
      if (s > 0.0 && s <= 1.0) return x / s;
    }
    return 0.5;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace advstyle
