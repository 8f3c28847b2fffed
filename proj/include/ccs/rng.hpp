/*
 * Copyright 2026 The ccselect Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
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

namespace ccs {

/**
 * Deterministic counter-based random stream built on the SplitMix64 finalizer.
 *
 * A stream is a 64-bit key plus a draw counter; draw k of a stream is
 *
 *     mix64(key + k * 0x9E3779B97F4A7C15)
 *
 * so any value can be reproduced from (seed, fork path, draw index) alone,
 * in any language that has 64-bit unsigned arithmetic.  Child streams are
 * derived by hashing the parent key with the child index and never disturb
 * the parent's counter, which keeps batch outputs stable when the batch
 * size changes.
 */
class Rng {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  static std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  explicit Rng(std::uint64_t seed = 0) : key_(mix64(seed ^ 0xA0761D6478BD642Full)) {}

  /// Independent child stream identified by `child`.
  Rng fork(std::uint64_t child) const {
    Rng r;
    r.key_ = mix64(key_ ^ mix64((child + 1) * kGamma));
    r.counter_ = 0;
    return r;
  }

  std::uint64_t next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * kGamma);
  }

  /// Uniform in [0, 1) with 53-bit resolution.
  double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * u01(); }

  /// Uniform integer in [a, b], both ends inclusive.
  long long uniform_int(long long a, long long b) {
    const long long span = b - a + 1;
    long long k = static_cast<long long>(u01() * static_cast<double>(span));
    if (k >= span) k = span - 1;
    return a + k;
  }

  double log_uniform(double a, double b) {
    return std::exp(uniform(std::log(a), std::log(b)));
  }

  bool bernoulli(double p) { return u01() < p; }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace ccs
