// Copyright 2026 The fedsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace fedsim {

// Mixing primitive used for stream key derivation. Advances `state` and
// returns a well-scrambled 64-bit word.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Purpose tags keep independent random streams from ever colliding even when
// the (seed, round, client) coordinates coincide.
enum class Stream : std::uint64_t {
  kTaskGen = 1,
  kClientSampling = 2,
  kLocalBatch = 3,
  kModelInit = 4,
  kProbe = 5,
};

// Counter-based deterministic generator: a xoshiro256++ core keyed through
// splitmix64 from (seed, purpose, a, b). Identical keys give identical
// sequences on every platform; distribution code below avoids std::<random>
// distributions, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : Rng(seed, 0, 0, 0) {}

  Rng(std::uint64_t seed, std::uint64_t purpose, std::uint64_t a, std::uint64_t b) {
    std::uint64_t key = seed;
    key = splitmix64_next(key) ^ purpose;
    key = splitmix64_next(key) ^ a;
    key = splitmix64_next(key) ^ b;
    for (auto& word : s_) word = splitmix64_next(key);
  }

  static Rng keyed(std::uint64_t seed, Stream purpose, std::uint64_t a = 0, std::uint64_t b = 0) {
    return Rng(seed, static_cast<std::uint64_t>(purpose), a, b);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), bias-free via rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Standard normal via the Marsaglia polar method (no libm trig, so the
  // stream is reproducible across C libraries). Caches the second deviate.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  // Gamma(shape, 1) via Marsaglia–Tsang; the shape < 1 case uses the
  // standard boost Gamma(shape) = Gamma(shape+1) * U^(1/shape).
  double gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("Rng::gamma: shape must be positive");
    if (shape < 1.0) {
      const double u = uniform_positive();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_positive();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

  // Dirichlet(alpha, ..., alpha) over k categories.
  std::vector<double> dirichlet(double alpha, int k) {
    if (k < 1) throw std::invalid_argument("Rng::dirichlet: k must be >= 1");
    std::vector<double> w(static_cast<std::size_t>(k));
    double total = 0.0;
    for (auto& wi : w) {
      wi = gamma(alpha);
      total += wi;
    }
    if (total <= 0.0) {
      // All-zero draws only happen for pathologically small alpha; fall back
      // to a uniform point on the simplex corner set.
      const auto idx = below(static_cast<std::uint64_t>(k));
      for (auto& wi : w) wi = 0.0;
      w[static_cast<std::size_t>(idx)] = 1.0;
      return w;
    }
    for (auto& wi : w) wi /= total;
    return w;
  }

  // m distinct indices uniformly from {0, ..., pool-1}, ascending order.
  std::vector<int> sample_without_replacement(int pool, int m) {
    if (m < 0 || pool < 0 || m > pool)
      throw std::invalid_argument("Rng::sample_without_replacement: need 0 <= m <= pool");
    std::vector<int> ids(static_cast<std::size_t>(pool));
    for (int i = 0; i < pool; ++i) ids[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < m; ++i) {
      const auto j = i + static_cast<int>(below(static_cast<std::uint64_t>(pool - i)));
      std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
    }
    ids.resize(static_cast<std::size_t>(m));
    std::sort(ids.begin(), ids.end());
    return ids;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  double uniform_positive() {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return u;
  }

  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace fedsim
