#pragma once

// Reproducible random numbers.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The standard distributions are not, so the conversions to uniform
// and normal variates are spelled out here; any other implementation that
// follows these formulas regenerates the same corpora from the same seed.

#include "c1bench/core.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace c1bench {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1): top 53 bits scaled by 2^-53.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform on (0, 1].
  double uniform_open_left() { return 1.0 - uniform(); }

  /// Standard normal via the Box-Muller cosine branch (one variate per call).
  double normal() {
    const double u1 = uniform_open_left();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

  Vec normal_vec(int m) {
    Vec v(m);
    for (int i = 0; i < m; ++i) v[i] = normal();
    return v;
  }

  Vec unit_vec(int m) {
    Vec v = normal_vec(m);
    const double n = v.norm();
    if (n < 1e-12) return unit_vec(m);
    return v / n;
  }

  /// Uniform point in the open ball of radius r centred at the origin.
  Vec in_ball(int m, double r) {
    const Vec dir = unit_vec(m);
    return dir * (r * std::pow(uniform(), 1.0 / m));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace c1bench
