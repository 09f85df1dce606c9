#pragma once

// Hand-rolled generators shared by the unit tests.

#include "holo/numcore.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace holo::test {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  Vec vec(std::size_t n, double lo, double hi) {
    Vec v(n);
    for (double& x : v) x = uniform(lo, hi);
    return v;
  }
  /// Uniform direction on the unit sphere.
  Vec direction(std::size_t n) {
    Vec v(n);
    double r = 0.0;
    do {
      for (double& x : v) x = normal();
      r = euclid_norm(v);
    } while (r < 1e-12);
    return (1.0 / r) * v;
  }

 private:
  std::mt19937_64 engine_;
};

/// Brute-force sup over unit u of <m,u>^2 / (|u|^2 + <y,u>^2).
inline double sampled_rank_one(const Vec& m, const Vec& y, Gen& gen, int samples) {
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vec u = gen.direction(m.size());
    const double mu = dot(m, u), yu = dot(y, u);
    best = std::max(best, mu * mu / (1.0 + yu * yu));
  }
  return best;
}

}  // namespace holo::test
