#pragma once

#include <cstdint>
#include <random>

#include "aimdsync/core.hpp"

namespace aimdsync {

using Rng = std::mt19937_64;

/// Seed for Monte Carlo replica i derived from the master seed.
inline std::uint64_t replica_seed(std::uint64_t master, std::uint64_t index) {
  return master ^ index;
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

/// Uniform sample from the standard simplex (Dirichlet(1,...,1)),
/// via normalized exponentials.
inline Vec random_simplex_point(int n, Rng& rng) {
  std::exponential_distribution<double> exp1(1.0);
  Vec x(static_cast<size_t>(n));
  double s = 0.0;
  for (auto& v : x) {
    v = exp1(rng);
    s += v;
  }
  for (auto& v : x) v /= s;
  return x;
}

/// Difference of two independent uniform simplex points; sums to zero.
inline Vec random_zero_sum(int n, Rng& rng) {
  Vec x = random_simplex_point(n, rng);
  Vec y = random_simplex_point(n, rng);
  for (int i = 0; i < n; ++i) x[static_cast<size_t>(i)] -= y[static_cast<size_t>(i)];
  return x;
}

}  // namespace aimdsync
