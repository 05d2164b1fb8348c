#pragma once

#include <cstdint>
#include <random>

namespace dyngrasp {

/// Every stochastic operation takes one of these by reference; episodes own
/// their generators, so nothing random is shared between episodes.
using Rng = std::mt19937_64;

/// Independent generator for a (seed, stream) pair, so that e.g. the object
/// trajectory does not depend on how many draws the planner consumed.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

inline double uniform(Rng& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

inline bool bernoulli(Rng& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return std::bernoulli_distribution(p)(rng);
}

}  // namespace dyngrasp
