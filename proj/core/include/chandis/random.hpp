#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace chandis {

using Rng = std::mt19937_64;

/// Seed for a child stream identified by (master seed, task path).
///
/// Each path element is either a small integer (restart index, grid cell) or a
/// label hashed with FNV-1a. Streams derived this way do not depend on the
/// order in which tasks are scheduled.
class SeedPath {
public:
  explicit SeedPath(std::uint64_t master) : state_(mix(master ^ 0x9e3779b97f4a7c15ULL)) {}

  SeedPath child(std::uint64_t key) const;
  SeedPath child(std::string_view label) const;

  std::uint64_t seed() const { return state_; }
  Rng rng() const { return Rng(state_); }

  static std::uint64_t mix(std::uint64_t x);

private:
  struct Raw {};
  SeedPath(std::uint64_t state, Raw) : state_(state) {}
  std::uint64_t state_;
};

/// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(Rng& rng);

/// Uniform double in [lo, hi).
double uniform(Rng& rng, double lo, double hi);

/// Standard normal via Box-Muller (two uniform draws per call).
double standard_normal(Rng& rng);

/// Standard complex Gaussian sample with E|z|^2 = 1.
std::complex<double> complex_normal(Rng& rng);

/// Fair coin.
bool coin(Rng& rng);

}  // namespace chandis
