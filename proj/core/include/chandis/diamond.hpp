#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "chandis/channels.hpp"
#include "chandis/random.hpp"

namespace chandis {

struct DiamondEstimate {
  double value = 0.0;
  std::size_t restarts_used = 0;
  std::vector<double> per_restart_values;
  double choi_lower_bound = 0.0;
  /// Local maximum reached from the maximally entangled start.
  double choi_start_value = 0.0;
};

struct DiamondOptions {
  std::size_t restarts = 20;
  std::uint64_t seed = 0;
  int max_iterations = 3000;
  /// Stop when a window of 25 iterations gains less than this.
  double tolerance = 1e-11;
  /// Reference register dimension; 0 means in_dim (always sufficient). A value
  /// of 1 gives the best ancilla-free discrimination instead.
  std::size_t env_dim = 0;
};

/// ||choi(phi0) - choi(phi1)||_1, the value at the maximally entangled input.
double choi_lower_bound(const KrausChannel& phi0, const KrausChannel& phi1);

/// max over pure |psi> on in_dim^2 of ||((phi0 - phi1) (x) id)[|psi><psi|]||_1.
///
/// Each start is improved by alternating ascent: S = sign(X(psi)), then psi
/// moves to (or toward) the top eigenvector of the dual operator N(S), which
/// never decreases ||X(psi)||_1. Restart k starts from a Haar-random vector
/// drawn from stream (seed, k); one extra run starts from the maximally
/// entangled vector so the estimate never falls below the Choi bound.
DiamondEstimate diamond_norm(const KrausChannel& phi0, const KrausChannel& phi1,
                             const DiamondOptions& options = {});
DiamondEstimate diamond_norm(const KrausChannel& phi0, const KrausChannel& phi1, std::size_t restarts, Rng& rng);

/// 1/2 + 1/4 ||phi0^{(x)p} - phi1^{(x)p}||_diamond.
double p_diamond(const KrausChannel& phi0, const KrausChannel& phi1, std::size_t p,
                 const DiamondOptions& options = {});

}  // namespace chandis
