#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "chandis/diamond.hpp"
#include "chandis/qcore.hpp"
#include "chandis/vardisc.hpp"

namespace chandis {

/// Tr(Phi(a)[rho] Phi(b)[rho]) for depolarising channels.
double trace_product(const DensityMatrix& rho, double a, double b);

/// 1/2 (1 + (1 - 4a/3)(1 - 4b/3) |r|^2) for Bloch vector r.
double trace_product_closed_form(const Eigen::Vector3d& bloch, double a, double b);

inline constexpr double kExtremumGridStep = 0.01;

/// argmin over alpha in [0, 1 - eps] of trace_product(rho, alpha, alpha + eps):
/// grid scan with step kExtremumGridStep, then golden-section refinement in the
/// neighbouring cells. rho defaults to |+><+|.
double trace_product_extremum(double eps);
double trace_product_extremum(double eps, const DensityMatrix& rho);

/// Sample correlation coefficient. Throws ContractError on zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

struct FitResult {
  double parameter = 0.0;
  double residual_sum = 0.0;
  int iterations = 0;
};

/// Least squares for v = l^(-1/a).
FitResult fit_power(std::span<const double> ls, std::span<const double> vs);
/// Least squares for v = 1 - exp(-b l).
FitResult fit_exp(std::span<const double> ls, std::span<const double> vs);

/// Minimises a one-dimensional residual over (lo, hi) on a geometric grid,
/// then golden-section search inside the bracket around the best grid point.
/// Throws ContractError if the minimum sits on the edge of the grid.
FitResult fit_scalar(const std::function<double(double)>& residual, double lo, double hi);

struct GridMaps {
  std::vector<double> grid;
  /// trace(i, j) = Tr(rho_0 rho_1), rho_y = Phi(alpha_y)[|+><+|].
  Eigen::MatrixXd trace;
  /// diamond(i, j) = p_diamond(Phi(alpha_i), Phi(alpha_j), p).
  Eigen::MatrixXd diamond;
};

GridMaps grid_maps(std::span<const double> grid, std::size_t p, const DiamondOptions& options = {});

struct CorrelationRow {
  std::size_t l = 0;
  /// Mean success probability per pair over the runs.
  std::vector<double> mean_success;
  double r_trace = 0.0;
  double r_diamond = 0.0;
};

struct CorrelationStudy {
  std::vector<AlphaPair> pairs;
  std::vector<double> trace;
  std::vector<double> diamond;
  std::vector<CorrelationRow> rows;
};

/// 5 pairs spanning the grid: (0,.1) (.2,.3) (.4,.5) (.6,.7) (.9,1).
std::vector<AlphaPair> correlation_pairs();

/// For each l, trains `runs` independent single-start models per pair
/// (streams keyed by l, pair, run) and correlates the mean success
/// probability with the trace-product and p_diamond values of the pairs.
CorrelationStudy correlation_study(const StrategySpec& base, std::span<const std::size_t> layers,
                                   std::span<const AlphaPair> pairs, std::size_t runs,
                                   const TrainOptions& train_options = {}, const DiamondOptions& diamond_options = {});

}  // namespace chandis
