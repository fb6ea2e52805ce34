#include "chandis/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chandis/channels.hpp"
#include "chandis/errors.hpp"
#include "chandis/parallel.hpp"

namespace chandis {

namespace {

DensityMatrix plus_state() { return DensityMatrix(ComplexMatrix::Constant(2, 2, 0.5)); }

double contraction(double alpha) { return 1.0 - 4.0 * alpha / 3.0; }

// Golden-section minimisation on [a, b].
std::pair<double, int> golden(const std::function<double(double)>& f, double a, double b, double tol) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c);
  double fd = f(d);
  int it = 0;
  while (std::abs(b - a) > tol * (1.0 + std::abs(a) + std::abs(b)) && it < 200) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
    ++it;
  }
  return {0.5 * (a + b), it};
}

}  // namespace

double trace_product(const DensityMatrix& rho, double a, double b) {
  if (rho.dim() != 2) throw ShapeError("trace_product: expects a single-qubit state");
  const ComplexMatrix ra = chandis::apply(depolarizing(a), rho.matrix());
  const ComplexMatrix rb = chandis::apply(depolarizing(b), rho.matrix());
  return (ra * rb).trace().real();
}

double trace_product_closed_form(const Eigen::Vector3d& bloch, double a, double b) {
  return 0.5 * (1.0 + contraction(a) * contraction(b) * bloch.squaredNorm());
}

double trace_product_extremum(double eps) { return trace_product_extremum(eps, plus_state()); }

double trace_product_extremum(double eps, const DensityMatrix& rho) {
  if (!(eps >= 0.0 && eps < 1.0)) throw ContractError("trace_product_extremum: eps must be in [0, 1)");
  const double top = 1.0 - eps;
  auto f = [&](double alpha) { return trace_product(rho, alpha, alpha + eps); };
  const int steps = static_cast<int>(std::floor(top / kExtremumGridStep + 1e-9));
  int best = 0;
  double best_v = f(0.0);
  for (int i = 1; i <= steps; ++i) {
    const double v = f(i * kExtremumGridStep);
    if (v < best_v) {
      best_v = v;
      best = i;
    }
  }
  const double lo = std::max(0.0, (best - 1) * kExtremumGridStep);
  const double hi = std::min(top, (best + 1) * kExtremumGridStep);
  return golden(f, lo, hi, 1e-12).first;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("pearson: length mismatch");
  if (x.size() < 2) throw ContractError("pearson: need at least two points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) throw ContractError("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

FitResult fit_scalar(const std::function<double(double)>& residual, double lo, double hi) {
  if (!(lo > 0.0 && hi > lo)) throw ContractError("fit: bad search range");
  constexpr int points = 241;
  const double ratio = std::pow(hi / lo, 1.0 / (points - 1));
  std::vector<double> xs(points);
  int best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    xs[i] = lo * std::pow(ratio, i);
    const double v = residual(xs[i]);
    if (v < best_v) {
      best_v = v;
      best = i;
    }
  }
  if (best == 0 || best == points - 1) throw ContractError("fit: no bracket found in the search range");
  const auto [x, it] = golden(residual, xs[best - 1], xs[best + 1], 1e-14);
  FitResult r{x, residual(x), it};
  if (r.residual_sum > best_v) r = {xs[best], best_v, it};
  return r;
}

namespace {

void check_fit_input(std::span<const double> ls, std::span<const double> vs) {
  if (ls.size() != vs.size() || ls.empty()) throw ShapeError("fit: ls and vs must be non-empty and equal length");
  for (const double l : ls) {
    if (!(l > 0.0)) throw ContractError("fit: layer counts must be positive");
  }
}

}  // namespace

FitResult fit_power(std::span<const double> ls, std::span<const double> vs) {
  check_fit_input(ls, vs);
  return fit_scalar(
      [&](double a) {
        double s = 0.0;
        for (std::size_t i = 0; i < ls.size(); ++i) {
          const double d = std::pow(ls[i], -1.0 / a) - vs[i];
          s += d * d;
        }
        return s;
      },
      1e-4, 1e4);
}

FitResult fit_exp(std::span<const double> ls, std::span<const double> vs) {
  check_fit_input(ls, vs);
  return fit_scalar(
      [&](double b) {
        double s = 0.0;
        for (std::size_t i = 0; i < ls.size(); ++i) {
          const double d = 1.0 - std::exp(-b * ls[i]) - vs[i];
          s += d * d;
        }
        return s;
      },
      1e-5, 1e3);
}

GridMaps grid_maps(std::span<const double> grid, std::size_t p, const DiamondOptions& options) {
  const auto g = static_cast<Eigen::Index>(grid.size());
  GridMaps maps;
  maps.grid.assign(grid.begin(), grid.end());
  maps.trace.resize(g, g);
  maps.diamond = Eigen::MatrixXd::Constant(g, g, 0.5);
  const DensityMatrix rho = plus_state();
  for (Eigen::Index i = 0; i < g; ++i)
    for (Eigen::Index j = 0; j < g; ++j) maps.trace(i, j) = trace_product(rho, grid[i], grid[j]);

  // The map is symmetric; only the upper triangle is estimated.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> cells;
  for (Eigen::Index i = 0; i < g; ++i)
    for (Eigen::Index j = i + 1; j < g; ++j) cells.emplace_back(i, j);
  std::vector<double> values(cells.size());
  parallel_for(cells.size(), [&](std::size_t k) {
    const auto [i, j] = cells[k];
    values[k] = p_diamond(depolarizing(grid[i]), depolarizing(grid[j]), p, options);
  });
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const auto [i, j] = cells[k];
    maps.diamond(i, j) = values[k];
    maps.diamond(j, i) = values[k];
  }
  return maps;
}

std::vector<AlphaPair> correlation_pairs() { return {{0.0, 0.1}, {0.2, 0.3}, {0.4, 0.5}, {0.6, 0.7}, {0.9, 1.0}}; }

CorrelationStudy correlation_study(const StrategySpec& base, std::span<const std::size_t> layers,
                                   std::span<const AlphaPair> pairs, std::size_t runs,
                                   const TrainOptions& train_options, const DiamondOptions& diamond_options) {
  if (runs == 0) throw ContractError("correlation_study: runs must be >= 1");
  CorrelationStudy study;
  study.pairs.assign(pairs.begin(), pairs.end());
  const DensityMatrix rho = plus_state();
  for (const auto& pr : pairs) {
    study.trace.push_back(trace_product(rho, pr.alpha0, pr.alpha1));
    study.diamond.push_back(p_diamond(depolarizing(pr.alpha0), depolarizing(pr.alpha1), base.p, diamond_options));
  }
  const SeedPath root = SeedPath(base.seed).child("correlation");
  for (const std::size_t l : layers) {
    CorrelationRow row;
    row.l = l;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      StrategySpec spec = base;
      spec.l = l;
      spec.restarts = runs;
      spec.seed = root.child(l).child(k).seed();
      // Restarts double as the independent runs; their mean is the statistic.
      const TrainReport rep = train(depolarizing(pairs[k].alpha0), depolarizing(pairs[k].alpha1), spec, train_options);
      double sum = 0.0;
      std::size_t count = 0;
      for (const auto& rec : rep.per_restart) {
        if (std::isfinite(rec.final_value)) {
          sum += rec.final_value;
          ++count;
        }
      }
      row.mean_success.push_back(count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN());
    }
    row.r_trace = pearson(study.trace, row.mean_success);
    row.r_diamond = pearson(study.diamond, row.mean_success);
    study.rows.push_back(std::move(row));
  }
  return study;
}

}  // namespace chandis
