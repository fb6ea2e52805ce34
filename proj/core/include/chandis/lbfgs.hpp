#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace chandis {

struct LbfgsOptions {
  int memory = 10;
  int max_iterations = 2000;
  /// Stop when |f_{k+1} - f_k| < f_tol.
  double f_tol = 1e-9;
  /// Stop when ||grad||_inf < g_tol.
  double g_tol = 1e-7;
  int max_linesearch = 40;
  double c1 = 1e-4;
  double c2 = 0.9;
};

enum class LbfgsStatus { ObjectiveConverged, GradientConverged, MaxIterations, LineSearchFailed, NonFinite };

std::string_view to_string(LbfgsStatus s);

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  int evaluations = 0;
  LbfgsStatus status = LbfgsStatus::MaxIterations;
  /// Objective after each accepted iteration (history[0] is the start point).
  std::vector<double> history;
};

/// f(x, grad) returns the objective and writes its gradient.
using GradientObjective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// Unconstrained limited-memory BFGS minimisation with a strong-Wolfe line search.
LbfgsResult minimize_lbfgs(const GradientObjective& f, Eigen::VectorXd x0, const LbfgsOptions& options = {});

}  // namespace chandis
