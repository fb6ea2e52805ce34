#include "chandis/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace chandis {

std::string_view to_string(LbfgsStatus s) {
  switch (s) {
    case LbfgsStatus::ObjectiveConverged: return "objective-converged";
    case LbfgsStatus::GradientConverged: return "gradient-converged";
    case LbfgsStatus::MaxIterations: return "max-iterations";
    case LbfgsStatus::LineSearchFailed: return "line-search-failed";
    case LbfgsStatus::NonFinite: return "non-finite";
  }
  return "?";
}

namespace {

struct Point {
  double alpha;
  double f;
  double slope;
};

// Minimiser of the cubic through (a, fa, da), (b, fb, db); falls back to bisection.
double cubic_step(const Point& lo, const Point& hi) {
  const double d1 = lo.slope + hi.slope - 3.0 * (lo.f - hi.f) / (lo.alpha - hi.alpha);
  const double disc = d1 * d1 - lo.slope * hi.slope;
  const double mid = 0.5 * (lo.alpha + hi.alpha);
  if (disc < 0.0) return mid;
  const double d2 = std::copysign(std::sqrt(disc), hi.alpha - lo.alpha);
  const double t =
      hi.alpha - (hi.alpha - lo.alpha) * (hi.slope + d2 - d1) / (hi.slope - lo.slope + 2.0 * d2);
  const double a = std::min(lo.alpha, hi.alpha);
  const double b = std::max(lo.alpha, hi.alpha);
  const double margin = 0.1 * (b - a);
  if (!std::isfinite(t) || t < a + margin || t > b - margin) return mid;
  return t;
}

class LineSearch {
public:
  LineSearch(const GradientObjective& f, const LbfgsOptions& opt, int& evals)
      : f_(f), opt_(opt), evals_(evals) {}

  // Returns true and fills (x, fx, g) on success.
  bool run(const Eigen::VectorXd& x0, double f0, const Eigen::VectorXd& g0, const Eigen::VectorXd& dir,
           double alpha0, Eigen::VectorXd& x, double& fx, Eigen::VectorXd& g, bool& non_finite) {
    const double slope0 = g0.dot(dir);
    non_finite = false;
    if (slope0 >= 0.0) return false;
    Point prev{0.0, f0, slope0};
    double alpha = alpha0;
    for (int it = 0; it < opt_.max_linesearch; ++it) {
      const Point cur = eval(x0, dir, alpha, x, fx, g);
      if (!std::isfinite(cur.f)) {
        non_finite = true;
        return false;
      }
      if (cur.f > f0 + opt_.c1 * alpha * slope0 || (it > 0 && cur.f >= prev.f)) {
        return zoom(x0, f0, slope0, dir, prev, cur, x, fx, g, non_finite);
      }
      if (std::abs(cur.slope) <= -opt_.c2 * slope0) return true;
      if (cur.slope >= 0.0) return zoom(x0, f0, slope0, dir, cur, prev, x, fx, g, non_finite);
      prev = cur;
      alpha *= 2.0;
    }
    return false;
  }

private:
  Point eval(const Eigen::VectorXd& x0, const Eigen::VectorXd& dir, double alpha, Eigen::VectorXd& x, double& fx,
             Eigen::VectorXd& g) {
    x = x0 + alpha * dir;
    fx = f_(x, g);
    ++evals_;
    return {alpha, fx, g.dot(dir)};
  }

  bool zoom(const Eigen::VectorXd& x0, double f0, double slope0, const Eigen::VectorXd& dir, Point lo, Point hi,
            Eigen::VectorXd& x, double& fx, Eigen::VectorXd& g, bool& non_finite) {
    for (int it = 0; it < opt_.max_linesearch; ++it) {
      const double alpha = cubic_step(lo, hi);
      const Point cur = eval(x0, dir, alpha, x, fx, g);
      if (!std::isfinite(cur.f)) {
        non_finite = true;
        return false;
      }
      if (cur.f > f0 + opt_.c1 * alpha * slope0 || cur.f >= lo.f) {
        hi = cur;
      } else {
        if (std::abs(cur.slope) <= -opt_.c2 * slope0) return true;
        if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = cur;
      }
      if (std::abs(hi.alpha - lo.alpha) < 1e-16 * std::max(1.0, lo.alpha)) break;
    }
    // Accept the best sufficient-decrease point seen, if any.
    if (lo.alpha > 0.0 && lo.f < f0) {
      eval(x0, dir, lo.alpha, x, fx, g);
      return true;
    }
    return false;
  }

  const GradientObjective& f_;
  const LbfgsOptions& opt_;
  int& evals_;
};

}  // namespace

LbfgsResult minimize_lbfgs(const GradientObjective& f, Eigen::VectorXd x0, const LbfgsOptions& opt) {
  LbfgsResult res;
  const auto n = x0.size();
  Eigen::VectorXd g(n);
  double fx = f(x0, g);
  res.evaluations = 1;
  res.x = x0;
  res.f = fx;
  res.history.push_back(fx);
  if (!std::isfinite(fx) || !g.allFinite()) {
    res.status = LbfgsStatus::NonFinite;
    return res;
  }

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  Eigen::VectorXd x = x0, x_new(n), g_new(n), dir(n);
  std::vector<double> alpha_buf;
  LineSearch ls(f, opt, res.evaluations);

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() < opt.g_tol) {
      res.status = LbfgsStatus::GradientConverged;
      break;
    }
    // Two-loop recursion.
    dir = -g;
    const std::size_t m = s_hist.size();
    alpha_buf.assign(m, 0.0);
    for (std::size_t i = m; i-- > 0;) {
      alpha_buf[i] = rho_hist[i] * s_hist[i].dot(dir);
      dir -= alpha_buf[i] * y_hist[i];
    }
    if (m > 0) dir *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t i = 0; i < m; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(dir);
      dir += (alpha_buf[i] - beta) * s_hist[i];
    }
    if (g.dot(dir) >= 0.0) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -g;
    }
    const double alpha0 = m == 0 ? std::min(1.0, 1.0 / g.lpNorm<Eigen::Infinity>()) : 1.0;

    double f_new = 0.0;
    bool non_finite = false;
    if (!ls.run(x, fx, g, dir, alpha0, x_new, f_new, g_new, non_finite)) {
      if (non_finite) {
        res.status = LbfgsStatus::NonFinite;
        break;
      }
      if (m > 0) {
        // Retry once along steepest descent with a fresh memory.
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        continue;
      }
      res.status = LbfgsStatus::LineSearchFailed;
      break;
    }

    Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    const double df = std::abs(f_new - fx);
    x = x_new;
    g = g_new;
    fx = f_new;
    res.iterations = iter + 1;
    res.history.push_back(fx);
    if (sy > 1e-12 * y.squaredNorm()) {
      if (static_cast<int>(s_hist.size()) == opt.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }
    if (df < opt.f_tol) {
      res.status = LbfgsStatus::ObjectiveConverged;
      break;
    }
  }
  res.x = x;
  res.f = fx;
  return res;
}

}  // namespace chandis
