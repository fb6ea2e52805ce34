#include "chandis/ksvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "chandis/channels.hpp"
#include "chandis/errors.hpp"
#include "chandis/parallel.hpp"
#include "chandis/random.hpp"

namespace chandis {

bool Interval::contains(double a) const {
  const bool above = lo_closed ? a >= lo : a > lo;
  const bool below = hi_closed ? a <= hi : a < hi;
  return above && below;
}

IntervalSpec intervals_I(int k) {
  switch (k) {
    case 1:
      return {{{0.0, 0.5, true, false}}, {{0.5, 1.0, true, true}}};
    case 2:
      return {{{0.1, 0.2, true, true}}, {{0.7, 0.9, true, true}}};
    case 3:
      return {{{0.0, 0.75, true, true}}, {{0.25, 1.0, true, true}}};
    case 4:
      // The positive class is the union of the two pieces.
      return {{{0.0, 0.25, true, false}, {0.5, 0.75, true, false}},
              {{0.25, 0.5, true, false}, {0.75, 1.0, true, true}}};
    default:
      throw ConfigError("intervals: expected I1..I4, got I" + std::to_string(k));
  }
}

namespace {

std::vector<Interval> parse_union(std::string_view text) {
  std::vector<Interval> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto piece = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    const auto colon = piece.find(':');
    if (colon == std::string_view::npos) throw ConfigError("intervals: piece '" + std::string(piece) + "' lacks ':'");
    double lo = 0.0;
    double hi = 0.0;
    try {
      lo = std::stod(std::string(piece.substr(0, colon)));
      hi = std::stod(std::string(piece.substr(colon + 1)));
    } catch (const std::exception&) {
      throw ConfigError("intervals: cannot parse '" + std::string(piece) + "'");
    }
    if (!(lo >= 0.0 && hi <= 1.0 && lo < hi)) throw ConfigError("intervals: pieces must satisfy 0 <= lo < hi <= 1");
    out.push_back({lo, hi, true, hi == 1.0});
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

IntervalSpec parse_intervals(std::string_view text) {
  if (text.size() == 2 && (text[0] == 'i' || text[0] == 'I') && text[1] >= '1' && text[1] <= '4') {
    return intervals_I(text[1] - '0');
  }
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) throw ConfigError("intervals: expected i1..i4 or 'neg/pos' bounds");
  return {parse_union(text.substr(0, slash)), parse_union(text.substr(slash + 1))};
}

double sample_union(std::span<const Interval> pieces, Rng& rng) {
  double total = 0.0;
  for (const auto& p : pieces) {
    if (!(p.length() > 0.0)) throw ContractError("sample_union: empty interval");
    total += p.length();
  }
  if (pieces.empty()) throw ContractError("sample_union: no intervals");
  for (;;) {
    double u = uniform(rng, 0.0, total);
    for (const auto& p : pieces) {
      if (u < p.length() || &p == &pieces.back()) {
        const double a = p.lo + std::min(u, p.length());
        if (p.contains(a)) return a;
        break;  // open endpoint hit: redraw
      }
      u -= p.length();
    }
  }
}

std::string_view to_string(InputPolicy p) { return p == InputPolicy::FixedPlus ? "plus" : "random-mixed"; }

InputPolicy input_policy_from_string(std::string_view name) {
  if (name == "plus" || name == "fixed" || name == "fixed-plus") return InputPolicy::FixedPlus;
  if (name == "random-mixed" || name == "random" || name == "mixed") return InputPolicy::RandomMixed;
  throw ConfigError("unknown input policy '" + std::string(name) + "' (expected plus or random-mixed)");
}

LabeledSet make_interval_dataset(const IntervalSpec& spec, InputPolicy policy, std::size_t n_copies,
                                 std::size_t count, std::uint64_t seed) {
  if (n_copies == 0) throw ContractError("make_interval_dataset: n_copies must be >= 1");
  LabeledSet set;
  set.spec = spec;
  set.policy = policy;
  set.n_copies = n_copies;
  set.seed = seed;
  set.items.reserve(count);
  Rng rng = SeedPath(seed).child("interval-dataset").rng();
  ComplexMatrix plus = ComplexMatrix::Constant(2, 2, 0.5);
  const DensityMatrix plus_state(plus);
  for (std::size_t j = 0; j < count; ++j) {
    const int y = coin(rng) ? 1 : -1;
    const double alpha = sample_union(y < 0 ? spec.neg : spec.pos, rng);
    const DensityMatrix in = policy == InputPolicy::FixedPlus ? plus_state : random_mixed_state(2, rng);
    set.items.push_back({chandis::apply(depolarizing(alpha), in), y, alpha});
  }
  return set;
}

double kernel(const ComplexMatrix& a, const ComplexMatrix& b, std::size_t n) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("kernel: dimension mismatch");
  if (n == 0) throw ContractError("kernel: n must be >= 1");
  // Tr(AB) = sum_ij A_ij B_ji
  const cplx t = (a.transpose().array() * b.array()).sum();
  if (std::abs(t.imag()) > 1e-12) throw ContractError("kernel: trace has an imaginary part");
  return std::pow(t.real(), static_cast<double>(n));
}

double kernel(const DensityMatrix& a, const DensityMatrix& b, std::size_t n) {
  return kernel(a.matrix(), b.matrix(), n);
}

Eigen::MatrixXd gram(std::span<const DensityMatrix> states, std::size_t n) {
  const auto m = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXd k(m, m);
  parallel_for(states.size(), [&](std::size_t ui) {
    const auto i = static_cast<Eigen::Index>(ui);
    for (Eigen::Index j = 0; j <= i; ++j) k(i, j) = kernel(states[ui], states[static_cast<std::size_t>(j)], n);
  });
  k.triangularView<Eigen::StrictlyUpper>() = k.transpose();
  return k;
}

std::string_view to_string(DualStatus s) {
  switch (s) {
    case DualStatus::Converged:
      return "converged";
    case DualStatus::MaxUpdates:
      return "max-updates";
    case DualStatus::Unbounded:
      return "unbounded";
  }
  return "?";
}

double dual_objective(const Eigen::VectorXd& theta, const Eigen::MatrixXd& k, std::span<const int> y) {
  const auto m = k.rows();
  Eigen::VectorXd ty(m);
  for (Eigen::Index i = 0; i < m; ++i) ty(i) = theta(i) * y[static_cast<std::size_t>(i)];
  return theta.sum() - 0.5 * ty.dot(k * ty);
}

namespace {

void check_problem(const Eigen::MatrixXd& k, std::span<const int> y) {
  if (k.rows() != k.cols() || static_cast<std::size_t>(k.rows()) != y.size()) {
    throw ShapeError("dual: Gram matrix and labels disagree in size");
  }
  bool pos = false;
  bool neg = false;
  for (const int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw ContractError("dual: labels must be +1 or -1");
  }
  if (!(pos && neg)) throw ContractError("dual: infeasible, all labels are equal");
}

constexpr double kTau = 1e-12;
constexpr double kUnboundedTheta = 1e12;

}  // namespace

DualSolution solve_dual(const Eigen::MatrixXd& k, std::span<const int> y, const DualOptions& options) {
  check_problem(k, y);
  const auto m = k.rows();
  const double cap = options.cap.value_or(std::numeric_limits<double>::infinity());
  if (!(cap > 0.0)) throw ContractError("dual: cap must be positive");
  auto yi = [&](Eigen::Index i) { return static_cast<double>(y[static_cast<std::size_t>(i)]); };

  DualSolution sol;
  Eigen::VectorXd& theta = sol.theta;
  theta = Eigen::VectorXd::Zero(m);
  // Minimisation form: f = 1/2 theta^T Q theta - sum theta, G = Q theta - 1.
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(m, -1.0);
  auto in_up = [&](Eigen::Index t) { return yi(t) > 0 ? theta(t) < cap : theta(t) > 0.0; };
  auto in_low = [&](Eigen::Index t) { return yi(t) > 0 ? theta(t) > 0.0 : theta(t) < cap; };

  for (;;) {
    // Second-order working-set selection.
    Eigen::Index i = -1;
    double gmax = -std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < m; ++t) {
      if (in_up(t) && -yi(t) * grad(t) > gmax) {
        gmax = -yi(t) * grad(t);
        i = t;
      }
    }
    double gmin = std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < m; ++t) {
      if (!in_low(t)) continue;
      const double v = -yi(t) * grad(t);
      gmin = std::min(gmin, v);
      if (i < 0 || v >= gmax) continue;
      const double b = gmax - v;
      double a = k(i, i) + k(t, t) - 2.0 * k(i, t);
      if (a <= 0.0) a = kTau;
      if (-b * b / a < best) {
        best = -b * b / a;
        j = t;
      }
    }
    sol.gap = gmax - gmin;
    if (i < 0 || j < 0 || sol.gap < options.tolerance) {
      sol.status = DualStatus::Converged;
      break;
    }
    if (sol.updates >= options.max_updates) {
      sol.status = DualStatus::MaxUpdates;
      break;
    }

    // Move theta_i += y_i t, theta_j -= y_j t, which keeps sum theta y fixed.
    double a = k(i, i) + k(j, j) - 2.0 * k(i, j);
    if (a <= 0.0) a = kTau;
    const double b = gmax + yi(j) * grad(j);
    double step = b / a;
    const double room_i = yi(i) > 0 ? cap - theta(i) : theta(i);
    const double room_j = yi(j) > 0 ? theta(j) : cap - theta(j);
    step = std::min({step, room_i, room_j});
    if (!std::isfinite(step) || step > kUnboundedTheta) {
      sol.status = DualStatus::Unbounded;
      break;
    }
    const double old_i = theta(i);
    const double old_j = theta(j);
    theta(i) += yi(i) * step;
    theta(j) -= yi(j) * step;
    // Snap onto the bound that limited the step so set membership is exact.
    if (step == room_i) theta(i) = yi(i) > 0 ? cap : 0.0;
    if (step == room_j) theta(j) = yi(j) > 0 ? 0.0 : cap;
    const double di = theta(i) - old_i;
    const double dj = theta(j) - old_j;
    for (Eigen::Index t = 0; t < m; ++t) {
      grad(t) += yi(t) * (yi(i) * k(t, i) * di + yi(j) * k(t, j) * dj);
    }
    ++sol.updates;
    if (theta.maxCoeff() > kUnboundedTheta) {
      sol.status = DualStatus::Unbounded;
      break;
    }
  }
  sol.objective = dual_objective(theta, k, y);
  return sol;
}

double bias(const Eigen::VectorXd& theta, const Eigen::MatrixXd& k, std::span<const int> y, std::optional<double> cap) {
  check_problem(k, y);
  const auto m = k.rows();
  const double c = cap.value_or(std::numeric_limits<double>::infinity());
  Eigen::VectorXd ty(m);
  for (Eigen::Index i = 0; i < m; ++i) ty(i) = theta(i) * y[static_cast<std::size_t>(i)];
  const Eigen::VectorXd f = k * ty;
  double free_sum = 0.0;
  double all_sum = 0.0;
  std::size_t free_count = 0;
  std::size_t all_count = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (theta(i) <= kSupportTol) continue;
    const double bi = y[static_cast<std::size_t>(i)] - f(i);
    all_sum += bi;
    ++all_count;
    if (theta(i) < c * (1.0 - 1e-12)) {
      free_sum += bi;
      ++free_count;
    }
  }
  if (all_count == 0) throw ContractError("bias: no support vector");
  return free_count > 0 ? free_sum / static_cast<double>(free_count) : all_sum / static_cast<double>(all_count);
}

double kkt_residual(const Eigen::VectorXd& theta, const Eigen::MatrixXd& k, std::span<const int> y, double b,
                    std::optional<double> cap) {
  const auto m = k.rows();
  const double c = cap.value_or(std::numeric_limits<double>::infinity());
  Eigen::VectorXd ty(m);
  for (Eigen::Index i = 0; i < m; ++i) ty(i) = theta(i) * y[static_cast<std::size_t>(i)];
  const Eigen::VectorXd f = k * ty;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double margin = y[static_cast<std::size_t>(i)] * (f(i) + b);
    double v = 0.0;
    if (theta(i) <= kSupportTol) {
      v = std::max(0.0, 1.0 - margin);
    } else if (theta(i) >= c * (1.0 - 1e-12)) {
      v = std::max(0.0, margin - 1.0);
    } else {
      v = std::abs(margin - 1.0);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

KernelModel train_kernel(const LabeledSet& train, const DualOptions& options) {
  std::vector<DensityMatrix> states;
  std::vector<int> labels;
  for (const auto& item : train.items) {
    states.push_back(item.state);
    labels.push_back(item.label);
  }
  const Eigen::MatrixXd k = gram(states, train.n_copies);
  const DualSolution sol = solve_dual(k, labels, options);
  KernelModel model;
  model.n = train.n_copies;
  model.status = sol.status;
  model.b = bias(sol.theta, k, labels, options.cap);
  for (std::size_t i = 0; i < states.size(); ++i) {
    const double t = sol.theta(static_cast<Eigen::Index>(i));
    if (t <= kSupportTol) continue;
    model.support_states.push_back(states[i]);
    model.support_labels.push_back(labels[i]);
    model.theta.push_back(t);
  }
  return model;
}

double predict_score(const KernelModel& model, const DensityMatrix& rho) {
  double s = model.b;
  for (std::size_t i = 0; i < model.theta.size(); ++i) {
    s += model.theta[i] * model.support_labels[i] * kernel(model.support_states[i], rho, model.n);
  }
  return s;
}

int predict_label(double score) { return score >= 0.0 ? 1 : -1; }

int predict_label(const KernelModel& model, const DensityMatrix& rho) {
  return predict_label(predict_score(model, rho));
}

std::vector<double> normalize_scores(std::span<const double> scores) {
  double peak = 0.0;
  for (const double s : scores) peak = std::max(peak, std::abs(s));
  std::vector<double> out(scores.begin(), scores.end());
  if (peak > 0.0) {
    for (auto& s : out) s /= peak;
  }
  return out;
}

KernelEvaluation evaluate_kernel(const KernelModel& model, const LabeledSet& test) {
  if (test.items.empty()) throw ContractError("evaluate_kernel: empty test set");
  KernelEvaluation ev;
  ev.scores.resize(test.items.size());
  parallel_for(test.items.size(), [&](std::size_t i) { ev.scores[i] = predict_score(model, test.items[i].state); });
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.items.size(); ++i) {
    const int yhat = predict_label(ev.scores[i]);
    ev.predicted.push_back(yhat);
    correct += yhat == test.items[i].label ? 1 : 0;
  }
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(test.items.size());
  return ev;
}

}  // namespace chandis
