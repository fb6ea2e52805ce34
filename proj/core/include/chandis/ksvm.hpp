#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "chandis/qcore.hpp"

namespace chandis {

struct Interval {
  double lo;
  double hi;
  bool lo_closed = true;
  bool hi_closed = false;

  double length() const { return hi - lo; }
  bool contains(double a) const;
};

/// Class -1 draws alpha from the union `neg`, class +1 from `pos`.
struct IntervalSpec {
  std::vector<Interval> neg;
  std::vector<Interval> pos;
};

/// I1: [0,0.5) | [0.5,1];  I2: [0.1,0.2] | [0.7,0.9];  I3: [0,0.75] | [0.25,1];
/// I4: [0,0.25) u [0.5,0.75) | [0.25,0.5) u [0.75,1].
IntervalSpec intervals_I(int k);

/// Parses "lo:hi[,lo:hi...]/lo:hi[,...]" (neg/pos, closed-open pieces except a
/// trailing 1.0 which is closed) or "i1".."i4".
IntervalSpec parse_intervals(std::string_view text);

/// Uniform draw from a union of intervals, weighted by length.
double sample_union(std::span<const Interval> pieces, Rng& rng);

enum class InputPolicy { FixedPlus, RandomMixed };

std::string_view to_string(InputPolicy p);
InputPolicy input_policy_from_string(std::string_view name);

struct LabeledItem {
  DensityMatrix state;
  int label;  // -1 or +1
  double alpha;
};

struct LabeledSet {
  std::vector<LabeledItem> items;
  IntervalSpec spec;
  InputPolicy policy = InputPolicy::FixedPlus;
  std::size_t n_copies = 1;
  std::uint64_t seed = 0;
};

/// Per item: fair-coin label, alpha from that class's region, state
/// Phi(alpha)[rho_in] with rho_in = |+><+| or a Hilbert-Schmidt random state.
/// Copies are never materialised; kernels raise the trace to the power n.
LabeledSet make_interval_dataset(const IntervalSpec& spec, InputPolicy policy, std::size_t n_copies,
                                 std::size_t count, std::uint64_t seed);

/// [Tr(rho_i rho_j)]^n.
double kernel(const DensityMatrix& a, const DensityMatrix& b, std::size_t n = 1);
double kernel(const ComplexMatrix& a, const ComplexMatrix& b, std::size_t n = 1);

Eigen::MatrixXd gram(std::span<const DensityMatrix> states, std::size_t n = 1);

inline constexpr double kDefaultCap = 1e6;
inline constexpr double kSupportTol = 1e-8;

struct DualOptions {
  /// Box cap on every theta_i; nullopt means hard margin (no cap).
  std::optional<double> cap = kDefaultCap;
  /// Stop once the maximal violating pair gap falls below this.
  double tolerance = 1e-8;
  std::size_t max_updates = 100000;
};

enum class DualStatus { Converged, MaxUpdates, Unbounded };

std::string_view to_string(DualStatus s);

struct DualSolution {
  Eigen::VectorXd theta;
  DualStatus status = DualStatus::Converged;
  std::size_t updates = 0;
  /// Maximal violating pair gap at exit.
  double gap = 0.0;
  double objective = 0.0;
};

/// sum theta - 1/2 theta^T (y y^T o K) theta.
double dual_objective(const Eigen::VectorXd& theta, const Eigen::MatrixXd& k, std::span<const int> y);

/// Pairwise (SMO) ascent on the dual from theta = 0, working set chosen as the
/// maximal violating pair. Throws ContractError if all labels are equal.
DualSolution solve_dual(const Eigen::MatrixXd& k, std::span<const int> y, const DualOptions& options = {});

/// b = y_m - sum_i theta_i y_i K_im averaged over free support vectors
/// (0 < theta_m < cap), or over all support vectors if none is free.
double bias(const Eigen::VectorXd& theta, const Eigen::MatrixXd& k, std::span<const int> y,
            std::optional<double> cap = kDefaultCap);

/// Largest violation of the margin conditions on the training set.
double kkt_residual(const Eigen::VectorXd& theta, const Eigen::MatrixXd& k, std::span<const int> y, double b,
                    std::optional<double> cap = kDefaultCap);

struct KernelModel {
  std::vector<DensityMatrix> support_states;
  std::vector<int> support_labels;
  std::vector<double> theta;
  double b = 0.0;
  std::size_t n = 1;
  DualStatus status = DualStatus::Converged;
};

KernelModel train_kernel(const LabeledSet& train, const DualOptions& options = {});

/// sum theta_i y_i K(rho_i, rho)^n + b.
double predict_score(const KernelModel& model, const DensityMatrix& rho);

/// sgn(score) with sgn(0) = +1.
int predict_label(double score);
int predict_label(const KernelModel& model, const DensityMatrix& rho);

/// Scores divided by the largest magnitude (all zeros stay zero).
std::vector<double> normalize_scores(std::span<const double> scores);

struct KernelEvaluation {
  std::vector<double> scores;
  std::vector<int> predicted;
  double accuracy = 0.0;
};

KernelEvaluation evaluate_kernel(const KernelModel& model, const LabeledSet& test);

}  // namespace chandis
