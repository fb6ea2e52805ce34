#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "chandis/channels.hpp"
#include "chandis/errors.hpp"
#include "chandis/ksvm.hpp"
#include "test_util.hpp"

using namespace chandis;

namespace {

DensityMatrix dep_plus(double a) {
  return chandis::apply(depolarizing(a), DensityMatrix(chandis::test::ket_plus()));
}

// Exact maximiser of the box-constrained dual by enumerating active sets:
// every variable is at 0, at the cap, or free; free variables solve the KKT
// system with the equality constraint.
double brute_force_dual(const Eigen::MatrixXd& k, const std::vector<int>& y, double cap) {
  const int n = static_cast<int>(y.size());
  Eigen::MatrixXd q(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) q(i, j) = y[i] * y[j] * k(i, j);
  int combos = 1;
  for (int i = 0; i < n; ++i) combos *= 3;
  double best = -std::numeric_limits<double>::infinity();
  for (int code = 0; code < combos; ++code) {
    std::vector<int> state(n);
    for (int i = 0, c = code; i < n; ++i, c /= 3) state[i] = c % 3;  // 0: lower, 1: upper, 2: free
    std::vector<int> free;
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (state[i] == 1) theta(i) = cap;
      if (state[i] == 2) free.push_back(i);
    }
    if (!free.empty()) {
      const int m = static_cast<int>(free.size());
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m + 1, m + 1);
      Eigen::VectorXd rhs(m + 1);
      double fixed_y = 0.0;
      for (int i = 0; i < n; ++i) fixed_y += y[i] * theta(i);
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) a(r, c) = q(free[r], free[c]);
        a(r, m) = y[free[r]];
        a(m, r) = y[free[r]];
        rhs(r) = 1.0 - q.row(free[r]).dot(theta);
      }
      rhs(m) = -fixed_y;
      const Eigen::VectorXd sol = a.completeOrthogonalDecomposition().solve(rhs);
      if ((a * sol - rhs).norm() > 1e-9) continue;
      bool ok = true;
      for (int r = 0; r < m; ++r) {
        if (sol(r) < -1e-12 || sol(r) > cap + 1e-12) ok = false;
        theta(free[r]) = sol(r);
      }
      if (!ok) continue;
    }
    double eq = 0.0;
    for (int i = 0; i < n; ++i) eq += y[i] * theta(i);
    if (std::abs(eq) > 1e-9) continue;
    best = std::max(best, theta.sum() - 0.5 * theta.dot(q * theta));
  }
  return best;
}

}  // namespace

TEST(Kernel, Examples) {
  EXPECT_NEAR(kernel(DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 0)), 1.0, 1e-15);
  EXPECT_NEAR(kernel(DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1), 3), 0.0, 1e-15);
  for (const double a : {0.0, 0.2, 0.6})
    for (const double b : {0.1, 0.75, 1.0})
      for (const std::size_t n : {1u, 2u, 3u}) {
        const double c = 0.5 * (1 + (1 - 4 * a / 3) * (1 - 4 * b / 3));
        EXPECT_NEAR(kernel(dep_plus(a), dep_plus(b), n), std::pow(c, static_cast<double>(n)), 1e-14);
      }
}

TEST(Kernel, TensorPowerIdentity) {
  Rng rng(1);
  for (int t = 0; t < 10; ++t) {
    const auto a = random_mixed_state(2, rng);
    const auto b = random_mixed_state(2, rng);
    ComplexMatrix ap = a.matrix();
    ComplexMatrix bp = b.matrix();
    for (std::size_t n = 1; n <= 3; ++n) {
      EXPECT_NEAR(kernel(a, b, n), kernel(ap, bp, 1), 1e-10);
      ap = tensor(ap, a.matrix());
      bp = tensor(bp, b.matrix());
    }
  }
}

TEST(Gram, Properties) {
  const std::vector<DensityMatrix> same(4, DensityMatrix::basis(2, 1));
  EXPECT_LT((gram(same) - Eigen::MatrixXd::Ones(4, 4)).cwiseAbs().maxCoeff(), 1e-15);
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    std::vector<DensityMatrix> states;
    for (int i = 0; i < 12; ++i) states.push_back(random_mixed_state(2, rng));
    for (const std::size_t n : {1u, 2u, 3u}) {
      const Eigen::MatrixXd g = gram(states, n);
      ASSERT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues().minCoeff(), -1e-9);
      for (int i = 0; i < 12; ++i) {
        const double purity = expectation(states[static_cast<std::size_t>(i)], states[static_cast<std::size_t>(i)].matrix());
        EXPECT_NEAR(g(i, i), std::pow(purity, static_cast<double>(n)), 1e-12);
        EXPECT_LE(g(i, i), 1.0 + 1e-12);
      }
    }
  }
}

TEST(SolveDual, OrthogonalPair) {
  const Eigen::MatrixXd k = Eigen::MatrixXd::Identity(2, 2);
  const std::vector<int> y{1, -1};
  const auto sol = solve_dual(k, y);
  EXPECT_EQ(sol.status, DualStatus::Converged);
  EXPECT_NEAR(sol.theta(0), 1.0, 1e-9);
  EXPECT_NEAR(sol.theta(1), 1.0, 1e-9);
  EXPECT_NEAR(bias(sol.theta, k, y), 0.0, 1e-12);
}

TEST(SolveDual, ContradictoryPointsNeedACap) {
  const Eigen::MatrixXd k = Eigen::MatrixXd::Ones(2, 2);
  const std::vector<int> y{1, -1};
  DualOptions hard;
  hard.cap = std::nullopt;
  EXPECT_NE(solve_dual(k, y, hard).status, DualStatus::Converged);
  DualOptions soft;
  soft.cap = 5.0;
  const auto sol = solve_dual(k, y, soft);
  EXPECT_EQ(sol.status, DualStatus::Converged);
  EXPECT_NEAR(sol.theta(0), 5.0, 1e-12);
}

TEST(SolveDual, AllLabelsEqualIsContractError) {
  const std::vector<int> y{1, 1, 1};
  EXPECT_THROW(solve_dual(Eigen::MatrixXd::Identity(3, 3), y), ContractError);
}

TEST(SolveDual, MatchesBruteForceOnSixPoints) {
  Rng rng(3);
  int checked = 0;
  for (int t = 0; t < 40; ++t) {
    std::vector<DensityMatrix> states;
    std::vector<int> y;
    for (int i = 0; i < 6; ++i) {
      states.push_back(random_mixed_state(2, rng));
      y.push_back(i % 2 == 0 ? 1 : -1);
    }
    const std::size_t n = 1 + static_cast<std::size_t>(t % 3);
    const double cap = t % 2 == 0 ? 10.0 : 1000.0;
    const Eigen::MatrixXd k = gram(states, n);
    DualOptions opt;
    opt.cap = cap;
    const auto sol = solve_dual(k, y, opt);
    ASSERT_EQ(sol.status, DualStatus::Converged);
    const double b = bias(sol.theta, k, y, cap);
    EXPECT_LT(kkt_residual(sol.theta, k, y, b, cap), 1e-6);
    double eq = 0.0;
    for (int i = 0; i < 6; ++i) eq += y[static_cast<std::size_t>(i)] * sol.theta(i);
    EXPECT_LT(std::abs(eq), 1e-8);
    EXPECT_NEAR(sol.objective, dual_objective(sol.theta, k, y), 1e-10);
    EXPECT_NEAR(sol.objective, brute_force_dual(k, y, cap), 1e-4);
    ++checked;
  }
  EXPECT_EQ(checked, 40);
}

TEST(Bias, PerSupportVectorValuesAgreeOnSeparableData) {
  Rng rng(4);
  const auto train = make_interval_dataset(intervals_I(2), InputPolicy::FixedPlus, 1, 60, 11);
  std::vector<DensityMatrix> states;
  std::vector<int> y;
  for (const auto& it : train.items) {
    states.push_back(it.state);
    y.push_back(it.label);
  }
  const Eigen::MatrixXd k = gram(states);
  const auto sol = solve_dual(k, y);
  ASSERT_EQ(sol.status, DualStatus::Converged);
  const double b = bias(sol.theta, k, y);
  for (int m = 0; m < k.rows(); ++m) {
    if (sol.theta(m) <= kSupportTol || sol.theta(m) >= kDefaultCap - kSupportTol) continue;
    double bm = y[static_cast<std::size_t>(m)];
    for (int i = 0; i < k.rows(); ++i) bm -= sol.theta(i) * y[static_cast<std::size_t>(i)] * k(i, m);
    EXPECT_NEAR(bm, b, 1e-6);
  }
  for (int m = 0; m < k.rows(); ++m) {
    if (sol.theta(m) <= kSupportTol) continue;
    double score = b;
    for (int i = 0; i < k.rows(); ++i) score += sol.theta(i) * y[static_cast<std::size_t>(i)] * k(i, m);
    EXPECT_EQ(predict_label(score), y[static_cast<std::size_t>(m)]);
  }
}

TEST(Predict, InvariantUnderPermutation) {
  const auto train = make_interval_dataset(intervals_I(1), InputPolicy::FixedPlus, 1, 40, 3);
  auto shuffled = train;
  std::reverse(shuffled.items.begin(), shuffled.items.end());
  const auto m1 = train_kernel(train);
  const auto m2 = train_kernel(shuffled);
  for (const double a : {0.05, 0.3, 0.49, 0.51, 0.9}) {
    EXPECT_NEAR(predict_score(m1, dep_plus(a)), predict_score(m2, dep_plus(a)), 1e-6);
  }
}

TEST(Predict, LabelsAndNormalisation) {
  EXPECT_EQ(predict_label(0.0), 1);
  EXPECT_EQ(predict_label(-1e-300), -1);
  const std::vector<double> s{2.0, -4.0, 1.0};
  const auto n = normalize_scores(s);
  EXPECT_DOUBLE_EQ(n[1], -1.0);
  EXPECT_DOUBLE_EQ(n[0], 0.5);
  const std::vector<double> z{0.0, 0.0};
  EXPECT_EQ(normalize_scores(z), z);
}

TEST(Intervals, Definitions) {
  const auto i1 = intervals_I(1);
  EXPECT_FALSE(i1.neg[0].contains(0.5));
  EXPECT_TRUE(i1.pos[0].contains(0.5));
  EXPECT_TRUE(i1.pos[0].contains(1.0));
  const auto i2 = intervals_I(2);
  EXPECT_LT(i2.neg[0].hi, i2.pos[0].lo);
  const auto i3 = intervals_I(3);
  EXPECT_DOUBLE_EQ(i3.pos[0].lo, 0.25);
  EXPECT_DOUBLE_EQ(i3.neg[0].hi, 0.75);
  const auto i4 = intervals_I(4);
  EXPECT_EQ(i4.neg.size(), 2u);
  EXPECT_EQ(i4.pos.size(), 2u);
  EXPECT_THROW(intervals_I(5), ConfigError);
  const auto custom = parse_intervals("0:0.3,0.6:0.7/0.3:0.6");
  EXPECT_EQ(custom.neg.size(), 2u);
  EXPECT_EQ(custom.pos.size(), 1u);
  EXPECT_THROW(parse_intervals("0:0.3"), ConfigError);
  EXPECT_EQ(input_policy_from_string("random-mixed"), InputPolicy::RandomMixed);
}

TEST(Intervals, DatasetRespectsRegions) {
  const auto d1 = make_interval_dataset(intervals_I(1), InputPolicy::FixedPlus, 1, 500, 5);
  for (const auto& it : d1.items) {
    if (it.label == -1) EXPECT_LT(it.alpha, 0.5);
    else EXPECT_GE(it.alpha, 0.5);
  }
  const auto d4 = make_interval_dataset(intervals_I(4), InputPolicy::FixedPlus, 1, 500, 5);
  int in_upper_piece = 0;
  for (const auto& it : d4.items) {
    if (it.label == 1 && it.alpha >= 0.75) ++in_upper_piece;
  }
  EXPECT_GT(in_upper_piece, 50);
  const auto again = make_interval_dataset(intervals_I(4), InputPolicy::FixedPlus, 1, 500, 5);
  EXPECT_EQ(again.items[17].alpha, d4.items[17].alpha);
}

TEST(KernelClassifier, SeparatesI2) {
  const auto train = make_interval_dataset(intervals_I(2), InputPolicy::FixedPlus, 1, 100, 1);
  const auto test = make_interval_dataset(intervals_I(2), InputPolicy::FixedPlus, 1, 400, 2);
  const auto model = train_kernel(train);
  EXPECT_EQ(model.status, DualStatus::Converged);
  EXPECT_GE(evaluate_kernel(model, test).accuracy, 0.98);
}
