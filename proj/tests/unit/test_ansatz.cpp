#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "chandis/ansatz.hpp"
#include "chandis/errors.hpp"
#include "chandis/lbfgs.hpp"
#include "test_util.hpp"

using namespace chandis;
using chandis::test::max_abs_diff;

namespace {

std::vector<double> random_theta(std::size_t n, Rng& rng) {
  std::vector<double> t(n);
  for (auto& x : t) x = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  return t;
}

ComplexMatrix cx01() {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
  return m;
}

ComplexMatrix rot(const ComplexMatrix& sigma, double t) {
  return std::cos(t) * ComplexMatrix::Identity(2, 2) - cplx(0, std::sin(t)) * sigma;
}

}  // namespace

TEST(Hea, ParameterCounts) {
  EXPECT_EQ(hea(4, 1).param_count(), 12u);
  EXPECT_EQ(hea(5, 14).param_count(), 210u);
  EXPECT_EQ(hea(2, 3).param_count(), 18u);
  EXPECT_EQ(hea(1, 2).param_count(), 6u);
}

TEST(Hea, ZeroThetaLeavesEntanglersOnly) {
  const std::vector<double> z2(6, 0.0);
  EXPECT_LT(max_abs_diff(unitary(hea(2, 1), z2), cx01()), 1e-15);
  const std::vector<double> z1(3, 0.0);
  EXPECT_LT(max_abs_diff(unitary(hea(1, 1), z1), ComplexMatrix::Identity(2, 2)), 1e-15);
  // q = 3: ring CX(0,1) CX(1,2) CX(2,0) applied in that order on basis states
  const std::vector<double> z3(9, 0.0);
  const ComplexMatrix u = unitary(hea(3, 1), z3);
  for (std::size_t in = 0; in < 8; ++in) {
    std::size_t b0 = in >> 2 & 1, b1 = in >> 1 & 1, b2 = in & 1;
    b1 ^= b0;
    b2 ^= b1;
    b0 ^= b2;
    const std::size_t out = b0 << 2 | b1 << 1 | b2;
    EXPECT_NEAR(std::abs(u(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in))), 1.0, 1e-15);
  }
}

TEST(Unitary, RxPiIsMinusIdentity) {
  ParamCircuit c(1);
  c.add_rotation(GateKind::Rx, 0);
  const std::vector<double> t{std::numbers::pi};
  EXPECT_LT(max_abs_diff(unitary(c, t), -ComplexMatrix::Identity(2, 2)), 1e-15);
}

TEST(Unitary, CryZeroIsIdentity) {
  ParamCircuit c(2);
  c.add_cry(0, 1);
  const std::vector<double> t{0.0};
  EXPECT_LT(max_abs_diff(unitary(c, t), ComplexMatrix::Identity(4, 4)), 1e-15);
}

TEST(Unitary, LengthMismatch) {
  const std::vector<double> t(5, 0.0);
  EXPECT_THROW(unitary(hea(2, 1), t), ShapeError);
  EXPECT_THROW(u2(t), ShapeError);
}

TEST(Unitary, IsUnitaryForAllFamilies) {
  Rng rng(1);
  const std::vector<ParamCircuit> circuits{hea(1, 2), hea(2, 2), hea(3, 2), classifier_circuit(ClassifierAnsatz::U1),
                                           classifier_circuit(ClassifierAnsatz::U2),
                                           classifier_circuit(ClassifierAnsatz::U3)};
  for (const auto& c : circuits) {
    for (int i = 0; i < 100; ++i) {
      const auto u = unitary(c, random_theta(c.param_count(), rng));
      ASSERT_LT(max_abs_diff(u * u.adjoint(), ComplexMatrix::Identity(u.rows(), u.cols())), 1e-10);
    }
  }
}

TEST(Unitary, PeriodPiOfInducedChannel) {
  Rng rng(2);
  const auto c = hea(2, 1);
  const auto rho = random_mixed_state(4, rng);
  auto theta = random_theta(c.param_count(), rng);
  const ComplexMatrix base = conjugate(c, theta, rho.matrix());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    auto shifted = theta;
    shifted[k] += std::numbers::pi;
    EXPECT_LT(max_abs_diff(conjugate(c, shifted, rho.matrix()), base), 1e-12);
    shifted[k] += std::numbers::pi;
    EXPECT_LT(max_abs_diff(unitary(c, shifted), unitary(c, theta)), 1e-12);
  }
}

TEST(Classifier, ClosedForms) {
  const std::vector<double> z4(4, 0.0);
  const std::vector<double> z2(2, 0.0);
  EXPECT_LT(max_abs_diff(u2(z4), ComplexMatrix::Identity(4, 4)), 1e-15);
  EXPECT_LT(max_abs_diff(u3(z2), ComplexMatrix::Identity(2, 2)), 1e-15);
  const std::vector<double> t{0.3, 0.7, -0.2, 1.1, 0.4, 0.9, 0.0};
  const ComplexMatrix left = rot(pauli::x(), t[2]) * rot(pauli::z(), t[1]) * rot(pauli::x(), t[0]);
  const ComplexMatrix right = rot(pauli::x(), t[5]) * rot(pauli::z(), t[4]) * rot(pauli::x(), t[3]);
  EXPECT_LT(max_abs_diff(u1(t), tensor(left, right)), 1e-14);
  const std::vector<double> t2{0.3, 0.7, -0.2, 1.1};
  EXPECT_LT(max_abs_diff(u2(t2), tensor(rot(pauli::z(), t2[1]) * rot(pauli::x(), t2[0]),
                                        rot(pauli::z(), t2[3]) * rot(pauli::x(), t2[2]))),
            1e-14);
  const std::vector<double> t3{0.3, 0.7};
  EXPECT_LT(max_abs_diff(u3(t3), rot(pauli::z(), t3[1]) * rot(pauli::x(), t3[0])), 1e-14);
  EXPECT_EQ(classifier_ansatz_from_string("U3"), ClassifierAnsatz::U3);
  EXPECT_THROW(classifier_ansatz_from_string("U9"), ConfigError);
}

TEST(Gradient, ConstantObjectiveIsZero) {
  const auto c = hea(2, 1);
  const Objective f = [](std::span<const double>) { return 3.0; };
  const std::vector<double> t(c.param_count(), 0.4);
  for (const double g : gradient(c, f, t)) EXPECT_EQ(g, 0.0);
}

TEST(Gradient, RxCosineClosedForm) {
  ParamCircuit c(1);
  c.add_rotation(GateKind::Rx, 0);
  const Objective f = [&](std::span<const double> t) {
    return expectation(conjugate(c, t, DensityMatrix::basis(2, 0).matrix()), pauli::z());
  };
  for (const double th : {0.0, 0.3, 1.2, 2.5}) {
    const std::vector<double> t{th};
    EXPECT_NEAR(f(t), std::cos(2 * th), 1e-14);
    EXPECT_NEAR(gradient(c, f, t)[0], -2.0 * std::sin(2 * th), 1e-6);
  }
}

TEST(Gradient, ShiftMatchesFiniteDifferenceOnHea) {
  Rng rng(3);
  const auto c = hea(3, 2);
  for (int trial = 0; trial < 5; ++trial) {
    const auto rho = random_mixed_state(8, rng);
    const ComplexMatrix obs = chandis::test::random_hermitian(8, rng);
    const Objective f = [&](std::span<const double> t) { return expectation(conjugate(c, t, rho.matrix()), obs); };
    const auto theta = random_theta(c.param_count(), rng);
    const auto shift = gradient(c, f, theta);
    const auto fd = finite_difference_gradient(f, theta);
    for (std::size_t k = 0; k < shift.size(); ++k) EXPECT_NEAR(shift[k], fd[k], 1e-6);
  }
}

TEST(Gradient, CrySlotUsesFiniteDifference) {
  const auto c = classifier_circuit(ClassifierAnsatz::U1);
  const auto rules = c.slot_rules();
  ASSERT_EQ(rules.size(), 7u);
  EXPECT_EQ(rules[6], SlotRule::FiniteDifference);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_EQ(rules[k], SlotRule::PauliShift);
}

TEST(Gradient, AdjointMatchesShiftRule) {
  Rng rng(4);
  for (const auto& c : {hea(2, 3), hea(3, 1), classifier_circuit(ClassifierAnsatz::U1)}) {
    const auto rho = random_mixed_state(c.dim(), rng);
    const ComplexMatrix obs = chandis::test::random_hermitian(c.dim(), rng);
    const auto theta = random_theta(c.param_count(), rng);
    const Objective f = [&](std::span<const double> t) { return expectation(conjugate(c, t, rho.matrix()), obs); };
    const ComplexMatrix u = unitary(c, theta);
    const ComplexMatrix z = rho.matrix() * u.adjoint() * obs * u;
    std::vector<double> adj(c.param_count(), 0.0);
    accumulate_gradient(c, theta, z, adj);
    const auto ref = gradient(c, f, theta);
    for (std::size_t k = 0; k < adj.size(); ++k) EXPECT_NEAR(adj[k], ref[k], 1e-6) << "slot " << k;
  }
}

TEST(Lbfgs, Rosenbrock) {
  const GradientObjective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    const double a = 1 - x(0);
    const double b = x(1) - x(0) * x(0);
    g.resize(2);
    g(0) = -2 * a - 400 * x(0) * b;
    g(1) = 200 * b;
    return a * a + 100 * b * b;
  };
  LbfgsOptions opt;
  opt.f_tol = 0.0;
  opt.g_tol = 1e-9;
  const auto res = minimize_lbfgs(f, Eigen::Vector2d(-1.2, 1.0), opt);
  EXPECT_NEAR(res.x(0), 1.0, 1e-6);
  EXPECT_NEAR(res.x(1), 1.0, 1e-6);
  for (std::size_t i = 1; i < res.history.size(); ++i) EXPECT_LE(res.history[i], res.history[i - 1]);
}

TEST(Lbfgs, NonFiniteObjectiveReported) {
  const GradientObjective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = Eigen::VectorXd::Constant(x.size(), std::nan(""));
    return std::nan("");
  };
  EXPECT_EQ(minimize_lbfgs(f, Eigen::VectorXd::Zero(2)).status, LbfgsStatus::NonFinite);
}
