#include <algorithm>
#include <array>
#include <cmath>

#include <gtest/gtest.h>

#include "chandis/channels.hpp"
#include "chandis/errors.hpp"
#include "test_util.hpp"

using namespace chandis;
using chandis::test::max_abs_diff;

namespace {

ComplexMatrix dep_closed_form(double a, const ComplexMatrix& rho) {
  return (1.0 - 4.0 * a / 3.0) * rho + (2.0 * a / 3.0) * ComplexMatrix::Identity(2, 2);
}

std::vector<KrausChannel> all_constructed() {
  std::vector<KrausChannel> out{identity_channel(2), identity_channel(4), eb_channel_a(), eb_channel_b()};
  for (const double a : {0.0, 0.1, 0.5, 0.75, 1.0}) out.push_back(depolarizing(a));
  out.push_back(tensor_channels(depolarizing(0.3), 2));
  out.push_back(tensor_channels(eb_channel_a(), 2));
  out.push_back(extend_identity(eb_channel_b(), 1));
  out.push_back(embed(depolarizing(0.2), 1, 1));
  out.push_back(compose(depolarizing(0.4), depolarizing(0.2)));
  out.push_back(tensor(eb_channel_a(), depolarizing(0.6)));
  return out;
}

}  // namespace

TEST(Channels, AllConstructedChannelsAreCptp) {
  for (const auto& ch : all_constructed()) {
    EXPECT_LT(trace_preservation_error(ch), 1e-10) << ch.label();
    EXPECT_GE(choi_min_eigenvalue(ch), -1e-9) << ch.label();
    EXPECT_TRUE(is_cptp(ch)) << ch.label();
  }
}

TEST(Channels, RejectsNonTracePreserving) {
  std::vector<ComplexMatrix> k{ComplexMatrix::Identity(2, 2) * 0.5};
  EXPECT_THROW(KrausChannel(k, "bad"), ContractError);
  std::vector<ComplexMatrix> mixed{ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(3, 3)};
  EXPECT_THROW(KrausChannel(mixed, "shape"), ShapeError);
}

TEST(Apply, IdentityChannel) {
  Rng rng(1);
  const auto rho = random_mixed_state(2, rng);
  EXPECT_LT(max_abs_diff(chandis::apply(identity_channel(2), rho).matrix(), rho.matrix()), 1e-15);
}

TEST(Apply, FullyDepolarizingGivesMaximallyMixed) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const auto rho = random_mixed_state(2, rng);
    EXPECT_LT(max_abs_diff(chandis::apply(depolarizing(0.75), rho).matrix(), ComplexMatrix::Identity(2, 2) / 2.0),
              1e-12);
  }
}

TEST(Apply, DepolarizingClosedForm) {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const double a = uniform01(rng);
    const auto rho = random_mixed_state(2, rng);
    EXPECT_LT(max_abs_diff(chandis::apply(depolarizing(a), rho).matrix(), dep_closed_form(a, rho.matrix())), 1e-12);
  }
}

TEST(Apply, DepolarizingBlochContraction) {
  for (const double a : {0.0, 0.3, 0.9}) {
    const auto b = bloch_vector(chandis::apply(depolarizing(a), DensityMatrix::basis(2, 0)));
    EXPECT_NEAR(b.x(), 0.0, 1e-15);
    EXPECT_NEAR(b.y(), 0.0, 1e-15);
    EXPECT_NEAR(b.z(), 1.0 - 4.0 * a / 3.0, 1e-14);
  }
}

TEST(Apply, DimMismatch) {
  EXPECT_THROW(chandis::apply(eb_channel_a(), DensityMatrix::maximally_mixed(2)), ShapeError);
}

TEST(Apply, OutputsStayValid) {
  Rng rng(4);
  for (const auto& ch : all_constructed()) {
    for (int i = 0; i < 10; ++i) {
      const auto out = chandis::apply(ch, random_mixed_state(ch.in_dim(), rng));
      EXPECT_NEAR(out.matrix().trace().real(), 1.0, 1e-10);
      EXPECT_GE(hermitian_eigenvalues(out.matrix()).minCoeff(), -1e-9);
    }
  }
}

TEST(Depolarizing, RangeChecked) {
  EXPECT_THROW(depolarizing(-0.01), ContractError);
  EXPECT_THROW(depolarizing(1.01), ContractError);
  EXPECT_EQ(depolarizing(0.2).size(), 4u);
}

TEST(Depolarizing, ZeroIsIdentity) {
  Rng rng(5);
  const auto rho = random_mixed_state(2, rng);
  EXPECT_LT(max_abs_diff(chandis::apply(depolarizing(0.0), rho).matrix(), rho.matrix()), 1e-15);
}

TEST(EbChannels, KnownOutputs) {
  EXPECT_EQ(eb_channel_a().in_dim(), 4u);
  EXPECT_EQ(eb_channel_a().out_dim(), 2u);
  EXPECT_EQ(eb_channel_a().size(), 5u);
  EXPECT_LT(max_abs_diff(chandis::apply(eb_channel_a(), DensityMatrix::basis(4, 0)).matrix(),
                         DensityMatrix::basis(2, 0).matrix()),
            1e-15);
  EXPECT_LT(max_abs_diff(chandis::apply(eb_channel_b(), DensityMatrix::basis(4, 0)).matrix(), chandis::test::ket_plus()),
            1e-15);
  EXPECT_LT(max_abs_diff(chandis::apply(eb_channel_a(), DensityMatrix::basis(4, 3)).matrix(),
                         ComplexMatrix::Identity(2, 2) / 2.0),
            1e-15);
}

TEST(TensorChannels, Properties) {
  EXPECT_EQ(tensor_channels(depolarizing(0.2), 2).size(), 16u);
  Rng rng(6);
  const auto rho = random_mixed_state(2, rng);
  EXPECT_LT(max_abs_diff(chandis::apply(tensor_channels(depolarizing(0.2), 1), rho).matrix(),
                         chandis::apply(depolarizing(0.2), rho).matrix()),
            1e-15);
  const auto rho4 = random_mixed_state(4, rng);
  EXPECT_LT(max_abs_diff(chandis::apply(tensor_channels(depolarizing(0.0), 2), rho4).matrix(), rho4.matrix()), 1e-14);
}

TEST(TensorChannels, ProductStatesFactorise) {
  Rng rng(7);
  for (const auto& ch : {depolarizing(0.35), eb_channel_a()}) {
    const auto a = random_mixed_state(ch.in_dim(), rng);
    const auto b = random_mixed_state(ch.in_dim(), rng);
    const auto joint = chandis::apply(tensor_channels(ch, 2), tensor(a, b));
    const auto separate = tensor(chandis::apply(ch, a), chandis::apply(ch, b));
    EXPECT_LT(max_abs_diff(joint.matrix(), separate.matrix()), 1e-12);
  }
}

TEST(TensorChannels, CapExceeded) {
  EXPECT_THROW(tensor_channels(depolarizing(0.1), 7), SizeError);
}

TEST(ExtendIdentity, Properties) {
  Rng rng(8);
  const auto rho = random_mixed_state(2, rng);
  EXPECT_LT(max_abs_diff(chandis::apply(extend_identity(depolarizing(0.3), 0), rho).matrix(),
                         chandis::apply(depolarizing(0.3), rho).matrix()),
            1e-15);
  const auto ext = extend_identity(depolarizing(1.0), 1);
  EXPECT_LT(trace_preservation_error(ext), 1e-12);
  const auto sigma = random_mixed_state(2, rng);
  const auto out = chandis::apply(ext, tensor(rho, sigma));
  const std::array<std::size_t, 2> dims{2, 2};
  const std::array<std::size_t, 1> keep{1};
  EXPECT_LT(max_abs_diff(partial_trace(out, dims, keep).matrix(), sigma.matrix()), 1e-12);
}

TEST(Compose, IdentityAndDepolarizing) {
  Rng rng(9);
  const auto ch = eb_channel_b();
  const auto id_after = compose(identity_channel(2), ch);
  const auto dep = compose(depolarizing(0.4), depolarizing(0.0));
  for (int i = 0; i < 50; ++i) {
    const auto rho = random_mixed_state(4, rng);
    EXPECT_LT(max_abs_diff(chandis::apply(id_after, rho).matrix(), chandis::apply(ch, rho).matrix()), 1e-14);
    const auto q = random_mixed_state(2, rng);
    EXPECT_LT(max_abs_diff(chandis::apply(dep, q).matrix(), chandis::apply(depolarizing(0.4), q).matrix()), 1e-14);
  }
}

TEST(Compose, Associative) {
  Rng rng(10);
  for (int i = 0; i < 10; ++i) {
    const auto a = depolarizing(uniform01(rng));
    const auto b = depolarizing(uniform01(rng));
    const auto c = depolarizing(uniform01(rng));
    const auto rho = random_mixed_state(2, rng);
    EXPECT_LT(max_abs_diff(chandis::apply(compose(c, compose(b, a)), rho).matrix(),
                           chandis::apply(compose(compose(c, b), a), rho).matrix()),
              1e-12);
  }
}

TEST(Choi, IdentityIsMaximallyEntangled) {
  ComplexVector omega = ComplexVector::Zero(4);
  omega(0) = omega(3) = 1.0 / std::sqrt(2.0);
  EXPECT_LT(max_abs_diff(choi(identity_channel(2)), omega * omega.adjoint()), 1e-15);
}

TEST(Choi, DepolarizingEigenvalues) {
  for (const double a : {0.1, 0.5, 0.9}) {
    const RealVector ev = hermitian_eigenvalues(choi(depolarizing(a)));
    std::vector<double> want{1.0 - a, a / 3.0, a / 3.0, a / 3.0};
    std::sort(want.begin(), want.end());
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(ev(i), want[static_cast<std::size_t>(i)], 1e-12);
  }
}

TEST(Choi, OutputMarginalIsMaximallyMixedReference) {
  const ComplexMatrix c = choi(eb_channel_a());
  const std::array<std::size_t, 2> dims{2, 4};
  const std::array<std::size_t, 1> keep{1};
  EXPECT_LT(max_abs_diff(partial_trace(c, dims, keep), ComplexMatrix::Identity(4, 4) / 4.0), 1e-14);
}

TEST(FreshQubit, InsertAndDual) {
  const auto out = insert_fresh_qubit(DensityMatrix::basis(2, 0), QubitPosition::Front);
  EXPECT_LT(max_abs_diff(out.matrix(), DensityMatrix::basis(4, 0).matrix()), 1e-15);
  Rng rng(11);
  const auto rho = random_mixed_state(2, rng);
  for (const auto pos : {QubitPosition::Front, QubitPosition::Back}) {
    const auto big = insert_fresh_qubit(rho, pos);
    EXPECT_NEAR(big.matrix().trace().real(), 1.0, 1e-14);
    const std::array<std::size_t, 2> dims{2, 2};
    const std::array<std::size_t, 1> keep{pos == QubitPosition::Front ? std::size_t{1} : std::size_t{0}};
    EXPECT_LT(max_abs_diff(partial_trace(big, dims, keep).matrix(), rho.matrix()), 1e-15);
    const ComplexMatrix obs = chandis::test::random_hermitian(4, rng);
    EXPECT_NEAR(expectation(big.matrix(), obs), expectation(rho.matrix(), fresh_qubit_dual(obs, pos)), 1e-12);
  }
}

TEST(Dual, MatchesSchrodingerPicture) {
  Rng rng(12);
  for (const auto& ch : all_constructed()) {
    const auto rho = random_mixed_state(ch.in_dim(), rng);
    const ComplexMatrix obs = chandis::test::random_hermitian(ch.out_dim(), rng);
    EXPECT_NEAR(expectation(chandis::apply(ch, rho).matrix(), obs), expectation(rho.matrix(), apply_dual(ch, obs)),
                1e-10);
  }
}

TEST(Parse, ChannelDescriptions) {
  EXPECT_EQ(parse_channel(R"({"type":"depolarizing","alpha":0.3})").size(), 4u);
  EXPECT_EQ(channel_by_name("eb-A").in_dim(), 4u);
  EXPECT_EQ(channel_by_name("dep:0.2").size(), 4u);
  const auto k = parse_channel(R"({"type":"kraus","matrices":[[[[1,0],[0,0]],[[0,0],[1,0]]]]})");
  EXPECT_EQ(k.in_dim(), 2u);
  EXPECT_THROW(channel_by_name("nonsense"), ConfigError);
  EXPECT_THROW(parse_channel(R"({"type":"kraus","matrices":[[[[2,0],[0,0]],[[0,0],[1,0]]]]})"), ConfigError);
}
