#include "chandis/diamond.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "chandis/errors.hpp"
#include "chandis/parallel.hpp"

namespace chandis {

namespace {

void check_pair(const KrausChannel& a, const KrausChannel& b) {
  if (a.in_dim() != b.in_dim() || a.out_dim() != b.out_dim()) {
    throw ShapeError("diamond: channels have different dimensions");
  }
}

// |psi> on (in) (x) (env) is held as Psi^T: an env x in matrix whose
// column-major vectorisation has index i * env + e.
class DifferenceMap {
public:
  DifferenceMap(const KrausChannel& phi0, const KrausChannel& phi1, std::size_t env_dim)
      : din_(static_cast<Eigen::Index>(phi0.in_dim())),
        dout_(static_cast<Eigen::Index>(phi0.out_dim())),
        denv_(env_dim == 0 ? din_ : static_cast<Eigen::Index>(env_dim)) {
    for (const auto& k : phi0.kraus()) plus_t_.push_back(k.transpose());
    for (const auto& k : phi1.kraus()) minus_t_.push_back(k.transpose());
    coeff_ = ComplexMatrix::Zero(dout_ * din_, dout_ * din_);
    ComplexVector v(dout_ * din_);
    auto add = [&](const ComplexMatrix& k, double sign) {
      for (Eigen::Index a = 0; a < dout_; ++a)
        for (Eigen::Index i = 0; i < din_; ++i) v(a * din_ + i) = k(a, i);
      coeff_.noalias() += sign * (v.conjugate() * v.transpose());
    };
    for (const auto& k : phi0.kraus()) add(k, 1.0);
    for (const auto& k : phi1.kraus()) add(k, -1.0);
  }

  Eigen::Index input_size() const { return din_ * denv_; }

  // X(psi) = sum_k v_k v_k^dagger - sum_l w_l w_l^dagger.
  ComplexMatrix output(const ComplexVector& psi) const {
    const auto m = out_size();
    ComplexMatrix x = ComplexMatrix::Zero(m, m);
    const Eigen::Map<const ComplexMatrix> phi(psi.data(), denv_, din_);
    ComplexMatrix v(denv_, dout_);
    for (const auto& kt : plus_t_) {
      v.noalias() = phi * kt;
      const Eigen::Map<const ComplexVector> vv(v.data(), m);
      x.noalias() += vv * vv.adjoint();
    }
    for (const auto& kt : minus_t_) {
      v.noalias() = phi * kt;
      const Eigen::Map<const ComplexVector> vv(v.data(), m);
      x.noalias() -= vv * vv.adjoint();
    }
    return x;
  }

  // N(S) = sum_k (K (x) I)^dagger S (K (x) I) - (same for phi1), assembled
  // blockwise: block (i, j) of N is sum_{a,a'} C[(a,i),(a',j)] S_{a a'} where
  // C = sum_k conj(K[a,i]) K[a',j] is fixed per channel pair.
  ComplexMatrix dual_operator(const ComplexMatrix& s) const {
    const auto n = input_size();
    ComplexMatrix out = ComplexMatrix::Zero(n, n);
    for (Eigen::Index a = 0; a < dout_; ++a)
      for (Eigen::Index ap = 0; ap < dout_; ++ap) {
        const auto sblock = s.block(a * denv_, ap * denv_, denv_, denv_);
        for (Eigen::Index i = 0; i < din_; ++i)
          for (Eigen::Index j = 0; j < din_; ++j) {
            const cplx c = coeff_(a * din_ + i, ap * din_ + j);
            if (c == cplx{0.0, 0.0}) continue;
            out.block(i * denv_, j * denv_, denv_, denv_) += c * sblock;
          }
      }
    return out;
  }

private:
  Eigen::Index out_size() const { return dout_ * denv_; }

  Eigen::Index din_;
  Eigen::Index dout_;
  Eigen::Index denv_;
  std::vector<ComplexMatrix> plus_t_;
  std::vector<ComplexMatrix> minus_t_;
  ComplexMatrix coeff_;
};

struct SignResult {
  ComplexMatrix s;
  double norm;
};

SignResult sign_of(const ComplexMatrix& x) {
  const ComplexMatrix h = 0.5 * (x + x.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  const auto& lam = es.eigenvalues();
  Eigen::VectorXd sg(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) sg(i) = lam(i) >= 0.0 ? 1.0 : -1.0;
  return {es.eigenvectors() * sg.asDiagonal() * es.eigenvectors().adjoint(), lam.cwiseAbs().sum()};
}

// Largest size at which N(S) is formed densely and diagonalised exactly.
constexpr Eigen::Index kExactLimit = 64;
constexpr int kPowerSteps = 12;
constexpr int kWindow = 25;

double ascend(const DifferenceMap& map, ComplexVector psi, const DiamondOptions& opt) {
  psi.normalize();
  const auto n = map.input_size();
  auto current = sign_of(map.output(psi));
  std::deque<double> recent{current.norm};
  for (int it = 0; it < opt.max_iterations; ++it) {
    const ComplexMatrix nm = map.dual_operator(current.s);
    if (n <= kExactLimit) {
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (nm + nm.adjoint()));
      psi = es.eigenvectors().col(n - 1);
    } else {
      // Power steps on N + 2I (positive semidefinite since ||N|| <= 2); the
      // Rayleigh quotient, hence the objective lower bound, cannot decrease.
      for (int k = 0; k < kPowerSteps; ++k) {
        psi = nm * psi + 2.0 * psi;
        psi.normalize();
      }
    }
    auto next = sign_of(map.output(psi));
    current = std::move(next);
    recent.push_back(current.norm);
    if (static_cast<int>(recent.size()) > kWindow) {
      recent.pop_front();
      if (recent.back() - recent.front() < opt.tolerance) break;
    }
  }
  return current.norm;
}

ComplexVector haar_vector(Eigen::Index n, Rng& rng) {
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = complex_normal(rng);
  return v.normalized();
}

DiamondEstimate estimate(const KrausChannel& phi0, const KrausChannel& phi1, const std::vector<ComplexVector>& starts,
                         const DiamondOptions& opt) {
  check_pair(phi0, phi1);
  const DifferenceMap map(phi0, phi1, opt.env_dim);
  DiamondEstimate est;
  est.choi_lower_bound = choi_lower_bound(phi0, phi1);
  est.restarts_used = starts.size();
  est.per_restart_values.assign(starts.size(), 0.0);
  parallel_for(starts.size(), [&](std::size_t k) { est.per_restart_values[k] = ascend(map, starts[k], opt); });

  const auto din = static_cast<Eigen::Index>(phi0.in_dim());
  const auto denv = map.input_size() / din;
  ComplexVector omega = ComplexVector::Zero(din * denv);
  for (Eigen::Index i = 0; i < std::min(din, denv); ++i) omega(i * denv + i) = 1.0;
  est.choi_start_value = ascend(map, omega, opt);

  est.value = est.choi_start_value;
  for (const double v : est.per_restart_values) est.value = std::max(est.value, v);
  return est;
}

}  // namespace

double choi_lower_bound(const KrausChannel& phi0, const KrausChannel& phi1) {
  check_pair(phi0, phi1);
  const ComplexMatrix d = choi(phi0) - choi(phi1);
  return trace_norm(0.5 * (d + d.adjoint()));
}

DiamondEstimate diamond_norm(const KrausChannel& phi0, const KrausChannel& phi1, const DiamondOptions& options) {
  check_pair(phi0, phi1);
  const std::size_t env = options.env_dim == 0 ? phi0.in_dim() : options.env_dim;
  const auto n = static_cast<Eigen::Index>(phi0.in_dim() * env);
  const SeedPath root = SeedPath(options.seed).child("diamond");
  std::vector<ComplexVector> starts;
  for (std::size_t k = 0; k < options.restarts; ++k) {
    Rng rng = root.child(k).rng();
    starts.push_back(haar_vector(n, rng));
  }
  return estimate(phi0, phi1, starts, options);
}

DiamondEstimate diamond_norm(const KrausChannel& phi0, const KrausChannel& phi1, std::size_t restarts, Rng& rng) {
  check_pair(phi0, phi1);
  const auto n = static_cast<Eigen::Index>(phi0.in_dim() * phi0.in_dim());
  std::vector<ComplexVector> starts;
  for (std::size_t k = 0; k < restarts; ++k) starts.push_back(haar_vector(n, rng));
  DiamondOptions opt;
  opt.restarts = restarts;
  return estimate(phi0, phi1, starts, opt);
}

double p_diamond(const KrausChannel& phi0, const KrausChannel& phi1, std::size_t p, const DiamondOptions& options) {
  if (p == 0) throw ContractError("p_diamond: p must be >= 1");
  const auto a = p == 1 ? phi0 : tensor_channels(phi0, p);
  const auto b = p == 1 ? phi1 : tensor_channels(phi1, p);
  const double v = diamond_norm(a, b, options).value;
  return std::clamp(0.5 + 0.25 * v, 0.5, 1.0);
}

}  // namespace chandis
