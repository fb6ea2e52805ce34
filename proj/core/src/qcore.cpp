#include "chandis/qcore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "chandis/errors.hpp"

namespace chandis {

namespace pauli {
ComplexMatrix identity() { return ComplexMatrix::Identity(2, 2); }
ComplexMatrix x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
ComplexMatrix y() {
  ComplexMatrix m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}
ComplexMatrix z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
}  // namespace pauli

std::size_t qubit_count(std::size_t dim) {
  if (dim == 0 || !std::has_single_bit(dim)) {
    throw ShapeError("dimension " + std::to_string(dim) + " is not a power of two");
  }
  return static_cast<std::size_t>(std::countr_zero(dim));
}

double hermiticity_error(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

RealVector hermitian_eigenvalues(const ComplexMatrix& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ContractError("Hermitian eigensolver did not converge");
  return es.eigenvalues();
}

namespace {

void check_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw ShapeError(std::string(what) + ": expected a non-empty square matrix, got " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

void check_dim_cap(std::size_t dim) {
  if (dim > kMaxDim) {
    throw SizeError("dimension " + std::to_string(dim) + " exceeds cap " + std::to_string(kMaxDim));
  }
}

}  // namespace

bool DensityMatrix::is_valid(const ComplexMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  if (!m.allFinite()) return false;
  if (hermiticity_error(m) > kHermitianTol) return false;
  if (std::abs(m.trace() - cplx(1.0, 0.0)) > kTraceTol) return false;
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  return hermitian_eigenvalues(h).minCoeff() >= kPsdTol;
}

DensityMatrix::DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
  check_square(m_, "DensityMatrix");
  check_dim_cap(dim());
  if (!is_valid(m_)) {
    throw ContractError("matrix is not a density matrix (Hermitian, unit trace, PSD)");
  }
}

DensityMatrix::DensityMatrix(ComplexMatrix m, Unchecked) : m_(std::move(m)) {}

DensityMatrix DensityMatrix::trusted(ComplexMatrix m) {
  check_square(m, "DensityMatrix");
  return DensityMatrix(std::move(m), Unchecked{});
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
  check_dim_cap(dim);
  return DensityMatrix(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim), Unchecked{});
}

DensityMatrix DensityMatrix::basis(std::size_t dim, std::size_t index) {
  check_dim_cap(dim);
  if (index >= dim) throw ShapeError("basis index out of range");
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  m(index, index) = 1.0;
  return DensityMatrix(std::move(m), Unchecked{});
}

PureState::PureState(ComplexVector amplitudes) : v_(std::move(amplitudes)) {
  if (v_.size() == 0) throw ShapeError("empty state vector");
  check_dim_cap(dim());
  if (std::abs(v_.norm() - 1.0) > kPureNormTol) throw ContractError("state vector is not normalised");
}

DensityMatrix PureState::projector() const {
  ComplexMatrix m = v_ * v_.adjoint();
  return DensityMatrix::trusted(0.5 * (m + m.adjoint()));
}

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  const auto rows = static_cast<std::size_t>(a.rows() * b.rows());
  const auto cols = static_cast<std::size_t>(a.cols() * b.cols());
  check_dim_cap(rows);
  check_dim_cap(cols);
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix tensor(std::span<const ComplexMatrix> factors) {
  if (factors.empty()) return ComplexMatrix::Identity(1, 1);
  ComplexMatrix out = factors.front();
  for (std::size_t k = 1; k < factors.size(); ++k) out = tensor(out, factors[k]);
  return out;
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix::trusted(tensor(a.matrix(), b.matrix()));
}

ComplexMatrix partial_trace(const ComplexMatrix& m, std::span<const std::size_t> dims,
                            std::span<const std::size_t> keep) {
  check_square(m, "partial_trace");
  std::size_t total = 1;
  for (auto d : dims) {
    if (d == 0) throw ShapeError("partial_trace: zero subsystem dimension");
    total *= d;
  }
  if (total != static_cast<std::size_t>(m.rows())) {
    throw ShapeError("partial_trace: product of subsystem dims " + std::to_string(total) +
                     " != matrix dim " + std::to_string(m.rows()));
  }
  std::vector<bool> kept(dims.size(), false);
  for (auto k : keep) {
    if (k >= dims.size() || kept[k]) throw ShapeError("partial_trace: invalid keep index");
    kept[k] = true;
  }

  // Stride of each factor in the flat index (factor 0 most significant).
  std::vector<std::size_t> stride(dims.size());
  std::size_t s = 1;
  for (std::size_t f = dims.size(); f-- > 0;) {
    stride[f] = s;
    s *= dims[f];
  }
  auto offsets = [&](bool want_kept) {
    std::vector<std::size_t> off{0};
    for (std::size_t f = 0; f < dims.size(); ++f) {
      if (kept[f] != want_kept) continue;
      std::vector<std::size_t> next;
      next.reserve(off.size() * dims[f]);
      for (auto o : off)
        for (std::size_t d = 0; d < dims[f]; ++d) next.push_back(o + d * stride[f]);
      off = std::move(next);
    }
    return off;
  };
  const auto keep_off = offsets(true);
  const auto trace_off = offsets(false);

  const auto dk = static_cast<Eigen::Index>(keep_off.size());
  ComplexMatrix out = ComplexMatrix::Zero(dk, dk);
  for (Eigen::Index j = 0; j < dk; ++j) {
    for (Eigen::Index i = 0; i < dk; ++i) {
      cplx acc = 0.0;
      for (auto t : trace_off) {
        acc += m(static_cast<Eigen::Index>(keep_off[i] + t), static_cast<Eigen::Index>(keep_off[j] + t));
      }
      out(i, j) = acc;
    }
  }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> dims,
                            std::span<const std::size_t> keep) {
  return DensityMatrix::trusted(partial_trace(rho.matrix(), dims, keep));
}

double trace_norm(const ComplexMatrix& h) {
  check_square(h, "trace_norm");
  if (hermiticity_error(h) > kHermitianTol * std::max(1.0, h.cwiseAbs().maxCoeff())) {
    throw ContractError("trace_norm: matrix is not Hermitian");
  }
  const ComplexMatrix sym = 0.5 * (h + h.adjoint());
  return hermitian_eigenvalues(sym).cwiseAbs().sum();
}

double expectation(const ComplexMatrix& rho, const ComplexMatrix& obs) {
  if (rho.rows() != obs.rows() || rho.cols() != obs.cols() || rho.rows() != rho.cols()) {
    throw ShapeError("expectation: dimension mismatch");
  }
  // Tr(obs rho) = sum_ij obs_ij rho_ji
  const cplx t = obs.cwiseProduct(rho.transpose()).sum();
  if (std::abs(t.imag()) > 1e-10) {
    throw ContractError("expectation: imaginary residue " + std::to_string(t.imag()));
  }
  return t.real();
}

double expectation(const DensityMatrix& rho, const ComplexMatrix& obs) {
  return expectation(rho.matrix(), obs);
}

DensityMatrix random_mixed_state(std::size_t dim, Rng& rng) {
  if (dim < 2) throw ShapeError("random_mixed_state: dim must be at least 2");
  check_dim_cap(dim);
  const auto n = static_cast<Eigen::Index>(dim);
  ComplexMatrix g(n, n);
  // Column-major fill order is part of the reproducibility contract.
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = complex_normal(rng);
  ComplexMatrix m = g * g.adjoint();
  m /= m.trace().real();
  return DensityMatrix::trusted(0.5 * (m + m.adjoint()));
}

PureState random_pure_state(std::size_t dim, Rng& rng) {
  if (dim == 0) throw ShapeError("random_pure_state: dim must be positive");
  check_dim_cap(dim);
  ComplexVector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = complex_normal(rng);
  v.normalize();
  return PureState(std::move(v));
}

ComplexMatrix random_unitary(std::size_t dim, Rng& rng) {
  check_dim_cap(dim);
  const auto n = static_cast<Eigen::Index>(dim);
  ComplexMatrix g(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = complex_normal(rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double a = std::abs(r(k, k));
    if (a > 0) q.col(k) *= r(k, k) / a;
  }
  return q;
}

Eigen::Vector3d bloch_vector(const DensityMatrix& rho) {
  if (rho.dim() != 2) throw ShapeError("bloch_vector: single-qubit state required");
  return {expectation(rho, pauli::x()), expectation(rho, pauli::y()), expectation(rho, pauli::z())};
}

}  // namespace chandis
