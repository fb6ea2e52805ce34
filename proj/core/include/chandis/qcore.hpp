#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "chandis/random.hpp"

namespace chandis {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Largest matrix dimension any operation will produce (2^12).
inline constexpr std::size_t kMaxDim = std::size_t{1} << 12;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTol = -1e-9;
inline constexpr double kPureNormTol = 1e-12;

namespace pauli {
ComplexMatrix identity();
ComplexMatrix x();
ComplexMatrix y();
ComplexMatrix z();
}  // namespace pauli

/// Number of qubits n with 2^n == dim; throws ShapeError if dim is not a power of two.
std::size_t qubit_count(std::size_t dim);

/// Max entrywise |M - M^dagger|.
double hermiticity_error(const ComplexMatrix& m);

/// Eigenvalues of a Hermitian matrix in ascending order.
RealVector hermitian_eigenvalues(const ComplexMatrix& h);

/// Hermitian, unit-trace, positive semidefinite state on `dim` levels.
///
/// Construction validates all three invariants; operations that are known to
/// preserve them (unitary conjugation, CPTP maps) go through `trusted`.
class DensityMatrix {
public:
  explicit DensityMatrix(ComplexMatrix m);

  static DensityMatrix trusted(ComplexMatrix m);
  static DensityMatrix maximally_mixed(std::size_t dim);
  /// |index><index| in the computational basis.
  static DensityMatrix basis(std::size_t dim, std::size_t index);

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }

  /// Checks the invariants, returning false instead of throwing.
  static bool is_valid(const ComplexMatrix& m);

private:
  struct Unchecked {};
  DensityMatrix(ComplexMatrix m, Unchecked);
  ComplexMatrix m_;
};

class PureState {
public:
  explicit PureState(ComplexVector amplitudes);

  std::size_t dim() const { return static_cast<std::size_t>(v_.size()); }
  const ComplexVector& amplitudes() const { return v_; }
  DensityMatrix projector() const;

private:
  ComplexVector v_;
};

/// Kronecker product; leftmost factor is the most significant index.
ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix tensor(std::span<const ComplexMatrix> factors);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

/// Reduced matrix on the subsystems listed in `keep` (ascending order of output
/// factors follows the order of `dims`).
ComplexMatrix partial_trace(const ComplexMatrix& m, std::span<const std::size_t> dims,
                            std::span<const std::size_t> keep);
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> dims,
                            std::span<const std::size_t> keep);

/// Sum of absolute eigenvalues of a Hermitian matrix.
double trace_norm(const ComplexMatrix& h);

/// Tr(obs * rho) for Hermitian obs.
double expectation(const DensityMatrix& rho, const ComplexMatrix& obs);
double expectation(const ComplexMatrix& rho, const ComplexMatrix& obs);

/// Hilbert-Schmidt random mixed state: G G^dagger / Tr(G G^dagger) with Ginibre G.
DensityMatrix random_mixed_state(std::size_t dim, Rng& rng);

/// Haar-random pure state from a normalised complex Gaussian vector.
PureState random_pure_state(std::size_t dim, Rng& rng);

/// Haar-random unitary (QR of a Ginibre matrix with phase fix).
ComplexMatrix random_unitary(std::size_t dim, Rng& rng);

/// Bloch vector (<X>, <Y>, <Z>) of a single-qubit state.
Eigen::Vector3d bloch_vector(const DensityMatrix& rho);

}  // namespace chandis
