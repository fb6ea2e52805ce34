#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "chandis/qcore.hpp"

namespace chandis {

/// Largest Kraus set any channel-algebra operation will produce.
inline constexpr std::size_t kMaxKrausCount = 4096;

/// CPTP map in Kraus form. Every operator is out_dim x in_dim.
class KrausChannel {
public:
  /// Validates shapes and trace preservation; complete positivity is checked
  /// through the Choi matrix when it is small enough to be cheap (in*out <= 256).
  KrausChannel(std::vector<ComplexMatrix> kraus, std::string label = {});

  std::size_t in_dim() const { return in_dim_; }
  std::size_t out_dim() const { return out_dim_; }
  std::size_t size() const { return kraus_.size(); }
  const std::vector<ComplexMatrix>& kraus() const { return kraus_; }
  const std::string& label() const { return label_; }

  /// Skips validation. For results of operations that preserve CPTP.
  static KrausChannel trusted(std::vector<ComplexMatrix> kraus, std::string label);

private:
  struct Unchecked {};
  KrausChannel(std::vector<ComplexMatrix> kraus, std::string label, Unchecked);

  std::size_t in_dim_ = 0;
  std::size_t out_dim_ = 0;
  std::vector<ComplexMatrix> kraus_;
  std::string label_;
};

/// Max entrywise deviation of sum_k K_k^dagger K_k from the identity.
double trace_preservation_error(const KrausChannel& ch);

/// Smallest eigenvalue of the Choi matrix.
double choi_min_eigenvalue(const KrausChannel& ch);

/// Both CPTP checks at the library tolerances (1e-10, -1e-9).
bool is_cptp(const KrausChannel& ch);

DensityMatrix apply(const KrausChannel& ch, const DensityMatrix& rho);
ComplexMatrix apply(const KrausChannel& ch, const ComplexMatrix& rho);

/// Heisenberg-picture dual: sum_k K_k^dagger M K_k.
ComplexMatrix apply_dual(const KrausChannel& ch, const ComplexMatrix& observable);

KrausChannel identity_channel(std::size_t dim);

/// (1-a) rho + (a/3)(X rho X + Y rho Y + Z rho Z).
KrausChannel depolarizing(double alpha);

/// Two-qubit to one-qubit entanglement-breaking pair (operators A1..A5, B1..B5).
KrausChannel eb_channel_a();
KrausChannel eb_channel_b();

/// All p-fold tensor products of the Kraus operators.
KrausChannel tensor_channels(const KrausChannel& ch, std::size_t p);

/// Tensor product of two (possibly different) channels.
KrausChannel tensor(const KrausChannel& a, const KrausChannel& b);

/// Each operator K becomes K (x) I(2^r).
KrausChannel extend_identity(const KrausChannel& ch, std::size_t r);

/// I(2^before) (x) K (x) I(2^after) for every Kraus operator.
KrausChannel embed(const KrausChannel& ch, std::size_t qubits_before, std::size_t qubits_after);

/// b after a: Kraus set {B_i A_j}.
KrausChannel compose(const KrausChannel& b, const KrausChannel& a);

/// (Phi (x) id)[|Omega><Omega|] with normalised |Omega> on in_dim^2. Output
/// factor order is (channel output) (x) (reference copy of the input).
ComplexMatrix choi(const KrausChannel& ch);

enum class QubitPosition { Front, Back };

/// rho -> |0><0| (x) rho (Front) or rho (x) |0><0| (Back).
DensityMatrix insert_fresh_qubit(const DensityMatrix& rho, QubitPosition position);
ComplexMatrix insert_fresh_qubit(const ComplexMatrix& rho, QubitPosition position);

/// Dual of insert_fresh_qubit: the <0|.|0> block of an observable.
ComplexMatrix fresh_qubit_dual(const ComplexMatrix& observable, QubitPosition position);

/// Parses a channel description in JSON text:
///   {"type": "depolarizing", "alpha": 0.3}
///   {"type": "kraus", "matrices": [[[[re, im], ...], ...], ...]}
///   {"type": "eb-A"} | {"type": "eb-B"} | {"type": "identity", "dim": 2}
KrausChannel parse_channel(std::string_view json_text);

/// Short names used on the command line: "eb-A", "eb-B", "identity",
/// "dep:<alpha>" / "depolarizing:<alpha>".
KrausChannel channel_by_name(std::string_view name);

}  // namespace chandis
