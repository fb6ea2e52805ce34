#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "chandis/qcore.hpp"

namespace chandis {

/// Rotations are R_sigma(theta) = exp(-i theta sigma), without the usual 1/2.
/// CRy applies exp(-i theta sigma_y) to the target when the control is |1>.
enum class GateKind { Rx, Ry, Rz, CRy, CX };

struct Gate {
  GateKind kind;
  std::size_t target;
  std::optional<std::size_t> control;
  std::optional<std::size_t> slot;
};

/// How a parameter enters a circuit, which decides its derivative rule.
enum class SlotRule {
  /// Bare Pauli rotation: exact shift f(t + pi/4) - f(t - pi/4).
  PauliShift,
  /// Anything else: central finite difference.
  FiniteDifference,
};

class ParamCircuit {
public:
  explicit ParamCircuit(std::size_t qubits);

  /// Appends a parameterised gate and returns its slot index.
  std::size_t add_rotation(GateKind kind, std::size_t target);
  std::size_t add_cry(std::size_t control, std::size_t target);
  void add_cx(std::size_t control, std::size_t target);

  std::size_t qubits() const { return qubits_; }
  std::size_t dim() const { return std::size_t{1} << qubits_; }
  std::size_t param_count() const { return param_count_; }
  const std::vector<Gate>& gates() const { return gates_; }

  /// Derivative rule of every slot, in slot order.
  std::vector<SlotRule> slot_rules() const;

private:
  void check_qubit(std::size_t q) const;

  std::size_t qubits_;
  std::size_t param_count_ = 0;
  std::vector<Gate> gates_;
};

/// Hardware-efficient ansatz: l layers of per-qubit Rx Rz Rx followed by a CX
/// ring 0->1, 1->2, ..., (q-1)->0. For q = 2 the ring is a single CX(0->1);
/// for q = 1 there is no entangler. Parameter count is 3 q l.
ParamCircuit hea(std::size_t qubits, std::size_t layers);

enum class ClassifierAnsatz { U1, U2, U3 };

/// U1: local Rx Rz Rx on both qubits then CRy(control 0, target 1), 7 params.
/// U2: local Rx Rz on both qubits, 4 params. U3: single-qubit Rx Rz, 2 params.
ParamCircuit classifier_circuit(ClassifierAnsatz id);
std::string_view to_string(ClassifierAnsatz id);
ClassifierAnsatz classifier_ansatz_from_string(std::string_view name);

ComplexMatrix unitary(const ParamCircuit& c, std::span<const double> theta);
ComplexMatrix u1(std::span<const double> theta);
ComplexMatrix u2(std::span<const double> theta);
ComplexMatrix u3(std::span<const double> theta);

/// m <- U(theta) m, gate by gate.
void apply_circuit_left(const ParamCircuit& c, std::span<const double> theta, ComplexMatrix& m);

/// U(theta) rho U(theta)^dagger, gate by gate.
ComplexMatrix conjugate(const ParamCircuit& c, std::span<const double> theta, const ComplexMatrix& rho);

using Objective = std::function<double(std::span<const double>)>;
using VectorObjective = std::function<std::vector<double>(std::span<const double>)>;

inline constexpr double kFiniteDifferenceStep = 1e-5;

/// Per-slot derivative of an objective that is an expectation value of the
/// circuit output (so the shift rule is exact for Pauli slots).
std::vector<double> gradient(const ParamCircuit& c, const Objective& f, std::span<const double> theta);
std::vector<double> gradient(std::span<const SlotRule> rules, const Objective& f, std::span<const double> theta);

/// Jacobian of a vector of expectation values; result[k][j] = d f_j / d theta_k.
std::vector<std::vector<double>> jacobian(std::span<const SlotRule> rules, const VectorObjective& f,
                                          std::span<const double> theta);

/// Central differences with step h on every slot.
std::vector<double> finite_difference_gradient(const Objective& f, std::span<const double> theta,
                                               double h = kFiniteDifferenceStep);

/// Reverse-mode derivative of F = Tr(M U rho U^dagger).
///
/// `z` must be rho * U^dagger M U for the current theta (a sum of such terms
/// over several (rho, M) pairs is allowed since F is linear in both). Adds
/// weight * dF/dtheta_k into grad[k] for every slot k.
void accumulate_gradient(const ParamCircuit& c, std::span<const double> theta, const ComplexMatrix& z,
                         std::span<double> grad, double weight = 1.0);

}  // namespace chandis
