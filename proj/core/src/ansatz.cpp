#include "chandis/ansatz.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "chandis/errors.hpp"
#include "gate_kernels.hpp"

namespace chandis {

using detail::Local2;

ParamCircuit::ParamCircuit(std::size_t qubits) : qubits_(qubits) {
  if (qubits == 0 || qubits > 12) throw SizeError("ParamCircuit: qubit count must be in [1, 12]");
}

void ParamCircuit::check_qubit(std::size_t q) const {
  if (q >= qubits_) throw ShapeError("ParamCircuit: qubit index out of range");
}

std::size_t ParamCircuit::add_rotation(GateKind kind, std::size_t target) {
  if (kind != GateKind::Rx && kind != GateKind::Ry && kind != GateKind::Rz) {
    throw ContractError("add_rotation: kind must be Rx, Ry or Rz");
  }
  check_qubit(target);
  gates_.push_back({kind, target, std::nullopt, param_count_});
  return param_count_++;
}

std::size_t ParamCircuit::add_cry(std::size_t control, std::size_t target) {
  check_qubit(control);
  check_qubit(target);
  if (control == target) throw ContractError("add_cry: control equals target");
  gates_.push_back({GateKind::CRy, target, control, param_count_});
  return param_count_++;
}

void ParamCircuit::add_cx(std::size_t control, std::size_t target) {
  check_qubit(control);
  check_qubit(target);
  if (control == target) throw ContractError("add_cx: control equals target");
  gates_.push_back({GateKind::CX, target, control, std::nullopt});
}

std::vector<SlotRule> ParamCircuit::slot_rules() const {
  std::vector<SlotRule> rules(param_count_, SlotRule::PauliShift);
  for (const auto& g : gates_) {
    if (g.slot && g.kind == GateKind::CRy) rules[*g.slot] = SlotRule::FiniteDifference;
  }
  return rules;
}

ParamCircuit hea(std::size_t qubits, std::size_t layers) {
  if (layers == 0) throw ContractError("hea: at least one layer required");
  ParamCircuit c(qubits);
  for (std::size_t layer = 0; layer < layers; ++layer) {
    for (std::size_t q = 0; q < qubits; ++q) {
      c.add_rotation(GateKind::Rx, q);
      c.add_rotation(GateKind::Rz, q);
      c.add_rotation(GateKind::Rx, q);
    }
    if (qubits == 2) {
      c.add_cx(0, 1);
    } else if (qubits > 2) {
      for (std::size_t q = 0; q + 1 < qubits; ++q) c.add_cx(q, q + 1);
      c.add_cx(qubits - 1, 0);
    }
  }
  return c;
}

ParamCircuit classifier_circuit(ClassifierAnsatz id) {
  switch (id) {
    case ClassifierAnsatz::U1: {
      ParamCircuit c(2);
      for (std::size_t q = 0; q < 2; ++q) {
        c.add_rotation(GateKind::Rx, q);
        c.add_rotation(GateKind::Rz, q);
        c.add_rotation(GateKind::Rx, q);
      }
      c.add_cry(0, 1);
      return c;
    }
    case ClassifierAnsatz::U2: {
      ParamCircuit c(2);
      for (std::size_t q = 0; q < 2; ++q) {
        c.add_rotation(GateKind::Rx, q);
        c.add_rotation(GateKind::Rz, q);
      }
      return c;
    }
    case ClassifierAnsatz::U3: {
      ParamCircuit c(1);
      c.add_rotation(GateKind::Rx, 0);
      c.add_rotation(GateKind::Rz, 0);
      return c;
    }
  }
  throw ContractError("unknown classifier ansatz");
}

std::string_view to_string(ClassifierAnsatz id) {
  switch (id) {
    case ClassifierAnsatz::U1: return "U1";
    case ClassifierAnsatz::U2: return "U2";
    case ClassifierAnsatz::U3: return "U3";
  }
  return "?";
}

ClassifierAnsatz classifier_ansatz_from_string(std::string_view name) {
  if (name == "U1" || name == "u1") return ClassifierAnsatz::U1;
  if (name == "U2" || name == "u2") return ClassifierAnsatz::U2;
  if (name == "U3" || name == "u3") return ClassifierAnsatz::U3;
  throw ConfigError("unknown classifier ansatz '" + std::string(name) + "'");
}

namespace {

// exp(-i theta sigma) = cos(theta) I - i sin(theta) sigma
Local2 rotation(GateKind kind, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  switch (kind) {
    case GateKind::Rx: return {c, cplx(0, -s), cplx(0, -s), c};
    case GateKind::Ry:
    case GateKind::CRy: return {c, -s, s, c};
    case GateKind::Rz: return {cplx(c, -s), 0.0, 0.0, cplx(c, s)};
    case GateKind::CX: break;
  }
  throw ContractError("rotation: not a rotation gate");
}

Local2 generator(GateKind kind) {
  switch (kind) {
    case GateKind::Rx: return {0.0, 1.0, 1.0, 0.0};
    case GateKind::Ry:
    case GateKind::CRy: return {0.0, cplx(0, -1), cplx(0, 1), 0.0};
    case GateKind::Rz: return {1.0, 0.0, 0.0, -1.0};
    case GateKind::CX: break;
  }
  throw ContractError("generator: not a rotation gate");
}

void check_theta(const ParamCircuit& c, std::span<const double> theta) {
  if (theta.size() != c.param_count()) {
    throw ShapeError("circuit expects " + std::to_string(c.param_count()) + " parameters, got " +
                     std::to_string(theta.size()));
  }
}

struct GateGeometry {
  Eigen::Index stride;
  Eigen::Index control_mask;
};

GateGeometry geometry(const Gate& g, std::size_t n) {
  return {detail::stride_of(g.target, n), g.control ? detail::stride_of(*g.control, n) : 0};
}

void left_gate(const Gate& g, std::span<const double> theta, std::size_t n, ComplexMatrix& m) {
  const auto [s, cmask] = geometry(g, n);
  if (g.kind == GateKind::CX) {
    detail::swap_rows(m, s, cmask);
  } else {
    detail::apply_left(m, rotation(g.kind, theta[*g.slot]), s, cmask);
  }
}

void right_gate_adjoint(const Gate& g, std::span<const double> theta, std::size_t n, ComplexMatrix& m) {
  const auto [s, cmask] = geometry(g, n);
  if (g.kind == GateKind::CX) {
    detail::swap_cols(m, s, cmask);
  } else {
    detail::apply_right_adjoint(m, rotation(g.kind, theta[*g.slot]), s, cmask);
  }
}

bool fusable(const Gate& g) {
  return g.kind == GateKind::Rx || g.kind == GateKind::Ry || g.kind == GateKind::Rz;
}

Local2 mul(const Local2& a, const Local2& b) {
  return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11, a.m10 * b.m00 + a.m11 * b.m10,
          a.m10 * b.m01 + a.m11 * b.m11};
}

Local2 adjoint(const Local2& a) { return {std::conj(a.m00), std::conj(a.m10), std::conj(a.m01), std::conj(a.m11)}; }

constexpr Local2 kIdentity2{1.0, 0.0, 0.0, 1.0};

// Splits the gate list into runs [i, j). Consecutive single-qubit rotations on
// the same qubit form one run (an HEA layer has three per qubit), so they cost
// one dense update instead of three.
template <typename F>
void for_each_run(const std::vector<Gate>& gates, F&& f) {
  std::size_t i = 0;
  while (i < gates.size()) {
    std::size_t j = i + 1;
    if (fusable(gates[i])) {
      while (j < gates.size() && fusable(gates[j]) && gates[j].target == gates[i].target) ++j;
    }
    f(i, j);
    i = j;
  }
}

Local2 run_product(const std::vector<Gate>& gates, std::size_t i, std::size_t j, std::span<const double> theta) {
  Local2 total = kIdentity2;
  for (std::size_t k = i; k < j; ++k) total = mul(rotation(gates[k].kind, theta[*gates[k].slot]), total);
  return total;
}

}  // namespace

void apply_circuit_left(const ParamCircuit& c, std::span<const double> theta, ComplexMatrix& m) {
  check_theta(c, theta);
  if (static_cast<std::size_t>(m.rows()) != c.dim()) throw ShapeError("apply_circuit_left: dim mismatch");
  const auto& gates = c.gates();
  for_each_run(gates, [&](std::size_t i, std::size_t j) {
    if (!fusable(gates[i])) return left_gate(gates[i], theta, c.qubits(), m);
    detail::apply_left(m, run_product(gates, i, j, theta), detail::stride_of(gates[i].target, c.qubits()), 0);
  });
}

ComplexMatrix unitary(const ParamCircuit& c, std::span<const double> theta) {
  const auto d = static_cast<Eigen::Index>(c.dim());
  ComplexMatrix u = ComplexMatrix::Identity(d, d);
  apply_circuit_left(c, theta, u);
  return u;
}

ComplexMatrix conjugate(const ParamCircuit& c, std::span<const double> theta, const ComplexMatrix& rho) {
  check_theta(c, theta);
  if (static_cast<std::size_t>(rho.rows()) != c.dim() || rho.rows() != rho.cols()) {
    throw ShapeError("conjugate: dim mismatch");
  }
  ComplexMatrix m = rho;
  const auto& gates = c.gates();
  for_each_run(gates, [&](std::size_t i, std::size_t j) {
    if (!fusable(gates[i])) {
      left_gate(gates[i], theta, c.qubits(), m);
      right_gate_adjoint(gates[i], theta, c.qubits(), m);
      return;
    }
    const Local2 g = run_product(gates, i, j, theta);
    const Eigen::Index s = detail::stride_of(gates[i].target, c.qubits());
    detail::apply_left(m, g, s, 0);
    detail::apply_right_adjoint(m, g, s, 0);
  });
  return m;
}

ComplexMatrix u1(std::span<const double> theta) { return unitary(classifier_circuit(ClassifierAnsatz::U1), theta); }
ComplexMatrix u2(std::span<const double> theta) { return unitary(classifier_circuit(ClassifierAnsatz::U2), theta); }
ComplexMatrix u3(std::span<const double> theta) { return unitary(classifier_circuit(ClassifierAnsatz::U3), theta); }

std::vector<double> gradient(std::span<const SlotRule> rules, const Objective& f, std::span<const double> theta) {
  if (rules.size() != theta.size()) throw ShapeError("gradient: rule count != parameter count");
  std::vector<double> shifted(theta.begin(), theta.end());
  std::vector<double> grad(theta.size(), 0.0);
  constexpr double quarter_pi = std::numbers::pi / 4.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double step = rules[k] == SlotRule::PauliShift ? quarter_pi : kFiniteDifferenceStep;
    shifted[k] = theta[k] + step;
    const double up = f(shifted);
    shifted[k] = theta[k] - step;
    const double down = f(shifted);
    shifted[k] = theta[k];
    grad[k] = rules[k] == SlotRule::PauliShift ? up - down : (up - down) / (2.0 * step);
  }
  return grad;
}

std::vector<double> gradient(const ParamCircuit& c, const Objective& f, std::span<const double> theta) {
  check_theta(c, theta);
  const auto rules = c.slot_rules();
  return gradient(rules, f, theta);
}

std::vector<std::vector<double>> jacobian(std::span<const SlotRule> rules, const VectorObjective& f,
                                          std::span<const double> theta) {
  if (rules.size() != theta.size()) throw ShapeError("jacobian: rule count != parameter count");
  std::vector<double> shifted(theta.begin(), theta.end());
  std::vector<std::vector<double>> jac(theta.size());
  constexpr double quarter_pi = std::numbers::pi / 4.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const bool shift = rules[k] == SlotRule::PauliShift;
    const double step = shift ? quarter_pi : kFiniteDifferenceStep;
    shifted[k] = theta[k] + step;
    auto up = f(shifted);
    shifted[k] = theta[k] - step;
    const auto down = f(shifted);
    shifted[k] = theta[k];
    if (up.size() != down.size()) throw ContractError("jacobian: objective changed output length");
    for (std::size_t j = 0; j < up.size(); ++j) {
      up[j] = shift ? up[j] - down[j] : (up[j] - down[j]) / (2.0 * step);
    }
    jac[k] = std::move(up);
  }
  return jac;
}

std::vector<double> finite_difference_gradient(const Objective& f, std::span<const double> theta, double h) {
  std::vector<double> shifted(theta.begin(), theta.end());
  std::vector<double> grad(theta.size(), 0.0);
  for (std::size_t k = 0; k < theta.size(); ++k) {
    shifted[k] = theta[k] + h;
    const double up = f(shifted);
    shifted[k] = theta[k] - h;
    const double down = f(shifted);
    shifted[k] = theta[k];
    grad[k] = (up - down) / (2.0 * h);
  }
  return grad;
}

void accumulate_gradient(const ParamCircuit& c, std::span<const double> theta, const ComplexMatrix& z,
                         std::span<double> grad, double weight) {
  check_theta(c, theta);
  if (grad.size() != c.param_count()) throw ShapeError("accumulate_gradient: gradient size mismatch");
  if (static_cast<std::size_t>(z.rows()) != c.dim() || z.rows() != z.cols()) {
    throw ShapeError("accumulate_gradient: dim mismatch");
  }
  // A_j = U_{<=j} Z U_{<=j}^dagger; dF/dtheta_j = 2 Im Tr(H_j A_j).
  // Inside a fused run only the post-run A is formed: Tr(H_j A_j) equals
  // Tr(W H_j W^dagger A_run) with W the gates of the run after j.
  ComplexMatrix a = z;
  const auto& gates = c.gates();
  for_each_run(gates, [&](std::size_t i, std::size_t j) {
    const Gate& g = gates[i];
    const auto [s, cmask] = geometry(g, c.qubits());
    if (!fusable(g)) {
      left_gate(g, theta, c.qubits(), a);
      right_gate_adjoint(g, theta, c.qubits(), a);
      if (g.slot) grad[*g.slot] += weight * 2.0 * detail::local_trace(a, generator(g.kind), s, cmask).imag();
      return;
    }
    const Local2 total = run_product(gates, i, j, theta);
    detail::apply_left(a, total, s, 0);
    detail::apply_right_adjoint(a, total, s, 0);
    Local2 w = kIdentity2;
    for (std::size_t k = j; k-- > i;) {
      const Local2 h = mul(mul(w, generator(gates[k].kind)), adjoint(w));
      grad[*gates[k].slot] += weight * 2.0 * detail::local_trace(a, h, s, 0).imag();
      w = mul(w, rotation(gates[k].kind, theta[*gates[k].slot]));
    }
  });
}

}  // namespace chandis
