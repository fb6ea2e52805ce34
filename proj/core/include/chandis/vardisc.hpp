#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "chandis/ansatz.hpp"
#include "chandis/channels.hpp"
#include "chandis/lbfgs.hpp"
#include "chandis/qcore.hpp"

namespace chandis {

enum class Strategy { Parallel, Sequential };

std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view name);

struct StrategySpec {
  Strategy strategy = Strategy::Parallel;
  /// Channel uses.
  std::size_t p = 1;
  /// Ancilla qubits in the untouched register.
  std::size_t r = 0;
  /// Hardware-efficient layers per unitary block.
  std::size_t l = 1;
  std::size_t restarts = 10;
  std::uint64_t seed = 0;
};

class Povm {
public:
  explicit Povm(std::vector<ComplexMatrix> elements);
  const std::vector<ComplexMatrix>& elements() const { return elements_; }

private:
  std::vector<ComplexMatrix> elements_;
};

/// Pi_0 = sum of the first dim/2 basis projectors, Pi_1 the rest. With qubit 0
/// as the most significant bit this is a sigma_z measurement of qubit 0.
Povm povm_half(std::size_t dim);

/// The variational circuit of one strategy for one channel.
///
/// Parallel:   U(theta_1) (Phi^{(x)p} (x) id_R) U(theta_0) on |0...0>, with
///             p*k_in + r qubits before and p*k_out + r after the channels.
/// Sequential: U(theta_p) (Phi (x) id_R) ... U(theta_1) (Phi (x) id_R) U(theta_0)
///             on k_in + r qubits. When the channel shrinks its input
///             (k_out < k_in) fresh |0> qubits are prepended after every use
///             except the last so the next block sees the full register.
/// Each U(theta_k) is hea(width, l); parameters are laid out block by block.
class StrategyCircuit {
public:
  StrategyCircuit(const KrausChannel& channel, Strategy strategy, std::size_t p, std::size_t r, std::size_t l);

  std::size_t param_count() const { return param_count_; }
  std::size_t input_qubits() const { return input_qubits_; }
  std::size_t output_dim() const { return output_dim_; }
  std::vector<SlotRule> slot_rules() const;

  /// Output state for parameters theta.
  ComplexMatrix output(std::span<const double> theta) const;

  /// Tr(observable * output) and its gradient, accumulated with `weight`.
  double expectation_and_gradient(std::span<const double> theta, const ComplexMatrix& observable,
                                  std::span<double> grad, double weight = 1.0) const;

private:
  struct Block {
    ParamCircuit circuit;
    std::size_t offset;
  };
  struct ChannelStage {
    KrausChannel embedded;
  };
  struct FreshStage {
    std::size_t count;
  };
  using Stage = std::variant<Block, ChannelStage, FreshStage>;

  std::vector<Stage> stages_;
  std::size_t param_count_ = 0;
  std::size_t input_qubits_ = 0;
  std::size_t output_dim_ = 0;
};

DensityMatrix parallel_output(std::span<const double> theta, const KrausChannel& ch, std::size_t p, std::size_t r,
                              std::size_t l);
DensityMatrix sequential_output(std::span<const double> theta, const KrausChannel& ch, std::size_t p,
                                std::size_t r, std::size_t l);

/// 1/2 [Tr(Pi_0 rho_out(theta, Phi_0)) + Tr(Pi_1 rho_out(theta, Phi_1))] for the
/// half-split POVM, with an analytic gradient.
class SuccessObjective {
public:
  SuccessObjective(const KrausChannel& phi0, const KrausChannel& phi1, const StrategySpec& spec);

  std::size_t param_count() const { return circuit0_.param_count(); }
  std::vector<SlotRule> slot_rules() const { return circuit0_.slot_rules(); }
  double value(std::span<const double> theta) const;
  double value_and_gradient(std::span<const double> theta, std::span<double> grad) const;

private:
  StrategyCircuit circuit0_;
  StrategyCircuit circuit1_;
  ComplexMatrix pi0_;
  ComplexMatrix pi1_;
};

double success_prob(std::span<const double> theta, const KrausChannel& phi0, const KrausChannel& phi1,
                    const StrategySpec& spec);

struct RestartRecord {
  std::size_t restart = 0;
  double final_value = 0.0;
  int iterations = 0;
  double seconds = 0.0;
  LbfgsStatus status = LbfgsStatus::MaxIterations;
  std::vector<double> params;
};

struct TrainReport {
  double best_value = 0.0;
  std::vector<double> best_params;
  /// Best-so-far success probability per iteration of the winning restart.
  std::vector<double> history;
  std::vector<RestartRecord> per_restart;
  double wall_time = 0.0;
  std::uint64_t seed = 0;
  std::size_t failed_restarts = 0;
};

struct TrainOptions {
  LbfgsOptions lbfgs{};
  std::size_t threads = 0;  // 0: worker_count()
};

/// Multi-restart maximisation of the success probability; each restart starts
/// from theta uniform in [0, 2 pi) drawn from its own stream (seed, restart).
TrainReport train(const KrausChannel& phi0, const KrausChannel& phi1, const StrategySpec& spec,
                  const TrainOptions& options = {});

/// Same, with restart k started from initial[k] instead of a random point.
TrainReport train_from(const KrausChannel& phi0, const KrausChannel& phi1, const StrategySpec& spec,
                       std::span<const std::vector<double>> initial, const TrainOptions& options = {});

struct AlphaPair {
  double alpha0;
  double alpha1;
};

/// (0.0, 0.1) ... (0.9, 1.0).
std::vector<AlphaPair> default_sweep_pairs();

/// Depolarising sweep. Pairs with alpha0 < 0.5 form an ascending chain and the
/// rest a descending chain; the first pair of each chain is trained from random
/// starts and, with warm_start, every later pair continues restart k from
/// restart k's optimum at the previous pair. Reports follow the input order.
std::vector<TrainReport> sweep_depolarizing(const StrategySpec& spec, std::span<const AlphaPair> pairs,
                                            bool warm_start, const TrainOptions& options = {});

}  // namespace chandis
