#include "chandis/vardisc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "chandis/errors.hpp"
#include "chandis/parallel.hpp"
#include "chandis/random.hpp"

namespace chandis {

std::string_view to_string(Strategy s) { return s == Strategy::Parallel ? "parallel" : "sequential"; }

Strategy strategy_from_string(std::string_view name) {
  if (name == "parallel" || name == "par") return Strategy::Parallel;
  if (name == "sequential" || name == "seq") return Strategy::Sequential;
  throw ConfigError("unknown strategy '" + std::string(name) + "' (expected parallel or sequential)");
}

Povm::Povm(std::vector<ComplexMatrix> elements) : elements_(std::move(elements)) {
  if (elements_.empty()) throw ShapeError("Povm: no elements");
  const auto d = elements_.front().rows();
  ComplexMatrix sum = ComplexMatrix::Zero(d, d);
  for (const auto& e : elements_) {
    if (e.rows() != d || e.cols() != d) throw ShapeError("Povm: element shapes differ");
    if (hermiticity_error(e) > kHermitianTol) throw ContractError("Povm: element is not Hermitian");
    if (hermitian_eigenvalues(e).minCoeff() < kPsdTol) throw ContractError("Povm: element is not PSD");
    sum += e;
  }
  if ((sum - ComplexMatrix::Identity(d, d)).cwiseAbs().maxCoeff() > kHermitianTol) {
    throw ContractError("Povm: elements do not sum to the identity");
  }
}

Povm povm_half(std::size_t dim) {
  if (dim == 0 || dim % 2 != 0) throw ShapeError("povm_half: dimension must be even");
  const auto d = static_cast<Eigen::Index>(dim);
  ComplexMatrix p0 = ComplexMatrix::Zero(d, d);
  ComplexMatrix p1 = ComplexMatrix::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) (j < d / 2 ? p0 : p1)(j, j) = 1.0;
  return Povm({std::move(p0), std::move(p1)});
}

StrategyCircuit::StrategyCircuit(const KrausChannel& channel, Strategy strategy, std::size_t p, std::size_t r,
                                 std::size_t l) {
  if (p == 0) throw ContractError("StrategyCircuit: p must be >= 1");
  if (l == 0) throw ContractError("StrategyCircuit: l must be >= 1");
  const std::size_t k_in = qubit_count(channel.in_dim());
  const std::size_t k_out = qubit_count(channel.out_dim());

  auto add_block = [&](std::size_t width) {
    Block b{hea(width, l), param_count_};
    param_count_ += b.circuit.param_count();
    stages_.emplace_back(std::move(b));
  };

  if (strategy == Strategy::Parallel) {
    input_qubits_ = p * k_in + r;
    if (input_qubits_ > 12) throw SizeError("parallel strategy: register exceeds 12 qubits");
    add_block(input_qubits_);
    for (std::size_t i = 0; i < p; ++i) {
      stages_.emplace_back(ChannelStage{embed(channel, i * k_out, (p - 1 - i) * k_in + r)});
    }
    add_block(p * k_out + r);
    output_dim_ = std::size_t{1} << (p * k_out + r);
  } else {
    if (k_out > k_in) throw ShapeError("sequential strategy: channel must not enlarge its input");
    input_qubits_ = k_in + r;
    if (input_qubits_ > 12) throw SizeError("sequential strategy: register exceeds 12 qubits");
    const KrausChannel embedded = embed(channel, 0, r);
    add_block(input_qubits_);
    for (std::size_t i = 0; i < p; ++i) {
      stages_.emplace_back(ChannelStage{embedded});
      if (i + 1 < p) {
        if (k_out < k_in) stages_.emplace_back(FreshStage{k_in - k_out});
        add_block(k_in + r);
      }
    }
    add_block(k_out + r);
    output_dim_ = std::size_t{1} << (k_out + r);
  }
}

std::vector<SlotRule> StrategyCircuit::slot_rules() const {
  std::vector<SlotRule> rules;
  rules.reserve(param_count_);
  for (const auto& st : stages_) {
    if (const auto* b = std::get_if<Block>(&st)) {
      const auto r = b->circuit.slot_rules();
      rules.insert(rules.end(), r.begin(), r.end());
    }
  }
  return rules;
}

namespace {

ComplexMatrix zero_state(std::size_t qubits) {
  const auto d = static_cast<Eigen::Index>(std::size_t{1} << qubits);
  ComplexMatrix rho = ComplexMatrix::Zero(d, d);
  rho(0, 0) = 1.0;
  return rho;
}

ComplexMatrix prepend_zeros(ComplexMatrix rho, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) rho = insert_fresh_qubit(rho, QubitPosition::Front);
  return rho;
}

}  // namespace

ComplexMatrix StrategyCircuit::output(std::span<const double> theta) const {
  if (theta.size() != param_count_) throw ShapeError("StrategyCircuit: parameter count mismatch");
  ComplexMatrix rho = zero_state(input_qubits_);
  for (const auto& st : stages_) {
    if (const auto* b = std::get_if<Block>(&st)) {
      rho = conjugate(b->circuit, theta.subspan(b->offset, b->circuit.param_count()), rho);
    } else if (const auto* c = std::get_if<ChannelStage>(&st)) {
      rho = chandis::apply(c->embedded, rho);
    } else {
      rho = prepend_zeros(std::move(rho), std::get<FreshStage>(st).count);
    }
  }
  return rho;
}

double StrategyCircuit::expectation_and_gradient(std::span<const double> theta, const ComplexMatrix& observable,
                                                 std::span<double> grad, double weight) const {
  if (theta.size() != param_count_) throw ShapeError("StrategyCircuit: parameter count mismatch");
  if (grad.size() != param_count_) throw ShapeError("StrategyCircuit: gradient size mismatch");
  if (static_cast<std::size_t>(observable.rows()) != output_dim_) {
    throw ShapeError("StrategyCircuit: observable dim mismatch");
  }
  // Forward pass keeps each block's input state and unitary.
  std::vector<ComplexMatrix> inputs(stages_.size());
  std::vector<ComplexMatrix> unitaries(stages_.size());
  ComplexMatrix rho = zero_state(input_qubits_);
  for (std::size_t k = 0; k < stages_.size(); ++k) {
    const auto& st = stages_[k];
    if (const auto* b = std::get_if<Block>(&st)) {
      inputs[k] = rho;
      unitaries[k] = unitary(b->circuit, theta.subspan(b->offset, b->circuit.param_count()));
      rho = unitaries[k] * rho * unitaries[k].adjoint();
    } else if (const auto* c = std::get_if<ChannelStage>(&st)) {
      rho = chandis::apply(c->embedded, rho);
    } else {
      rho = prepend_zeros(std::move(rho), std::get<FreshStage>(st).count);
    }
  }
  const double value = expectation(rho, observable);

  // Backward pass carries the Heisenberg-picture observable.
  ComplexMatrix m = observable;
  for (std::size_t k = stages_.size(); k-- > 0;) {
    const auto& st = stages_[k];
    if (const auto* b = std::get_if<Block>(&st)) {
      const ComplexMatrix pulled = unitaries[k].adjoint() * m * unitaries[k];
      const auto slots = b->circuit.param_count();
      accumulate_gradient(b->circuit, theta.subspan(b->offset, slots), inputs[k] * pulled,
                          grad.subspan(b->offset, slots), weight);
      m = pulled;
    } else if (const auto* c = std::get_if<ChannelStage>(&st)) {
      m = chandis::apply_dual(c->embedded, m);
    } else {
      for (std::size_t i = 0; i < std::get<FreshStage>(st).count; ++i) {
        m = fresh_qubit_dual(m, QubitPosition::Front);
      }
    }
  }
  return value;
}

DensityMatrix parallel_output(std::span<const double> theta, const KrausChannel& ch, std::size_t p, std::size_t r,
                              std::size_t l) {
  const StrategyCircuit c(ch, Strategy::Parallel, p, r, l);
  ComplexMatrix out = c.output(theta);
  return DensityMatrix::trusted(0.5 * (out + out.adjoint()));
}

DensityMatrix sequential_output(std::span<const double> theta, const KrausChannel& ch, std::size_t p,
                                std::size_t r, std::size_t l) {
  const StrategyCircuit c(ch, Strategy::Sequential, p, r, l);
  ComplexMatrix out = c.output(theta);
  return DensityMatrix::trusted(0.5 * (out + out.adjoint()));
}

SuccessObjective::SuccessObjective(const KrausChannel& phi0, const KrausChannel& phi1, const StrategySpec& spec)
    : circuit0_(phi0, spec.strategy, spec.p, spec.r, spec.l), circuit1_(phi1, spec.strategy, spec.p, spec.r, spec.l) {
  if (phi0.in_dim() != phi1.in_dim() || phi0.out_dim() != phi1.out_dim()) {
    throw ShapeError("SuccessObjective: channels have different dimensions");
  }
  const Povm povm = povm_half(circuit0_.output_dim());
  pi0_ = povm.elements()[0];
  pi1_ = povm.elements()[1];
}

namespace {

// Tr(Pi_0 rho) for the half-split POVM: the first half of the diagonal.
double upper_half_trace(const ComplexMatrix& rho) {
  const auto h = rho.rows() / 2;
  return rho.diagonal().head(h).real().sum();
}

double clamp_probability(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

double SuccessObjective::value(std::span<const double> theta) const {
  const double t0 = upper_half_trace(circuit0_.output(theta));
  const ComplexMatrix out1 = circuit1_.output(theta);
  const double t1 = out1.trace().real() - upper_half_trace(out1);
  return clamp_probability(0.5 * (t0 + t1));
}

double SuccessObjective::value_and_gradient(std::span<const double> theta, std::span<double> grad) const {
  std::fill(grad.begin(), grad.end(), 0.0);
  const double t0 = circuit0_.expectation_and_gradient(theta, pi0_, grad, 0.5);
  const double t1 = circuit1_.expectation_and_gradient(theta, pi1_, grad, 0.5);
  return 0.5 * (t0 + t1);
}

double success_prob(std::span<const double> theta, const KrausChannel& phi0, const KrausChannel& phi1,
                    const StrategySpec& spec) {
  const SuccessObjective obj(phi0, phi1, spec);
  if (theta.size() != obj.param_count()) throw ShapeError("success_prob: parameter count mismatch");
  return obj.value(theta);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

RestartRecord run_restart(const SuccessObjective& obj, std::size_t index, std::vector<double> start,
                          const LbfgsOptions& options, std::vector<double>& history) {
  const auto t0 = Clock::now();
  const auto n = static_cast<Eigen::Index>(obj.param_count());
  std::vector<double> grad(obj.param_count());
  const GradientObjective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    const double v = obj.value_and_gradient({x.data(), static_cast<std::size_t>(n)}, grad);
    g = -Eigen::Map<const Eigen::VectorXd>(grad.data(), n);
    return -v;
  };
  const Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(start.data(), n);
  const LbfgsResult res = minimize_lbfgs(f, x0, options);

  RestartRecord rec;
  rec.restart = index;
  rec.iterations = res.iterations;
  rec.status = res.status;
  rec.seconds = seconds_since(t0);
  if (res.status == LbfgsStatus::NonFinite || !std::isfinite(res.f)) {
    rec.status = LbfgsStatus::NonFinite;
    rec.final_value = std::numeric_limits<double>::quiet_NaN();
    return rec;
  }
  rec.params.assign(res.x.data(), res.x.data() + n);
  // Re-evaluate without the gradient path so the reported value is clamped to [0, 1].
  rec.final_value = obj.value(rec.params);
  history.clear();
  double best = 0.0;
  for (const double fv : res.history) {
    best = std::max(best, -fv);
    history.push_back(best);
  }
  return rec;
}

TrainReport train_impl(const KrausChannel& phi0, const KrausChannel& phi1, const StrategySpec& spec,
                       const std::function<std::vector<double>(std::size_t)>& start_of, std::size_t restarts,
                       const TrainOptions& options) {
  if (restarts == 0) throw ContractError("train: restarts must be >= 1");
  const auto t0 = Clock::now();
  const SuccessObjective obj(phi0, phi1, spec);
  std::vector<RestartRecord> records(restarts);
  std::vector<std::vector<double>> histories(restarts);
  const std::size_t workers = options.threads ? options.threads : worker_count();
  parallel_for(
      restarts, [&](std::size_t k) { records[k] = run_restart(obj, k, start_of(k), options.lbfgs, histories[k]); },
      workers);

  TrainReport report;
  report.seed = spec.seed;
  std::optional<std::size_t> winner;
  for (std::size_t k = 0; k < restarts; ++k) {
    if (records[k].status == LbfgsStatus::NonFinite) {
      ++report.failed_restarts;
      continue;
    }
    if (!winner || records[k].final_value > records[*winner].final_value) winner = k;
  }
  if (winner) {
    report.best_value = records[*winner].final_value;
    report.best_params = records[*winner].params;
    report.history = std::move(histories[*winner]);
  } else {
    report.best_value = std::numeric_limits<double>::quiet_NaN();
  }
  report.per_restart = std::move(records);
  report.wall_time = seconds_since(t0);
  return report;
}

}  // namespace

TrainReport train(const KrausChannel& phi0, const KrausChannel& phi1, const StrategySpec& spec,
                  const TrainOptions& options) {
  const std::size_t n = SuccessObjective(phi0, phi1, spec).param_count();
  const SeedPath root = SeedPath(spec.seed).child("vardisc");
  auto start_of = [&](std::size_t k) {
    Rng rng = root.child(k).rng();
    std::vector<double> theta(n);
    for (auto& t : theta) t = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    return theta;
  };
  return train_impl(phi0, phi1, spec, start_of, spec.restarts, options);
}

TrainReport train_from(const KrausChannel& phi0, const KrausChannel& phi1, const StrategySpec& spec,
                       std::span<const std::vector<double>> initial, const TrainOptions& options) {
  const std::size_t n = SuccessObjective(phi0, phi1, spec).param_count();
  for (const auto& v : initial) {
    if (v.size() != n) throw ShapeError("train_from: initial point has wrong length");
  }
  return train_impl(
      phi0, phi1, spec, [&](std::size_t k) { return initial[k]; }, initial.size(), options);
}

std::vector<AlphaPair> default_sweep_pairs() {
  std::vector<AlphaPair> pairs;
  for (int i = 0; i < 10; ++i) pairs.push_back({i / 10.0, (i + 1) / 10.0});
  return pairs;
}

std::vector<TrainReport> sweep_depolarizing(const StrategySpec& spec, std::span<const AlphaPair> pairs,
                                            bool warm_start, const TrainOptions& options) {
  std::vector<std::size_t> forward;
  std::vector<std::size_t> backward;
  for (std::size_t i = 0; i < pairs.size(); ++i) (pairs[i].alpha0 < 0.5 ? forward : backward).push_back(i);
  std::sort(forward.begin(), forward.end(), [&](auto a, auto b) { return pairs[a].alpha0 < pairs[b].alpha0; });
  std::sort(backward.begin(), backward.end(), [&](auto a, auto b) { return pairs[a].alpha0 > pairs[b].alpha0; });

  std::vector<TrainReport> reports(pairs.size());
  const SeedPath root = SeedPath(spec.seed).child("sweep");
  for (const auto* chain : {&forward, &backward}) {
    const TrainReport* previous = nullptr;
    for (const std::size_t i : *chain) {
      const KrausChannel phi0 = depolarizing(pairs[i].alpha0);
      const KrausChannel phi1 = depolarizing(pairs[i].alpha1);
      StrategySpec cell = spec;
      cell.seed = root.child(i).seed();
      if (warm_start && previous != nullptr) {
        std::vector<std::vector<double>> starts;
        for (const auto& rec : previous->per_restart) {
          starts.push_back(rec.params.empty() ? previous->best_params : rec.params);
        }
        reports[i] = train_from(phi0, phi1, cell, starts, options);
        reports[i].seed = cell.seed;
      } else {
        reports[i] = train(phi0, phi1, cell, options);
      }
      previous = &reports[i];
    }
  }
  return reports;
}

}  // namespace chandis
