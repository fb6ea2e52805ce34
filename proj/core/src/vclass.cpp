#include "chandis/vclass.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <string>
#include <cmath>
#include <numbers>
#include <numeric>

#include "chandis/channels.hpp"
#include "chandis/errors.hpp"
#include "chandis/parallel.hpp"
#include "chandis/random.hpp"

namespace chandis {

Pairing pairing_for(ClassifierAnsatz id) {
  return id == ClassifierAnsatz::U3 ? Pairing::OutputOnly : Pairing::Paired;
}

ClassifierDataset make_dataset(double alpha0, double alpha1, std::size_t n, Pairing pairing, std::uint64_t seed) {
  const KrausChannel ch0 = depolarizing(alpha0);
  const KrausChannel ch1 = depolarizing(alpha1);
  ClassifierDataset data;
  data.pairing = pairing;
  data.alpha0 = alpha0;
  data.alpha1 = alpha1;
  data.seed = seed;
  data.items.reserve(n);
  Rng rng = SeedPath(seed).child("classifier-dataset").rng();
  for (std::size_t j = 0; j < n; ++j) {
    const int y = coin(rng) ? 1 : 0;
    const DensityMatrix rho = random_mixed_state(2, rng);
    DensityMatrix out = chandis::apply(y == 0 ? ch0 : ch1, rho);
    if (pairing == Pairing::Paired) out = tensor(out, rho);
    data.items.push_back({std::move(out), y});
  }
  return data;
}

namespace {

ComplexMatrix readout(ClassifierAnsatz id) {
  return id == ClassifierAnsatz::U3 ? pauli::z() : tensor(pauli::z(), pauli::z());
}

void check_dims(ClassifierAnsatz id, std::size_t dim) {
  const std::size_t want = id == ClassifierAnsatz::U3 ? 2 : 4;
  if (dim != want) {
    throw ShapeError("classifier " + std::string(to_string(id)) + " expects dim " + std::to_string(want) +
                     ", got " + std::to_string(dim));
  }
}

double to_probability(double expect) { return std::clamp(0.5 * (1.0 + expect), 0.0, 1.0); }

}  // namespace

double predict_value(ClassifierAnsatz id, std::span<const double> theta, const DensityMatrix& state) {
  check_dims(id, state.dim());
  const ParamCircuit c = classifier_circuit(id);
  return to_probability(expectation(conjugate(c, theta, state.matrix()), readout(id)));
}

double predict_value(const TrainedClassifier& clf, const DensityMatrix& state) {
  return predict_value(clf.ansatz, clf.theta, state);
}

double classifier_loss(ClassifierAnsatz id, const ClassifierDataset& data, std::span<const double> theta,
                       std::span<double> grad) {
  const ParamCircuit c = classifier_circuit(id);
  if (theta.size() != c.param_count()) throw ShapeError("classifier_loss: parameter count mismatch");
  const ComplexMatrix u = unitary(c, theta);
  const ComplexMatrix pulled = u.adjoint() * readout(id) * u;
  const auto d = static_cast<Eigen::Index>(c.dim());
  ComplexMatrix weighted = ComplexMatrix::Zero(d, d);
  double loss = 0.0;
  for (const auto& item : data.items) {
    check_dims(id, item.state.dim());
    // Unclamped here so the loss stays smooth.
    const double p = 0.5 * (1.0 + (pulled * item.state.matrix()).trace().real());
    const double r = item.label - p;
    loss += r * r;
    // dL/dp = -2 r, dp/d<O> = 1/2.
    if (!grad.empty()) weighted += (-r) * item.state.matrix();
  }
  if (!grad.empty()) {
    if (grad.size() != theta.size()) throw ShapeError("classifier_loss: gradient size mismatch");
    std::fill(grad.begin(), grad.end(), 0.0);
    accumulate_gradient(c, theta, weighted * pulled, grad);
  }
  return loss;
}

ThresholdResult find_threshold(std::span<const double> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw ShapeError("find_threshold: length mismatch");
  const std::size_t n = predictions.size();
  if (n == 0) throw ContractError("find_threshold: no predictions");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return predictions[a] < predictions[b]; });
  for (const double p : predictions) {
    if (!std::isfinite(p)) throw ContractError("find_threshold: non-finite prediction");
  }

  // Cut t: sorted[0..t) are class 0. correct(t) = zeros in prefix + ones in suffix.
  std::size_t ones_total = 0;
  for (const int y : labels) ones_total += y == 1 ? 1 : 0;
  std::size_t best_cut = 0;
  std::size_t best_correct = ones_total;
  std::size_t zeros_prefix = 0;
  std::size_t ones_prefix = 0;
  for (std::size_t t = 1; t <= n; ++t) {
    const int y = labels[order[t - 1]];
    (y == 1 ? ones_prefix : zeros_prefix) += 1;
    if (t < n && predictions[order[t]] == predictions[order[t - 1]]) continue;
    const std::size_t correct = zeros_prefix + (ones_total - ones_prefix);
    if (correct > best_correct) {
      best_correct = correct;
      best_cut = t;
    }
  }

  ThresholdResult res;
  res.cut = best_cut;
  res.accuracy = static_cast<double>(best_correct) / static_cast<double>(n);
  const double lowest = std::nextafter(0.0, 1.0);
  const double highest = std::nextafter(1.0, 0.0);
  if (best_cut == 0) {
    res.b = std::nextafter(predictions[order[0]], -1.0);
  } else {
    res.b = predictions[order[best_cut - 1]];
  }
  res.b = std::clamp(res.b, lowest, highest);
  return res;
}

TrainedClassifier train_classifier(ClassifierAnsatz id, const ClassifierDataset& data,
                                   const ClassifierOptions& options) {
  if (data.pairing != pairing_for(id)) throw ContractError("train_classifier: dataset pairing does not fit ansatz");
  if (data.items.empty()) throw ContractError("train_classifier: empty dataset");
  if (options.restarts == 0) throw ContractError("train_classifier: restarts must be >= 1");
  const ParamCircuit c = classifier_circuit(id);
  const auto n = static_cast<Eigen::Index>(c.param_count());
  const SeedPath root = SeedPath(options.seed).child("classifier-fit");

  TrainedClassifier best;
  best.ansatz = id;
  best.loss = std::numeric_limits<double>::infinity();
  std::vector<double> grad(c.param_count());
  const GradientObjective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    const double loss = classifier_loss(id, data, {x.data(), c.param_count()}, grad);
    g = Eigen::Map<const Eigen::VectorXd>(grad.data(), n);
    return loss;
  };
  for (std::size_t k = 0; k < options.restarts; ++k) {
    Rng rng = root.child(k).rng();
    Eigen::VectorXd x0(n);
    for (Eigen::Index i = 0; i < n; ++i) x0(i) = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const LbfgsResult res = minimize_lbfgs(f, x0, options.lbfgs);
    if (!std::isfinite(res.f)) continue;
    if (res.f < best.loss) {
      best.loss = res.f;
      best.theta.assign(res.x.data(), res.x.data() + n);
    }
  }
  if (best.theta.empty()) throw ContractError("train_classifier: every restart produced a non-finite loss");

  std::vector<double> preds;
  std::vector<int> labels;
  for (const auto& item : data.items) {
    preds.push_back(predict_value(id, best.theta, item.state));
    labels.push_back(item.label);
  }
  const ThresholdResult thr = find_threshold(preds, labels);
  best.b = thr.b;
  best.train_accuracy = thr.accuracy;
  return best;
}

double evaluate(const TrainedClassifier& clf, const ClassifierDataset& test) {
  if (test.items.empty()) throw ContractError("evaluate: empty test set");
  std::size_t correct = 0;
  for (const auto& item : test.items) {
    const int yhat = predict_value(clf, item.state) <= clf.b ? 0 : 1;
    correct += yhat == item.label ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(test.items.size());
}

std::vector<HeatmapCell> accuracy_heatmap(ClassifierAnsatz id, std::span<const double> grid, std::size_t n_train,
                                          std::size_t n_test, std::uint64_t seed, const ClassifierOptions& options) {
  const std::size_t g = grid.size();
  std::vector<HeatmapCell> cells(g * g);
  const SeedPath root = SeedPath(seed).child("heatmap");
  parallel_for(cells.size(), [&](std::size_t idx) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t i = idx / g;
    const std::size_t j = idx % g;
    const SeedPath cell = root.child(i).child(j);
    const Pairing pairing = pairing_for(id);
    const auto train = make_dataset(grid[i], grid[j], n_train, pairing, cell.child("train").seed());
    const auto test = make_dataset(grid[i], grid[j], n_test, pairing, cell.child("test").seed());
    ClassifierOptions opt = options;
    opt.seed = cell.child("fit").seed();
    const TrainedClassifier clf = train_classifier(id, train, opt);
    HeatmapCell& out = cells[idx];
    out.alpha0 = grid[i];
    out.alpha1 = grid[j];
    out.train_accuracy = clf.train_accuracy;
    out.test_accuracy = evaluate(clf, test);
    out.b = clf.b;
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });
  return cells;
}

double peak_alpha(std::span<const HeatmapCell> cells, std::span<const double> candidates) {
  if (candidates.empty()) throw ContractError("peak_alpha: no candidates");
  constexpr double eq_tol = 1e-9;
  double best_alpha = candidates.front();
  double best_mean = -1.0;
  for (const double a : candidates) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& c : cells) {
      if (std::abs(c.alpha0 - c.alpha1) < eq_tol) continue;
      if (std::abs(c.alpha0 - a) < eq_tol || std::abs(c.alpha1 - a) < eq_tol) {
        sum += c.test_accuracy;
        ++count;
      }
    }
    if (count == 0) continue;
    const double mean = sum / static_cast<double>(count);
    if (mean > best_mean) {
      best_mean = mean;
      best_alpha = a;
    }
  }
  return best_alpha;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 10; ++i) g.push_back(i / 10.0);
  return g;
}

}  // namespace chandis
