#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "chandis/ansatz.hpp"
#include "chandis/lbfgs.hpp"
#include "chandis/qcore.hpp"

namespace chandis {

/// Paired items are Phi(alpha_y)[rho] (x) rho (two qubits); output-only items
/// are Phi(alpha_y)[rho] alone (one qubit, for U3).
enum class Pairing { Paired, OutputOnly };

Pairing pairing_for(ClassifierAnsatz id);

struct LabeledState {
  DensityMatrix state;
  int label;  // 0 or 1
};

struct ClassifierDataset {
  std::vector<LabeledState> items;
  Pairing pairing = Pairing::Paired;
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  std::uint64_t seed = 0;
};

/// Per item: fair-coin label y, Hilbert-Schmidt random qubit rho, then the
/// channel output (optionally paired with rho). Deterministic in `seed`.
ClassifierDataset make_dataset(double alpha0, double alpha1, std::size_t n, Pairing pairing, std::uint64_t seed);

struct TrainedClassifier {
  ClassifierAnsatz ansatz = ClassifierAnsatz::U2;
  std::vector<double> theta;
  double b = 0.5;
  double train_accuracy = 0.0;
  double loss = 0.0;
};

/// p = (1 + <Z (x) Z>) / 2 after U(theta) for two-qubit ansatze, (1 + <Z>) / 2 for U3.
double predict_value(ClassifierAnsatz id, std::span<const double> theta, const DensityMatrix& state);
double predict_value(const TrainedClassifier& clf, const DensityMatrix& state);

/// Least-squares loss sum_j (y_j - p_j(theta))^2 and its exact gradient.
double classifier_loss(ClassifierAnsatz id, const ClassifierDataset& data, std::span<const double> theta,
                       std::span<double> grad = {});

struct ThresholdResult {
  double b = 0.5;
  double accuracy = 0.0;
  /// Number of (sorted) predictions assigned to class 0.
  std::size_t cut = 0;
};

/// Best cut of the sorted predictions (p <= b is class 0); ties go to the
/// smallest cut. Cuts between equal predictions are not realisable and skipped.
ThresholdResult find_threshold(std::span<const double> predictions, std::span<const int> labels);

struct ClassifierOptions {
  std::size_t restarts = 5;
  std::uint64_t seed = 0;
  LbfgsOptions lbfgs{};
};

TrainedClassifier train_classifier(ClassifierAnsatz id, const ClassifierDataset& data,
                                   const ClassifierOptions& options = {});

double evaluate(const TrainedClassifier& clf, const ClassifierDataset& test);

struct HeatmapCell {
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double b = 0.5;
  double seconds = 0.0;
};

/// One cell per (alpha0, alpha1) in grid x grid, row-major in alpha0.
std::vector<HeatmapCell> accuracy_heatmap(ClassifierAnsatz id, std::span<const double> grid, std::size_t n_train,
                                          std::size_t n_test, std::uint64_t seed,
                                          const ClassifierOptions& options = {});

/// Candidate alpha with the highest mean test accuracy over the off-diagonal
/// cells in which it appears (as alpha0 or alpha1).
double peak_alpha(std::span<const HeatmapCell> cells, std::span<const double> candidates);

/// 0.0, 0.1, ..., 1.0
std::vector<double> default_alpha_grid();

}  // namespace chandis
