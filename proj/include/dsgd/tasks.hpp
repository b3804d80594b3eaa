#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "dsgd/circuits.hpp"
#include "dsgd/dataset.hpp"
#include "dsgd/estimators.hpp"
#include "dsgd/pauli.hpp"
#include "dsgd/rng.hpp"
#include "dsgd/state_vector.hpp"

namespace dsgd {

/// Exact loss or an n-shot estimate of it.
struct LossMode {
  std::optional<std::size_t> shots;  // empty = exact

  static LossMode exact() { return {}; }
  static LossMode sampled(std::size_t n) { return {n}; }
};

/// Smallest eigenvalue of H on `num_qubits` qubits. Diagonal H is enumerated
/// over bitstrings (up to 24 qubits); otherwise dense diagonalization is used
/// (up to 12 qubits).
double ground_energy(const PauliObservable& hamiltonian, int num_qubits);

/// Open chain sum_j Z_j Z_{j+1} + sum_j X_j.
PauliObservable tfim_hamiltonian(int num_qubits);

struct TfimTask {
  int num_qubits = 0;
  int num_blocks = 0;
  PauliObservable hamiltonian;
  ParamCircuit circuit{1, 0};

  /// Uniform in [0, 2pi) per slot.
  ParameterVector initial_theta(RngStream& rng) const;
  double ground_energy() const;
};

TfimTask build_tfim(int num_qubits, int num_blocks);

double evaluate_loss(const TfimTask& task, std::span<const double> theta, const LossMode& mode,
                     RngStream* rng = nullptr);

using Edge = std::pair<int, int>;

struct MaxCutTask {
  int num_vertices = 0;
  std::vector<Edge> edges;
  int depth = 0;  // number of parameters, two per layer
  PauliObservable problem;
  PauliObservable mixer;
  ParamCircuit circuit{1, 0};
  StateVector initial{1};  // ground state of the mixer, |->^N
  double ground_energy = 0.0;

  /// Linear interpolation: with 1-based j, odd j get j/d and even j get 1 - j/d.
  ParameterVector initial_theta() const;
  double energy(std::span<const double> theta) const;
  /// <H^P>/|E_ground| + 1, in [0, 2].
  double normalized_cost(std::span<const double> theta) const;
};

/// `depth` counts parameters and must be even. Vertices are 0..num_vertices-1;
/// pass 0 to size the graph from the largest edge endpoint.
MaxCutTask build_maxcut(const std::vector<Edge>& edges, int depth, int num_vertices = 0);

/// Uniformly random simple graph with exactly `num_edges` edges.
std::vector<Edge> random_maxcut_instance(int num_vertices, int num_edges, RngStream& rng);

double evaluate_loss(const MaxCutTask& task, std::span<const double> theta, const LossMode& mode,
                     RngStream* rng = nullptr);

enum class Split { Train, Validation };

/// Binary classifier: amplitude-encoded input, sigma-block circuit, readout Z
/// on qubit 0, prediction +1 when <Z> >= 0 and -1 otherwise.
struct ClassifierTask {
  int num_qubits = 0;
  int num_blocks = 0;
  ParamCircuit circuit{1, 0};
  PauliObservable readout;
  std::vector<StateVector> train_inputs;
  std::vector<double> train_targets;
  std::vector<StateVector> validation_inputs;
  std::vector<double> validation_targets;

  ParameterVector initial_theta(RngStream& rng) const;
  MseEstimator estimator(const EstimatorConfig& config) const;
};

ClassifierTask build_classifier(const Dataset& dataset, int num_blocks);

/// Mean squared residual over a split. The sampled form uses two independent
/// n-shot means per instance, (o1 - y)(o2 - y), which is unbiased.
double evaluate_loss(const ClassifierTask& task, std::span<const double> theta,
                     const LossMode& mode, RngStream* rng = nullptr, Split split = Split::Train);

std::vector<int> predict(const ClassifierTask& task, std::span<const double> theta, Split split);

/// Fraction of validation instances classified correctly, exact readout.
double validation_accuracy(const ClassifierTask& task, std::span<const double> theta);

}  // namespace dsgd
