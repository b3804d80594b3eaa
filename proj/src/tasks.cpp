#include "dsgd/tasks.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>

namespace dsgd {

namespace {

constexpr int kMaxDenseQubits = 12;

RngStream& require_rng(RngStream* rng) {
  if (rng == nullptr) throw std::invalid_argument("sampled loss needs a random stream");
  return *rng;
}

std::size_t require_shots(const LossMode& mode) {
  if (*mode.shots == 0) throw std::invalid_argument("sampled loss needs at least one shot");
  return *mode.shots;
}

ParameterVector uniform_angles(std::size_t count, RngStream& rng) {
  ParameterVector theta(count);
  for (auto& t : theta) t = 2.0 * std::numbers::pi * rng.uniform();
  return theta;
}

double observable_loss(const ParamCircuit& circuit, const PauliObservable& h,
                       std::span<const double> theta, const StateVector& initial,
                       const LossMode& mode, RngStream* rng) {
  const StateVector state = evaluate(circuit, theta, initial);
  if (!mode.shots) return expectation(state, h);
  return sample_observable(state, h, require_shots(mode), require_rng(rng));
}

}  // namespace

double ground_energy(const PauliObservable& hamiltonian, int num_qubits) {
  if (num_qubits < 1 || num_qubits > kMaxQubits) {
    throw std::invalid_argument("qubit count out of range");
  }
  if (hamiltonian.max_qubit() >= num_qubits) {
    throw std::out_of_range("Hamiltonian acts outside the register");
  }
  const std::size_t dim = std::size_t{1} << num_qubits;
  if (hamiltonian.is_diagonal()) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < dim; ++x) {
      double e = 0.0;
      for (const auto& term : hamiltonian.terms()) {
        const bool odd = std::popcount(x & term.pauli.z_mask()) & 1;
        e += odd ? -term.coefficient : term.coefficient;
      }
      best = std::min(best, e);
    }
    return best;
  }
  if (num_qubits > kMaxDenseQubits) {
    throw std::invalid_argument("dense diagonalization limited to " +
                                std::to_string(kMaxDenseQubits) + " qubits");
  }
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim));
  for (std::size_t col = 0; col < dim; ++col) {
    for (const auto& term : hamiltonian.terms()) {
      // P|x> = i^{ny} (-1)^{|x & zmask|} |x ^ xmask>
      const std::uint64_t row = col ^ term.pauli.x_mask();
      const int ny = term.pauli.num_y();
      Complex phase = 1.0;
      for (int k = 0; k < (ny & 3); ++k) phase *= Complex(0.0, 1.0);
      if (std::popcount(col & term.pauli.z_mask()) & 1) phase = -phase;
      m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) +=
          term.coefficient * phase;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("diagonalization failed");
  return solver.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------
// TFIM

PauliObservable tfim_hamiltonian(int num_qubits) {
  if (num_qubits < 2) throw std::invalid_argument("TFIM chain needs at least 2 qubits");
  std::vector<PauliTerm> terms;
  for (int j = 0; j + 1 < num_qubits; ++j) {
    terms.push_back({1.0, PauliString::from_map({{j, Pauli::Z}, {j + 1, Pauli::Z}})});
  }
  for (int j = 0; j < num_qubits; ++j) terms.push_back({1.0, PauliString::single(Pauli::X, j)});
  return PauliObservable(std::move(terms));
}

TfimTask build_tfim(int num_qubits, int num_blocks) {
  if (num_qubits < 2) throw std::invalid_argument("TFIM task needs at least 2 qubits");
  TfimTask task;
  task.num_qubits = num_qubits;
  task.num_blocks = num_blocks;
  task.hamiltonian = tfim_hamiltonian(num_qubits);
  task.circuit = build_sigma_block_ansatz(num_qubits, num_blocks);
  return task;
}

ParameterVector TfimTask::initial_theta(RngStream& rng) const {
  return uniform_angles(static_cast<std::size_t>(circuit.num_params()), rng);
}

double TfimTask::ground_energy() const { return dsgd::ground_energy(hamiltonian, num_qubits); }

double evaluate_loss(const TfimTask& task, std::span<const double> theta, const LossMode& mode,
                     RngStream* rng) {
  return observable_loss(task.circuit, task.hamiltonian, theta, StateVector(task.num_qubits), mode,
                         rng);
}

// ---------------------------------------------------------------------------
// MaxCut

MaxCutTask build_maxcut(const std::vector<Edge>& edges, int depth, int num_vertices) {
  if (edges.empty()) throw std::invalid_argument("MaxCut graph has no edges");
  if (depth < 2 || depth % 2 != 0) {
    throw std::invalid_argument("QAOA parameter count must be a positive even number");
  }
  int max_vertex = 0;
  std::set<Edge> seen;
  for (auto [a, b] : edges) {
    if (a == b) throw std::invalid_argument("self-loop on vertex " + std::to_string(a));
    if (a < 0 || b < 0) throw std::invalid_argument("negative vertex index");
    if (!seen.insert({std::min(a, b), std::max(a, b)}).second) {
      throw std::invalid_argument("duplicate edge " + std::to_string(a) + "-" + std::to_string(b));
    }
    max_vertex = std::max({max_vertex, a, b});
  }
  if (num_vertices == 0) num_vertices = max_vertex + 1;
  if (max_vertex >= num_vertices) throw std::invalid_argument("edge endpoint outside the graph");

  MaxCutTask task;
  task.num_vertices = num_vertices;
  task.edges = edges;
  task.depth = depth;
  std::vector<PauliTerm> zz;
  for (auto [a, b] : edges) {
    zz.push_back({1.0, PauliString::from_map({{a, Pauli::Z}, {b, Pauli::Z}})});
  }
  task.problem = PauliObservable(std::move(zz));
  std::vector<PauliTerm> xs;
  for (int v = 0; v < num_vertices; ++v) xs.push_back({1.0, PauliString::single(Pauli::X, v)});
  task.mixer = PauliObservable(std::move(xs));
  task.circuit = build_qaoa_ansatz(task.problem, task.mixer, depth / 2);

  const std::size_t dim = std::size_t{1} << num_vertices;
  std::vector<Complex> amps(dim);
  const double amp = 1.0 / std::sqrt(static_cast<double>(dim));
  for (std::size_t x = 0; x < dim; ++x) amps[x] = (std::popcount(x) & 1) ? -amp : amp;
  task.initial = StateVector::from_amplitudes(std::move(amps));
  task.ground_energy = dsgd::ground_energy(task.problem, num_vertices);
  return task;
}

ParameterVector MaxCutTask::initial_theta() const {
  ParameterVector theta(static_cast<std::size_t>(depth));
  const double d = static_cast<double>(depth);
  for (int j = 1; j <= depth; ++j) {
    theta[static_cast<std::size_t>(j - 1)] = (j % 2 == 1) ? j / d : 1.0 - j / d;
  }
  return theta;
}

double MaxCutTask::energy(std::span<const double> theta) const {
  return expectation(evaluate(circuit, theta, initial), problem);
}

double MaxCutTask::normalized_cost(std::span<const double> theta) const {
  return energy(theta) / std::abs(ground_energy) + 1.0;
}

std::vector<Edge> random_maxcut_instance(int num_vertices, int num_edges, RngStream& rng) {
  if (num_vertices < 2) throw std::invalid_argument("graph needs at least 2 vertices");
  const long max_edges = static_cast<long>(num_vertices) * (num_vertices - 1) / 2;
  if (num_edges < 1 || num_edges > max_edges) {
    throw std::invalid_argument("cannot place " + std::to_string(num_edges) + " edges on " +
                                std::to_string(num_vertices) + " vertices (max " +
                                std::to_string(max_edges) + ")");
  }
  std::vector<Edge> all;
  for (int a = 0; a < num_vertices; ++a) {
    for (int b = a + 1; b < num_vertices; ++b) all.emplace_back(a, b);
  }
  // Partial Fisher-Yates: the first num_edges entries are a uniform subset.
  for (std::size_t i = 0; i < static_cast<std::size_t>(num_edges); ++i) {
    const std::size_t j = i + rng.uniform_index(all.size() - i);
    std::swap(all[i], all[j]);
  }
  all.resize(static_cast<std::size_t>(num_edges));
  std::sort(all.begin(), all.end());
  return all;
}

double evaluate_loss(const MaxCutTask& task, std::span<const double> theta, const LossMode& mode,
                     RngStream* rng) {
  return observable_loss(task.circuit, task.problem, theta, task.initial, mode, rng);
}

// ---------------------------------------------------------------------------
// Classifier

ClassifierTask build_classifier(const Dataset& dataset, int num_blocks) {
  dataset.validate();
  if (dataset.train.empty()) throw std::invalid_argument("classifier needs training instances");
  const std::size_t dim = dataset.dimension();
  if (dim < 4 || (dim & (dim - 1)) != 0) {
    throw std::invalid_argument("feature dimension must be a power of two >= 4");
  }
  ClassifierTask task;
  task.num_qubits = std::countr_zero(dim);
  task.num_blocks = num_blocks;
  task.circuit = build_sigma_block_ansatz(task.num_qubits, num_blocks);
  task.readout = PauliObservable({{1.0, PauliString::single(Pauli::Z, 0)}});
  for (const auto& s : dataset.train) {
    task.train_inputs.push_back(build_amplitude_encoder(s.features));
    task.train_targets.push_back(s.label);
  }
  for (const auto& s : dataset.validation) {
    task.validation_inputs.push_back(build_amplitude_encoder(s.features));
    task.validation_targets.push_back(s.label);
  }
  return task;
}

ParameterVector ClassifierTask::initial_theta(RngStream& rng) const {
  return uniform_angles(static_cast<std::size_t>(circuit.num_params()), rng);
}

MseEstimator ClassifierTask::estimator(const EstimatorConfig& config) const {
  return MseEstimator(circuit, readout, train_inputs, train_targets, config);
}

double evaluate_loss(const ClassifierTask& task, std::span<const double> theta,
                     const LossMode& mode, RngStream* rng, Split split) {
  const auto& inputs = split == Split::Train ? task.train_inputs : task.validation_inputs;
  const auto& targets = split == Split::Train ? task.train_targets : task.validation_targets;
  if (inputs.empty()) throw std::invalid_argument("loss over an empty split");
  double total = 0.0;
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    const StateVector state = evaluate(task.circuit, theta, inputs[j]);
    if (!mode.shots) {
      const double r = expectation(state, task.readout) - targets[j];
      total += r * r;
    } else {
      const std::size_t n = require_shots(mode);
      RngStream& r = require_rng(rng);
      const double a = sample_observable(state, task.readout, n, r) - targets[j];
      const double b = sample_observable(state, task.readout, n, r) - targets[j];
      total += a * b;
    }
  }
  return total / static_cast<double>(inputs.size());
}

std::vector<int> predict(const ClassifierTask& task, std::span<const double> theta, Split split) {
  const auto& inputs = split == Split::Train ? task.train_inputs : task.validation_inputs;
  std::vector<int> out;
  out.reserve(inputs.size());
  for (const auto& x : inputs) {
    out.push_back(expectation(evaluate(task.circuit, theta, x), task.readout) >= 0.0 ? 1 : -1);
  }
  return out;
}

double validation_accuracy(const ClassifierTask& task, std::span<const double> theta) {
  if (task.validation_inputs.empty()) throw std::invalid_argument("validation split is empty");
  const auto pred = predict(task, theta, Split::Validation);
  std::size_t correct = 0;
  for (std::size_t j = 0; j < pred.size(); ++j) {
    if (pred[j] == static_cast<int>(task.validation_targets[j])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

}  // namespace dsgd
