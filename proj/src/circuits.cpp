#include "dsgd/circuits.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace dsgd {

namespace {

constexpr double kEncoderNormTolerance = 1e-8;

void check_gate_fits(const ParamCircuit& circuit, const Gate& gate) {
  if (gate.max_qubit() >= circuit.num_qubits()) {
    throw std::out_of_range("gate '" + gate.name() + "' targets qubit " +
                            std::to_string(gate.max_qubit()) + " outside a " +
                            std::to_string(circuit.num_qubits()) + "-qubit circuit");
  }
}

void check_inputs(const ParamCircuit& circuit, std::span<const double> theta,
                  const StateVector& initial) {
  if (theta.size() != static_cast<std::size_t>(circuit.num_params())) {
    throw std::invalid_argument("parameter vector has " + std::to_string(theta.size()) +
                                " entries, circuit expects " +
                                std::to_string(circuit.num_params()));
  }
  if (initial.num_qubits() != circuit.num_qubits()) {
    throw std::invalid_argument("initial state has " + std::to_string(initial.num_qubits()) +
                                " qubits, circuit expects " +
                                std::to_string(circuit.num_qubits()));
  }
}

void apply_op(StateVector& state, const CircuitOp& op, std::span<const double> theta,
              double shift = 0.0) {
  if (op.gate.is_rotation()) {
    apply_gate(state, op.gate, *op_angle(op, theta) + shift);
  } else {
    apply_gate(state, op.gate);
  }
}

}  // namespace

ParamCircuit::ParamCircuit(int num_qubits, int num_params)
    : num_qubits_(num_qubits), num_params_(num_params), bindings_(static_cast<std::size_t>(num_params)) {
  if (num_qubits < 1 || num_qubits > kMaxQubits) {
    throw std::invalid_argument("circuit register size out of range");
  }
  if (num_params < 0) throw std::invalid_argument("negative parameter count");
}

void ParamCircuit::add_fixed(Gate gate) {
  if (gate.is_rotation()) {
    throw std::invalid_argument("rotation gates need a slot or a constant angle");
  }
  check_gate_fits(*this, gate);
  ops_.push_back({std::move(gate), -1, 0.0});
}

void ParamCircuit::add_rotation(Gate gate, int slot) {
  if (!gate.is_rotation()) throw std::invalid_argument("only rotations bind to parameter slots");
  if (slot < 0 || slot >= num_params_) {
    throw std::out_of_range("parameter slot " + std::to_string(slot) + " outside [0, " +
                            std::to_string(num_params_) + ")");
  }
  check_gate_fits(*this, gate);
  bindings_[static_cast<std::size_t>(slot)].push_back(ops_.size());
  ops_.push_back({std::move(gate), slot, 0.0});
}

void ParamCircuit::add_constant_rotation(Gate gate, double angle) {
  if (!gate.is_rotation()) throw std::invalid_argument("constant angle given for a fixed gate");
  check_gate_fits(*this, gate);
  ops_.push_back({std::move(gate), -1, angle});
}

const std::vector<std::size_t>& ParamCircuit::ops_bound_to(int slot) const {
  if (slot < 0 || slot >= num_params_) {
    throw std::out_of_range("parameter slot " + std::to_string(slot) + " out of range");
  }
  return bindings_[static_cast<std::size_t>(slot)];
}

void ParamCircuit::validate() const {
  for (int slot = 0; slot < num_params_; ++slot) {
    if (bindings_[static_cast<std::size_t>(slot)].empty()) {
      throw std::logic_error("parameter slot " + std::to_string(slot) + " is not bound to any gate");
    }
  }
}

std::optional<double> op_angle(const CircuitOp& op, std::span<const double> theta) {
  if (!op.gate.is_rotation()) return std::nullopt;
  if (op.is_bound()) return theta[static_cast<std::size_t>(op.slot)];
  return op.angle;
}

// ---------------------------------------------------------------------------
// Builders

ParamCircuit build_sigma_block_ansatz(int num_qubits, int num_blocks) {
  if (num_qubits < 2) throw std::invalid_argument("sigma-block ansatz needs at least 2 qubits");
  if (num_blocks < 1) throw std::invalid_argument("sigma-block ansatz needs at least 1 block");

  ParamCircuit circuit(num_qubits, num_qubits * num_blocks);
  auto cnot_ladders = [&] {
    for (int parity = 0; parity < 2; ++parity) {
      for (int j = parity; j + 1 < num_qubits; j += 2) circuit.add_fixed(Gate::cnot(j, j + 1));
    }
  };

  for (int q = 0; q < num_qubits; ++q) {
    circuit.add_constant_rotation(Gate::ry(q), std::numbers::pi / 4.0);
  }
  cnot_ladders();

  constexpr Pauli kCycle[] = {Pauli::X, Pauli::Y, Pauli::Z};
  for (int block = 0; block < num_blocks; ++block) {
    const Pauli axis = kCycle[block % 3];
    for (int q = 0; q < num_qubits; ++q) {
      circuit.add_rotation(Gate::rotation_about(axis, q), block * num_qubits + q);
    }
    cnot_ladders();
  }
  circuit.validate();
  return circuit;
}

ParamCircuit build_qaoa_ansatz(const PauliObservable& problem, const PauliObservable& mixer,
                               int depth_p) {
  if (depth_p < 1) throw std::invalid_argument("QAOA depth must be at least 1");
  if (problem.empty() || mixer.empty()) {
    throw std::invalid_argument("QAOA needs nonempty problem and mixer Hamiltonians");
  }
  if (!problem.all_terms_commute()) {
    throw std::invalid_argument("problem Hamiltonian terms do not mutually commute");
  }
  if (!mixer.all_terms_commute()) {
    throw std::invalid_argument("mixer Hamiltonian terms do not mutually commute");
  }
  const int num_qubits = std::max(problem.max_qubit(), mixer.max_qubit()) + 1;
  ParamCircuit circuit(num_qubits, 2 * depth_p);
  auto add_layer = [&](const PauliObservable& h, int slot, const char* name) {
    for (const auto& term : h.terms()) {
      if (term.pauli.is_identity()) continue;  // global phase only
      circuit.add_rotation(Gate::rotation(term.pauli, term.coefficient, name), slot);
    }
  };
  for (int layer = 0; layer < depth_p; ++layer) {
    add_layer(problem, 2 * layer, problem.is_diagonal() ? "ZZ" : "HP");
    add_layer(mixer, 2 * layer + 1, "HB");
  }
  circuit.validate();
  return circuit;
}

StateVector build_amplitude_encoder(std::span<const double> x) {
  const std::size_t dim = x.size();
  if (dim < 2 || (dim & (dim - 1)) != 0) {
    throw std::invalid_argument("encoder input dimension " + std::to_string(dim) +
                                " is not a power of two >= 2");
  }
  double norm2 = 0.0;
  for (double v : x) norm2 += v * v;
  if (std::abs(std::sqrt(norm2) - 1.0) > kEncoderNormTolerance) {
    throw std::invalid_argument("encoder input is not unit norm (norm " +
                                std::to_string(std::sqrt(norm2)) + ")");
  }
  std::vector<Complex> amps(x.begin(), x.end());
  return StateVector::from_amplitudes(std::move(amps));
}

// ---------------------------------------------------------------------------
// Evaluation

StateVector evaluate(const ParamCircuit& circuit, std::span<const double> theta,
                     const StateVector& initial) {
  check_inputs(circuit, theta, initial);
  StateVector state = initial;
  for (const auto& op : circuit.ops()) apply_op(state, op, theta);
  return state;
}

StateVector evaluate_shifted(const ParamCircuit& circuit, std::span<const double> theta,
                             const StateVector& initial, std::size_t op_index, double shift) {
  check_inputs(circuit, theta, initial);
  if (op_index >= circuit.size()) throw std::out_of_range("shifted op index out of range");
  if (!circuit.ops()[op_index].gate.is_rotation()) {
    throw std::invalid_argument("only rotation gates can be shifted");
  }
  StateVector state = initial;
  const auto& ops = circuit.ops();
  for (std::size_t k = 0; k < ops.size(); ++k) apply_op(state, ops[k], theta, k == op_index ? shift : 0.0);
  return state;
}

PrefixCache::PrefixCache(const ParamCircuit& circuit, std::span<const double> theta,
                         const StateVector& initial, std::size_t max_bytes)
    : circuit_(&circuit), theta_(theta.begin(), theta.end()), stride_(1), final_(initial) {
  check_inputs(circuit, theta, initial);
  const std::size_t state_bytes = initial.dimension() * sizeof(Complex);
  const std::size_t budget = std::max<std::size_t>(1, max_bytes / std::max<std::size_t>(1, state_bytes));
  const std::size_t n = circuit.size();
  while (n / stride_ + 1 > budget) ++stride_;

  checkpoints_.reserve(n / stride_ + 1);
  trig_.resize(n);
  const auto& ops = circuit.ops();
  for (std::size_t k = 0; k < n; ++k) {
    if (k % stride_ == 0) checkpoints_.push_back(final_);
    if (ops[k].gate.is_rotation()) {
      const double phi = *op_angle(ops[k], theta_) * ops[k].gate.coefficient();
      trig_[k] = {std::cos(phi), std::sin(phi)};
    }
    replay(final_, k);
  }
}

void PrefixCache::replay(StateVector& state, std::size_t k) const {
  const CircuitOp& op = circuit_->ops()[k];
  if (op.gate.is_rotation()) {
    apply_pauli_rotation(state, op.gate.generator(), trig_[k].first, trig_[k].second);
  } else {
    apply_gate(state, op.gate);
  }
}

StateVector PrefixCache::shifted(std::size_t op_index, double shift) const {
  const auto& ops = circuit_->ops();
  if (op_index >= ops.size()) throw std::out_of_range("shifted op index out of range");
  if (!ops[op_index].gate.is_rotation()) throw std::invalid_argument("only rotation gates can be shifted");
  const std::size_t start = (op_index / stride_) * stride_;
  StateVector state = checkpoints_[op_index / stride_];
  for (std::size_t k = start; k < ops.size(); ++k) {
    if (k == op_index) {
      apply_op(state, ops[k], theta_, shift);
    } else {
      replay(state, k);
    }
  }
  return state;
}

std::string dump_circuit(const ParamCircuit& circuit) {
  std::ostringstream os;
  os.precision(17);
  os << "# qubits=" << circuit.num_qubits() << " params=" << circuit.num_params()
     << " gates=" << circuit.size() << '\n';
  for (const auto& op : circuit.ops()) {
    const Gate& g = op.gate;
    os << g.name();
    if (g.is_rotation() && g.name() != "RX" && g.name() != "RY" && g.name() != "RZ") {
      os << '[' << g.coefficient() << '*' << g.generator().str() << ']';
    }
    for (int t : g.targets()) os << ' ' << t;
    if (g.is_rotation()) {
      if (op.is_bound()) {
        os << " slot=" << op.slot;
      } else {
        os << " angle=" << op.angle;
      }
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace dsgd
