#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dsgd/pauli.hpp"
#include "dsgd/state_vector.hpp"

namespace dsgd {

using ParameterVector = std::vector<double>;

/// One step of a parameterized circuit. A rotation is either bound to a
/// parameter slot (`slot >= 0`) or carries a constant `angle`.
struct CircuitOp {
  Gate gate;
  int slot = -1;
  double angle = 0.0;

  bool is_bound() const noexcept { return slot >= 0; }
};

/// Ordered gate list with parameter bindings. Several rotations may share one
/// slot (QAOA layers); every slot in [0, num_params) must be bound to at least
/// one gate.
class ParamCircuit {
 public:
  explicit ParamCircuit(int num_qubits, int num_params = 0);

  void add_fixed(Gate gate);
  void add_rotation(Gate gate, int slot);
  void add_constant_rotation(Gate gate, double angle);

  int num_qubits() const noexcept { return num_qubits_; }
  int num_params() const noexcept { return num_params_; }
  const std::vector<CircuitOp>& ops() const noexcept { return ops_; }
  std::size_t size() const noexcept { return ops_.size(); }

  /// Indices into ops() of the gates bound to `slot`, in circuit order.
  const std::vector<std::size_t>& ops_bound_to(int slot) const;

  /// Throws std::logic_error if some slot has no gate.
  void validate() const;

 private:
  int num_qubits_;
  int num_params_;
  std::vector<CircuitOp> ops_;
  std::vector<std::vector<std::size_t>> bindings_;
};

/// Initial Y-block with every angle fixed at pi/4, then `num_blocks`
/// parameterized blocks cycling X, Y, Z. A block is one rotation per qubit
/// followed by CNOT(j, j+1) for even j, then for odd j. Slots are numbered
/// block-major, qubit-minor.
ParamCircuit build_sigma_block_ansatz(int num_qubits, int num_blocks);

/// Alternating layers exp(-i theta_{2l} H^P_j) and exp(-i theta_{2l+1} H^B_j),
/// one gate per term, every gate of a layer bound to that layer's slot. Each
/// term's coefficient becomes its gate's generator coefficient. Throws if the
/// terms of either Hamiltonian do not mutually commute or p < 1.
ParamCircuit build_qaoa_ansatz(const PauliObservable& problem, const PauliObservable& mixer,
                               int depth_p);

/// Direct injection of a unit-norm real vector as amplitudes.
StateVector build_amplitude_encoder(std::span<const double> x);

/// Runs the circuit on `initial`. Throws std::invalid_argument on a parameter
/// count or register size mismatch.
StateVector evaluate(const ParamCircuit& circuit, std::span<const double> theta,
                     const StateVector& initial);

/// Like evaluate() but with the angle of the single gate `op_index` offset by
/// `shift`.
StateVector evaluate_shifted(const ParamCircuit& circuit, std::span<const double> theta,
                             const StateVector& initial, std::size_t op_index, double shift);

/// Forward pass that keeps the state before every gate, so that single-gate
/// shifted evaluations only replay the suffix after the shifted gate.
class PrefixCache {
 public:
  /// Caches at most `max_bytes` of intermediate states; beyond that, shifted
  /// evaluations replay from the last cached checkpoint.
  PrefixCache(const ParamCircuit& circuit, std::span<const double> theta,
              const StateVector& initial, std::size_t max_bytes = std::size_t{64} << 20);

  const StateVector& final_state() const noexcept { return final_; }
  StateVector shifted(std::size_t op_index, double shift) const;

 private:
  void replay(StateVector& state, std::size_t k) const;

  const ParamCircuit* circuit_;
  std::vector<double> theta_;
  std::vector<std::pair<double, double>> trig_;  // cos, sin of each rotation angle
  std::size_t stride_;
  std::vector<StateVector> checkpoints_;  // state before op k * stride_
  StateVector final_;
};

/// Effective angle of op `k` at parameters `theta` (nullopt for fixed gates).
std::optional<double> op_angle(const CircuitOp& op, std::span<const double> theta);

/// Plain-text circuit listing, one gate per line: `GATE targets [slot=i|angle=a]`.
std::string dump_circuit(const ParamCircuit& circuit);

}  // namespace dsgd
