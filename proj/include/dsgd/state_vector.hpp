#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dsgd/pauli.hpp"
#include "dsgd/rng.hpp"

namespace dsgd {

using Complex = std::complex<double>;

/// Upper limit on simulated register size (16M amplitudes, 256 MiB).
inline constexpr int kMaxQubits = 24;

/// Dense statevector. Amplitude index bit q is the state of qubit q, so qubit 0
/// is the least-significant bit.
class StateVector {
 public:
  /// |0...0> on `num_qubits` qubits.
  explicit StateVector(int num_qubits);

  static StateVector basis_state(int num_qubits, std::uint64_t index);
  /// Takes the amplitudes as given; length must be a power of two. No
  /// normalization check is made here.
  static StateVector from_amplitudes(std::vector<Complex> amplitudes);

  int num_qubits() const noexcept { return num_qubits_; }
  std::size_t dimension() const noexcept { return amps_.size(); }
  std::span<const Complex> amplitudes() const noexcept { return amps_; }
  std::span<Complex> amplitudes() noexcept { return amps_; }
  const Complex& operator[](std::size_t i) const { return amps_[i]; }
  Complex& operator[](std::size_t i) { return amps_[i]; }

  double norm_squared() const noexcept;

 private:
  StateVector(int num_qubits, std::vector<Complex> amps)
      : num_qubits_(num_qubits), amps_(std::move(amps)) {}

  int num_qubits_;
  std::vector<Complex> amps_;
};

/// A fixed unitary or a Pauli rotation exp(-i * theta * c * P).
///
/// For a rotation the generator c*P has eigenvalues +-r with r = |c|. The
/// named single-qubit rotations use c = 1/2, i.e.
/// R_sigma(theta) = exp(-i theta sigma / 2).
class Gate {
 public:
  enum class Kind { Fixed, Rotation };

  /// Dense unitary on `targets` (row-major, 2^k x 2^k, targets[0] is the
  /// least-significant bit of the matrix index). Throws unless unitary within 1e-10.
  static Gate fixed(std::string name, std::vector<int> targets, std::vector<Complex> matrix);
  static Gate hadamard(int qubit);
  static Gate pauli_x(int qubit);
  static Gate pauli_y(int qubit);
  static Gate pauli_z(int qubit);
  static Gate s_gate(int qubit);
  static Gate s_dagger(int qubit);
  static Gate cnot(int control, int target);

  /// exp(-i theta c P). Throws if c is zero or not finite, or P is the identity.
  static Gate rotation(PauliString generator, double coefficient, std::string name = {});
  static Gate rx(int qubit);
  static Gate ry(int qubit);
  static Gate rz(int qubit);
  static Gate rotation_about(Pauli axis, int qubit);
  /// exp(-i theta Z_a Z_b), r = 1.
  static Gate zz(int a, int b);

  Kind kind() const noexcept { return kind_; }
  bool is_rotation() const noexcept { return kind_ == Kind::Rotation; }
  const std::string& name() const noexcept { return name_; }
  const std::vector<int>& targets() const noexcept { return targets_; }
  const PauliString& generator() const noexcept { return generator_; }
  /// Signed generator coefficient c.
  double coefficient() const noexcept { return coefficient_; }
  /// Eigenvalue radius r = |c| of the generator.
  double radius() const noexcept { return coefficient_ < 0 ? -coefficient_ : coefficient_; }
  std::span<const Complex> matrix() const noexcept { return matrix_; }
  bool is_cnot() const noexcept { return cnot_; }
  int max_qubit() const noexcept;

  /// Inverse of a fixed gate. Rotations are inverted by negating the angle.
  Gate adjoint() const;

 private:
  Gate() = default;

  Kind kind_ = Kind::Fixed;
  std::string name_;
  std::vector<int> targets_;
  std::vector<Complex> matrix_;
  PauliString generator_;
  double coefficient_ = 0.0;
  bool cnot_ = false;
};

/// Applies `gate` in place. `theta` must be given exactly when the gate is a
/// rotation. Throws std::out_of_range for targets outside the register and
/// std::invalid_argument for a missing or superfluous angle.
void apply_gate(StateVector& state, const Gate& gate, std::optional<double> theta = std::nullopt);

/// In-place exp(-i phi P).
void apply_pauli_rotation(StateVector& state, const PauliString& pauli, double phi);
/// Same, with cos(phi) and sin(phi) supplied by the caller.
void apply_pauli_rotation(StateVector& state, const PauliString& pauli, double cos_phi, double sin_phi);

/// <psi|P|psi> for a single Pauli string.
double pauli_expectation(const StateVector& state, const PauliString& pauli);

/// <psi|O|psi>. Throws std::out_of_range if O acts beyond the register.
double expectation(const StateVector& state, const PauliObservable& obs);

/// Mean of n eigenvalue samples of `pauli`. Throws for n == 0.
double sample_term(const StateVector& state, const PauliString& pauli, std::size_t shots,
                   RngStream& rng);

/// n-shot estimate of each term's Pauli expectation (uncoefficiented), all
/// terms read off the same n simulated bitstrings. Terms must be qubit-wise
/// commuting.
std::vector<double> sample_group(const StateVector& state, std::span<const PauliString> paulis,
                                 std::size_t shots, RngStream& rng);

/// Sum_j c_j * (n-shot mean of term j). Without grouping every term gets its
/// own n measurement contexts; with grouping the terms of one group share them.
double sample_observable(const StateVector& state, const PauliObservable& obs, std::size_t shots,
                         RngStream& rng, const TermGroups* grouping = nullptr);

}  // namespace dsgd
