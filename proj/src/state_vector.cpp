#include "dsgd/state_vector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace dsgd {

namespace {

constexpr double kUnitaryTolerance = 1e-10;
const Complex kI{0.0, 1.0};

void check_register_size(int num_qubits) {
  if (num_qubits < 1 || num_qubits > kMaxQubits) {
    throw std::invalid_argument("register size " + std::to_string(num_qubits) +
                                " outside [1, " + std::to_string(kMaxQubits) + "]");
  }
}

void check_targets(const StateVector& state, const std::vector<int>& targets) {
  for (int t : targets) {
    if (t < 0 || t >= state.num_qubits()) {
      throw std::out_of_range("gate target " + std::to_string(t) + " outside register of " +
                              std::to_string(state.num_qubits()) + " qubits");
    }
  }
}

void check_pauli(const StateVector& state, const PauliString& pauli) {
  if (pauli.max_qubit() >= state.num_qubits()) {
    throw std::out_of_range("Pauli string " + pauli.str() + " acts outside register of " +
                            std::to_string(state.num_qubits()) + " qubits");
  }
}

// i^k for k = 0..3
Complex i_power(int k) {
  switch (k & 3) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

double parity_sign(std::uint64_t bits) { return (std::popcount(bits) & 1) ? -1.0 : 1.0; }

void apply_dense(StateVector& state, const std::vector<int>& targets,
                 std::span<const Complex> matrix) {
  const std::size_t k = targets.size();
  const std::size_t block = std::size_t{1} << k;
  std::vector<std::size_t> offsets(block, 0);
  std::uint64_t target_mask = 0;
  for (std::size_t local = 0; local < block; ++local) {
    std::size_t off = 0;
    for (std::size_t b = 0; b < k; ++b) {
      if ((local >> b) & 1U) off |= std::size_t{1} << targets[b];
    }
    offsets[local] = off;
  }
  for (int t : targets) target_mask |= std::uint64_t{1} << t;

  auto amps = state.amplitudes();
  std::vector<Complex> in(block);
  for (std::size_t base = 0; base < amps.size(); ++base) {
    if (base & target_mask) continue;
    for (std::size_t r = 0; r < block; ++r) in[r] = amps[base + offsets[r]];
    for (std::size_t r = 0; r < block; ++r) {
      Complex acc{0.0, 0.0};
      for (std::size_t c = 0; c < block; ++c) acc += matrix[r * block + c] * in[c];
      amps[base + offsets[r]] = acc;
    }
  }
}

void apply_cnot(StateVector& state, int control, int target) {
  const std::size_t cbit = std::size_t{1} << control;
  const std::size_t tbit = std::size_t{1} << target;
  auto amps = state.amplitudes();
  for (std::size_t x = 0; x < amps.size(); ++x) {
    if ((x & cbit) && !(x & tbit)) std::swap(amps[x], amps[x | tbit]);
  }
}

std::vector<Complex> matrix_2x2(Complex a, Complex b, Complex c, Complex d) { return {a, b, c, d}; }

}  // namespace

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(int num_qubits) : num_qubits_(num_qubits) {
  check_register_size(num_qubits);
  amps_.assign(std::size_t{1} << num_qubits, Complex{0.0, 0.0});
  amps_[0] = 1.0;
}

StateVector StateVector::basis_state(int num_qubits, std::uint64_t index) {
  StateVector s(num_qubits);
  if (index >= s.dimension()) throw std::out_of_range("basis index outside register");
  s.amps_[0] = 0.0;
  s.amps_[index] = 1.0;
  return s;
}

StateVector StateVector::from_amplitudes(std::vector<Complex> amplitudes) {
  const std::size_t dim = amplitudes.size();
  if (dim < 2 || !std::has_single_bit(dim)) {
    throw std::invalid_argument("amplitude count " + std::to_string(dim) +
                                " is not a power of two >= 2");
  }
  const int n = std::countr_zero(dim);
  check_register_size(n);
  return StateVector(n, std::move(amplitudes));
}

double StateVector::norm_squared() const noexcept {
  double total = 0.0;
  for (const auto& a : amps_) total += std::norm(a);
  return total;
}

// ---------------------------------------------------------------------------
// Gate

Gate Gate::fixed(std::string name, std::vector<int> targets, std::vector<Complex> matrix) {
  if (targets.empty()) throw std::invalid_argument("fixed gate needs at least one target");
  for (std::size_t a = 0; a < targets.size(); ++a) {
    if (targets[a] < 0) throw std::out_of_range("negative gate target");
    for (std::size_t b = a + 1; b < targets.size(); ++b) {
      if (targets[a] == targets[b]) throw std::invalid_argument("repeated gate target");
    }
  }
  const std::size_t dim = std::size_t{1} << targets.size();
  if (matrix.size() != dim * dim) {
    throw std::invalid_argument("gate matrix size does not match target count");
  }
  // U U^dagger == I
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      Complex acc{0.0, 0.0};
      for (std::size_t k = 0; k < dim; ++k) acc += matrix[r * dim + k] * std::conj(matrix[c * dim + k]);
      const Complex expected = r == c ? Complex{1.0, 0.0} : Complex{0.0, 0.0};
      if (std::abs(acc - expected) > kUnitaryTolerance) {
        throw std::invalid_argument("gate '" + name + "' is not unitary");
      }
    }
  }
  Gate g;
  g.kind_ = Kind::Fixed;
  g.name_ = std::move(name);
  g.targets_ = std::move(targets);
  g.matrix_ = std::move(matrix);
  return g;
}

Gate Gate::hadamard(int qubit) {
  const double h = std::numbers::sqrt2 / 2.0;
  return fixed("H", {qubit}, matrix_2x2(h, h, h, -h));
}

Gate Gate::pauli_x(int qubit) { return fixed("X", {qubit}, matrix_2x2(0.0, 1.0, 1.0, 0.0)); }
Gate Gate::pauli_y(int qubit) { return fixed("Y", {qubit}, matrix_2x2(0.0, -kI, kI, 0.0)); }
Gate Gate::pauli_z(int qubit) { return fixed("Z", {qubit}, matrix_2x2(1.0, 0.0, 0.0, -1.0)); }
Gate Gate::s_gate(int qubit) { return fixed("S", {qubit}, matrix_2x2(1.0, 0.0, 0.0, kI)); }
Gate Gate::s_dagger(int qubit) { return fixed("SDG", {qubit}, matrix_2x2(1.0, 0.0, 0.0, -kI)); }

Gate Gate::cnot(int control, int target) {
  // matrix index bit 0 = control, bit 1 = target
  std::vector<Complex> m(16, 0.0);
  m[0 * 4 + 0] = 1.0;
  m[1 * 4 + 3] = 1.0;
  m[2 * 4 + 2] = 1.0;
  m[3 * 4 + 1] = 1.0;
  Gate g = fixed("CNOT", {control, target}, std::move(m));
  g.cnot_ = true;
  return g;
}

Gate Gate::rotation(PauliString generator, double coefficient, std::string name) {
  if (coefficient == 0.0 || !std::isfinite(coefficient)) {
    throw std::invalid_argument("rotation coefficient must be finite and nonzero");
  }
  if (generator.is_identity()) {
    throw std::invalid_argument("rotation generator must be a non-identity Pauli string");
  }
  Gate g;
  g.kind_ = Kind::Rotation;
  g.name_ = name.empty() ? "ROT" : std::move(name);
  for (int q = 0; q <= generator.max_qubit(); ++q) {
    if (generator.at(q) != Pauli::I) g.targets_.push_back(q);
  }
  g.generator_ = generator;
  g.coefficient_ = coefficient;
  return g;
}

Gate Gate::rotation_about(Pauli axis, int qubit) {
  switch (axis) {
    case Pauli::X: return rotation(PauliString::single(Pauli::X, qubit), 0.5, "RX");
    case Pauli::Y: return rotation(PauliString::single(Pauli::Y, qubit), 0.5, "RY");
    case Pauli::Z: return rotation(PauliString::single(Pauli::Z, qubit), 0.5, "RZ");
    default: throw std::invalid_argument("rotation axis must be X, Y or Z");
  }
}

Gate Gate::rx(int qubit) { return rotation_about(Pauli::X, qubit); }
Gate Gate::ry(int qubit) { return rotation_about(Pauli::Y, qubit); }
Gate Gate::rz(int qubit) { return rotation_about(Pauli::Z, qubit); }

Gate Gate::zz(int a, int b) {
  if (a == b) throw std::invalid_argument("ZZ rotation needs two distinct qubits");
  return rotation(PauliString::from_map({{a, Pauli::Z}, {b, Pauli::Z}}), 1.0, "ZZ");
}

int Gate::max_qubit() const noexcept {
  int q = -1;
  for (int t : targets_) q = std::max(q, t);
  return q;
}

Gate Gate::adjoint() const {
  if (is_rotation()) {
    throw std::logic_error("rotation gates are inverted by negating the angle");
  }
  const std::size_t dim = std::size_t{1} << targets_.size();
  std::vector<Complex> m(dim * dim);
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) m[c * dim + r] = std::conj(matrix_[r * dim + c]);
  }
  Gate g = fixed(name_ + "^dag", targets_, std::move(m));
  g.cnot_ = cnot_;
  return g;
}

// ---------------------------------------------------------------------------
// Kernels

void apply_pauli_rotation(StateVector& state, const PauliString& pauli, double phi) {
  apply_pauli_rotation(state, pauli, std::cos(phi), std::sin(phi));
}

void apply_pauli_rotation(StateVector& state, const PauliString& pauli, double c, double s) {
  check_pauli(state, pauli);
  const std::uint64_t xm = pauli.x_mask();
  const std::uint64_t zm = pauli.z_mask();
  auto amps = state.amplitudes();

  if (xm == 0) {
    // Index 0: sign +1, e^{-i phi}; index 1: sign -1, e^{+i phi}.
    const Complex phase[2] = {{c, -s}, {c, s}};
    for (std::size_t x = 0; x < amps.size(); ++x) {
      amps[x] *= phase[std::popcount(x & zm) & 1];
    }
    return;
  }

  // -i * s * i^{ny}
  const Complex mix = Complex{0.0, -s} * i_power(pauli.num_y());
  const std::uint64_t pivot = xm & (~xm + 1);
  for (std::size_t x = 0; x < amps.size(); ++x) {
    if (x & pivot) continue;
    const std::size_t y = x ^ xm;
    const Complex ax = amps[x];
    const Complex ay = amps[y];
    // (P psi)[y] = i^ny (-1)^{|x & z|} psi[x], and symmetrically for x.
    amps[x] = c * ax + mix * parity_sign(y & zm) * ay;
    amps[y] = c * ay + mix * parity_sign(x & zm) * ax;
  }
}

void apply_gate(StateVector& state, const Gate& gate, std::optional<double> theta) {
  check_targets(state, gate.targets());
  if (gate.is_rotation()) {
    if (!theta) throw std::invalid_argument("rotation gate '" + gate.name() + "' needs an angle");
    apply_pauli_rotation(state, gate.generator(), *theta * gate.coefficient());
    return;
  }
  if (theta) throw std::invalid_argument("fixed gate '" + gate.name() + "' takes no angle");
  if (gate.is_cnot()) {
    apply_cnot(state, gate.targets()[0], gate.targets()[1]);
  } else {
    apply_dense(state, gate.targets(), gate.matrix());
  }
}

double pauli_expectation(const StateVector& state, const PauliString& pauli) {
  check_pauli(state, pauli);
  const auto amps = state.amplitudes();
  const std::uint64_t xm = pauli.x_mask();
  const std::uint64_t zm = pauli.z_mask();
  if (xm == 0) {
    double total = 0.0;
    for (std::size_t x = 0; x < amps.size(); ++x) {
      total += parity_sign(x & zm) * std::norm(amps[x]);
    }
    return total;
  }
  Complex total{0.0, 0.0};
  for (std::size_t x = 0; x < amps.size(); ++x) {
    const std::size_t y = x ^ xm;
    total += std::conj(amps[x]) * parity_sign(y & zm) * amps[y];
  }
  return (total * i_power(pauli.num_y())).real();
}

double expectation(const StateVector& state, const PauliObservable& obs) {
  double total = 0.0;
  for (const auto& term : obs.terms()) {
    total += term.coefficient * pauli_expectation(state, term.pauli);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Sampling

double sample_term(const StateVector& state, const PauliString& pauli, std::size_t shots,
                   RngStream& rng) {
  if (shots == 0) throw std::invalid_argument("shot count must be at least 1");
  check_pauli(state, pauli);
  if (pauli.is_identity()) return 1.0;
  // Measuring P in its eigenbasis yields +1 with probability (1 + <P>) / 2;
  // the count of +1 outcomes over n shots is binomial.
  const double p_plus = std::clamp(0.5 * (1.0 + pauli_expectation(state, pauli)), 0.0, 1.0);
  std::binomial_distribution<std::int64_t> outcomes(static_cast<std::int64_t>(shots), p_plus);
  const auto plus = outcomes(rng);
  const auto n = static_cast<double>(shots);
  return (2.0 * static_cast<double>(plus) - n) / n;
}

std::vector<double> sample_group(const StateVector& state, std::span<const PauliString> paulis,
                                 std::size_t shots, RngStream& rng) {
  if (shots == 0) throw std::invalid_argument("shot count must be at least 1");
  PauliString basis;
  for (const auto& p : paulis) {
    check_pauli(state, p);
    if (!basis.qubitwise_commutes(p)) {
      throw std::invalid_argument("group terms are not qubit-wise commuting");
    }
    basis = PauliString::from_masks(basis.x_mask() | p.x_mask(), basis.z_mask() | p.z_mask());
  }

  // Rotate into the joint eigenbasis: X -> Z via H, Y -> Z via H S^dagger.
  StateVector rotated = state;
  for (int q = 0; q <= basis.max_qubit(); ++q) {
    switch (basis.at(q)) {
      case Pauli::X: apply_gate(rotated, Gate::hadamard(q)); break;
      case Pauli::Y:
        apply_gate(rotated, Gate::s_dagger(q));
        apply_gate(rotated, Gate::hadamard(q));
        break;
      default: break;
    }
  }

  const auto amps = rotated.amplitudes();
  std::vector<double> cumulative(amps.size());
  double running = 0.0;
  for (std::size_t x = 0; x < amps.size(); ++x) {
    running += std::norm(amps[x]);
    cumulative[x] = running;
  }

  std::vector<double> sums(paulis.size(), 0.0);
  for (std::size_t shot = 0; shot < shots; ++shot) {
    const double u = rng.uniform() * running;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    const auto outcome = static_cast<std::uint64_t>(it - cumulative.begin());
    for (std::size_t j = 0; j < paulis.size(); ++j) {
      sums[j] += parity_sign(outcome & paulis[j].support());
    }
  }
  for (auto& s : sums) s /= static_cast<double>(shots);
  return sums;
}

double sample_observable(const StateVector& state, const PauliObservable& obs, std::size_t shots,
                         RngStream& rng, const TermGroups* grouping) {
  if (shots == 0) throw std::invalid_argument("shot count must be at least 1");
  double total = 0.0;
  if (grouping == nullptr) {
    for (const auto& term : obs.terms()) {
      total += term.coefficient * sample_term(state, term.pauli, shots, rng);
    }
    return total;
  }
  validate_grouping(obs, *grouping);
  std::vector<PauliString> paulis;
  for (const auto& group : *grouping) {
    paulis.clear();
    for (std::size_t j : group) paulis.push_back(obs[j].pauli);
    const auto means = sample_group(state, paulis, shots, rng);
    for (std::size_t g = 0; g < group.size(); ++g) total += obs[group[g]].coefficient * means[g];
  }
  return total;
}

}  // namespace dsgd
