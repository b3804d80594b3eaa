#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dsgd/circuits.hpp"
#include "dsgd/pauli.hpp"
#include "dsgd/state_vector.hpp"

namespace dsgd {

/// One term of a parameter-shift rule: gamma * <O> evaluated with the angle
/// of gate `op_index` moved by `shift`.
struct ShiftTerm {
  double gamma = 0.0;
  double shift = 0.0;
  std::size_t op_index = 0;
};

/// Per-slot parameter-shift rules.
///
/// A gate exp(-i theta c P) has generator eigenvalues +-r (r = |c|) and the
/// two-term rule (+r, +pi/(4r)), (-r, -pi/(4r)). A slot bound to M gates gets
/// the concatenation of M such rules, each shifting only its own gate.
class ShiftRule {
 public:
  ShiftRule() = default;
  explicit ShiftRule(std::vector<std::vector<ShiftTerm>> per_slot) : slots_(std::move(per_slot)) {}

  std::size_t num_slots() const noexcept { return slots_.size(); }
  const std::vector<ShiftTerm>& terms(std::size_t slot) const { return slots_.at(slot); }
  /// K_i, the number of terms for slot i.
  std::size_t num_terms(std::size_t slot) const { return slots_.at(slot).size(); }
  std::size_t total_terms() const noexcept;
  bool empty() const noexcept { return slots_.empty(); }

 private:
  std::vector<std::vector<ShiftTerm>> slots_;
};

/// Builds the rule for every slot of `circuit`. Fixed gates and constant-angle
/// rotations contribute nothing.
ShiftRule derive_shift_rule(const ParamCircuit& circuit);

/// d<O>/d theta_slot via the shift rule and exact expectations.
double exact_partial(const ParamCircuit& circuit, const PauliObservable& obs,
                     std::span<const double> theta, std::size_t slot,
                     const StateVector& initial);
double exact_partial(const ParamCircuit& circuit, const PauliObservable& obs,
                     std::span<const double> theta, std::size_t slot);

std::vector<double> exact_gradient(const ParamCircuit& circuit, const PauliObservable& obs,
                                   std::span<const double> theta, const StateVector& initial);
std::vector<double> exact_gradient(const ParamCircuit& circuit, const PauliObservable& obs,
                                   std::span<const double> theta);

/// Exact gradient of (1/|S|) sum_{j in S} (<O>_{theta, x_j} - y_j)^2 over the
/// given encoded inputs.
std::vector<double> exact_mse_gradient(const ParamCircuit& circuit, const PauliObservable& obs,
                                       std::span<const double> theta,
                                       std::span<const StateVector> inputs,
                                       std::span<const double> targets);

/// Upper bound on the Lipschitz constant of theta -> <O>_theta:
/// L = 2 sqrt(d) ||O|| max_i ||G_i||, with norms bounded by sum |coeff| and G_i
/// the combined generator of everything bound to slot i (sum of bound gates'
/// radii). `per_slot[i] = 2 ||O|| ||G_i||` bounds |d<O>/d theta_i|.
struct LipschitzBound {
  double value = 0.0;
  std::vector<double> per_slot;
};

LipschitzBound lipschitz_bound(const ParamCircuit& circuit, const PauliObservable& obs);

}  // namespace dsgd
