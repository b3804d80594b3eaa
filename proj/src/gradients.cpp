#include "dsgd/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dsgd {

std::size_t ShiftRule::total_terms() const noexcept {
  std::size_t total = 0;
  for (const auto& s : slots_) total += s.size();
  return total;
}

ShiftRule derive_shift_rule(const ParamCircuit& circuit) {
  std::vector<std::vector<ShiftTerm>> slots(static_cast<std::size_t>(circuit.num_params()));
  for (int slot = 0; slot < circuit.num_params(); ++slot) {
    auto& terms = slots[static_cast<std::size_t>(slot)];
    for (std::size_t op_index : circuit.ops_bound_to(slot)) {
      const Gate& gate = circuit.ops()[op_index].gate;
      // Rotations are Pauli-generated, so the spectrum is exactly {+r, -r}.
      const double r = gate.radius();
      if (!(r > 0.0)) throw std::invalid_argument("generator without a +-r spectrum");
      const double shift = std::numbers::pi / (4.0 * r);
      terms.push_back({r, shift, op_index});
      terms.push_back({-r, -shift, op_index});
    }
  }
  return ShiftRule(std::move(slots));
}

namespace {

double partial_from_cache(const PrefixCache& cache, const ShiftRule& rule,
                          const PauliObservable& obs, std::size_t slot) {
  double total = 0.0;
  for (const auto& term : rule.terms(slot)) {
    total += term.gamma * expectation(cache.shifted(term.op_index, term.shift), obs);
  }
  return total;
}

}  // namespace

double exact_partial(const ParamCircuit& circuit, const PauliObservable& obs,
                     std::span<const double> theta, std::size_t slot,
                     const StateVector& initial) {
  if (slot >= static_cast<std::size_t>(circuit.num_params())) {
    throw std::out_of_range("slot " + std::to_string(slot) + " out of range");
  }
  const ShiftRule rule = derive_shift_rule(circuit);
  const PrefixCache cache(circuit, theta, initial);
  return partial_from_cache(cache, rule, obs, slot);
}

double exact_partial(const ParamCircuit& circuit, const PauliObservable& obs,
                     std::span<const double> theta, std::size_t slot) {
  return exact_partial(circuit, obs, theta, slot, StateVector(circuit.num_qubits()));
}

std::vector<double> exact_gradient(const ParamCircuit& circuit, const PauliObservable& obs,
                                   std::span<const double> theta, const StateVector& initial) {
  const ShiftRule rule = derive_shift_rule(circuit);
  const PrefixCache cache(circuit, theta, initial);
  std::vector<double> grad(rule.num_slots());
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = partial_from_cache(cache, rule, obs, i);
  return grad;
}

std::vector<double> exact_gradient(const ParamCircuit& circuit, const PauliObservable& obs,
                                   std::span<const double> theta) {
  return exact_gradient(circuit, obs, theta, StateVector(circuit.num_qubits()));
}

std::vector<double> exact_mse_gradient(const ParamCircuit& circuit, const PauliObservable& obs,
                                       std::span<const double> theta,
                                       std::span<const StateVector> inputs,
                                       std::span<const double> targets) {
  if (inputs.size() != targets.size()) {
    throw std::invalid_argument("inputs and targets differ in length");
  }
  if (inputs.empty()) throw std::invalid_argument("MSE gradient over an empty set");
  const ShiftRule rule = derive_shift_rule(circuit);
  std::vector<double> grad(rule.num_slots(), 0.0);
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    const PrefixCache cache(circuit, theta, inputs[j]);
    const double residual = expectation(cache.final_state(), obs) - targets[j];
    for (std::size_t i = 0; i < grad.size(); ++i) {
      grad[i] += 2.0 * residual * partial_from_cache(cache, rule, obs, i);
    }
  }
  for (auto& g : grad) g /= static_cast<double>(inputs.size());
  return grad;
}

LipschitzBound lipschitz_bound(const ParamCircuit& circuit, const PauliObservable& obs) {
  LipschitzBound bound;
  const double obs_norm = obs.norm_bound();
  double max_generator = 0.0;
  bound.per_slot.resize(static_cast<std::size_t>(circuit.num_params()));
  for (int slot = 0; slot < circuit.num_params(); ++slot) {
    double generator_norm = 0.0;
    for (std::size_t op_index : circuit.ops_bound_to(slot)) {
      generator_norm += circuit.ops()[op_index].gate.radius();
    }
    bound.per_slot[static_cast<std::size_t>(slot)] = 2.0 * obs_norm * generator_norm;
    max_generator = std::max(max_generator, generator_norm);
  }
  bound.value = 2.0 * std::sqrt(static_cast<double>(circuit.num_params())) * obs_norm * max_generator;
  return bound;
}

}  // namespace dsgd
