#include "dsgd/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dsgd {

namespace {

constexpr std::uint64_t kUnitTag = 1;
constexpr std::uint64_t kShiftTag = 2;
constexpr std::uint64_t kMeasureTag = 3;
constexpr std::uint64_t kBatchTag = 4;
constexpr std::uint64_t kValueTag = 5;
constexpr std::uint64_t kDerivTag = 6;

TermGroups singleton_units(std::size_t count) {
  TermGroups units(count);
  for (std::size_t j = 0; j < count; ++j) units[j] = {j};
  return units;
}

void check_register(const ParamCircuit& circuit, const PauliObservable& obs) {
  if (obs.empty()) throw std::invalid_argument("observable has no terms");
  if (obs.max_qubit() >= circuit.num_qubits()) {
    throw std::out_of_range("observable acts on qubit " + std::to_string(obs.max_qubit()) +
                            " outside a " + std::to_string(circuit.num_qubits()) +
                            "-qubit circuit");
  }
}

// Draws one shift term and returns the weight that keeps the single-term
// estimate unbiased: K * gamma_k for uniform draws, sign(gamma_k) * sum|gamma|
// for draws proportional to |gamma|.
std::size_t draw_shift_term(const std::vector<ShiftTerm>& terms, Weighting weighting,
                            RngStream& rng, double& weight) {
  if (weighting == Weighting::Uniform) {
    const std::size_t k = rng.uniform_index(terms.size());
    weight = static_cast<double>(terms.size()) * terms[k].gamma;
    return k;
  }
  double total = 0.0;
  for (const auto& t : terms) total += std::abs(t.gamma);
  const double u = rng.uniform() * total;
  double acc = 0.0;
  std::size_t k = terms.size() - 1;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    acc += std::abs(terms[i].gamma);
    if (u < acc) {
      k = i;
      break;
    }
  }
  weight = terms[k].gamma >= 0.0 ? total : -total;
  return k;
}

}  // namespace

void EstimatorConfig::validate(std::size_t dataset_size) const {
  if (shots == 0) throw std::invalid_argument("shots must be at least 1");
  if (batch_size == 0) throw std::invalid_argument("batch size must be at least 1");
  if (dataset_size != 0 && batch_size > dataset_size) {
    throw std::invalid_argument("batch size " + std::to_string(batch_size) +
                                " exceeds dataset size " + std::to_string(dataset_size));
  }
}

// ---------------------------------------------------------------------------
// VQE / QAOA

VqeEstimator::VqeEstimator(ParamCircuit circuit, PauliObservable hamiltonian,
                           EstimatorConfig config, StateVector initial)
    : circuit_(std::move(circuit)),
      hamiltonian_(std::move(hamiltonian)),
      config_(config),
      initial_(std::move(initial)),
      rule_(derive_shift_rule(circuit_)) {
  config_.validate();
  check_register(circuit_, hamiltonian_);
  if (initial_.num_qubits() != circuit_.num_qubits()) {
    throw std::invalid_argument("initial state size does not match the circuit");
  }
  units_ = config_.hamiltonian_sampling == HamiltonianSampling::UniformGroup
               ? greedy_qwc_groups(hamiltonian_)
               : singleton_units(hamiltonian_.size());
}

VqeEstimator::VqeEstimator(ParamCircuit circuit, PauliObservable hamiltonian,
                           EstimatorConfig config)
    : VqeEstimator(circuit, std::move(hamiltonian), config, StateVector(circuit.num_qubits())) {}

double VqeEstimator::measure_unit(const StateVector& state, std::size_t unit, RngStream& rng,
                                  GradientEstimate& cost) const {
  const auto& members = units_[unit];
  cost.circuits_executed += 1;
  if (config_.exact_expectations) {
    double total = 0.0;
    for (std::size_t j : members) {
      total += hamiltonian_[j].coefficient * pauli_expectation(state, hamiltonian_[j].pauli);
    }
    return total;
  }
  cost.measurements_used += config_.shots;
  if (members.size() == 1) {
    const auto& term = hamiltonian_[members.front()];
    return term.coefficient * sample_term(state, term.pauli, config_.shots, rng);
  }
  std::vector<PauliString> paulis;
  paulis.reserve(members.size());
  for (std::size_t j : members) paulis.push_back(hamiltonian_[j].pauli);
  const auto means = sample_group(state, paulis, config_.shots, rng);
  double total = 0.0;
  for (std::size_t m = 0; m < members.size(); ++m) {
    total += hamiltonian_[members[m]].coefficient * means[m];
  }
  return total;
}

std::size_t VqeEstimator::draw_shift(std::size_t slot, RngStream& rng, double& weight) const {
  return draw_shift_term(rule_.terms(slot), config_.weighting, rng, weight);
}

GradientEstimate VqeEstimator::operator()(std::span<const double> theta,
                                          const RngStream& rng) const {
  const PrefixCache cache(circuit_, theta, initial_);
  GradientEstimate est;
  est.values.assign(rule_.num_slots(), 0.0);

  const bool sample_units = config_.hamiltonian_sampling != HamiltonianSampling::None;
  const bool sample_shift = config_.shift_sampling == ShiftSampling::Uniform;
  const double unit_weight = static_cast<double>(units_.size());

  for (std::size_t slot = 0; slot < rule_.num_slots(); ++slot) {
    const RngStream slot_rng = rng.split(slot);
    RngStream unit_rng = slot_rng.split(kUnitTag);
    RngStream shift_rng = slot_rng.split(kShiftTag);
    RngStream measure_rng = slot_rng.split(kMeasureTag);
    const auto& terms = rule_.terms(slot);

    auto measure_at = [&](const StateVector& state) {
      if (sample_units) {
        return unit_weight * measure_unit(state, unit_rng.uniform_index(units_.size()),
                                          measure_rng, est);
      }
      double total = 0.0;
      for (std::size_t u = 0; u < units_.size(); ++u) total += measure_unit(state, u, measure_rng, est);
      return total;
    };

    double value = 0.0;
    if (sample_shift) {
      double weight = 0.0;
      const std::size_t k = draw_shift(slot, shift_rng, weight);
      value = weight * measure_at(cache.shifted(terms[k].op_index, terms[k].shift));
    } else {
      for (const auto& t : terms) value += t.gamma * measure_at(cache.shifted(t.op_index, t.shift));
    }
    est.values[slot] = value;
  }
  return est;
}

std::uint64_t VqeEstimator::expected_measurements() const {
  if (config_.exact_expectations) return 0;
  const bool sample_units = config_.hamiltonian_sampling != HamiltonianSampling::None;
  const std::uint64_t per_state = sample_units ? 1 : units_.size();
  std::uint64_t states = 0;
  for (std::size_t slot = 0; slot < rule_.num_slots(); ++slot) {
    states += config_.shift_sampling == ShiftSampling::Uniform ? 1 : rule_.num_terms(slot);
  }
  return states * per_state * config_.shots;
}

std::uint64_t VqeEstimator::single_shot_full_cost() const {
  return static_cast<std::uint64_t>(rule_.total_terms()) * hamiltonian_.size();
}

namespace {

void require_modes(const EstimatorConfig& config, bool terms, bool shifts, const char* name) {
  const bool has_terms = config.hamiltonian_sampling != HamiltonianSampling::None;
  const bool has_shifts = config.shift_sampling != ShiftSampling::None;
  if (has_terms != terms || has_shifts != shifts) {
    throw std::invalid_argument(std::string(name) + " called with mismatched sampling modes");
  }
}

}  // namespace

GradientEstimate estimate_vqe_full(const ParamCircuit& circuit, const PauliObservable& hamiltonian,
                                   std::span<const double> theta, const EstimatorConfig& config,
                                   const RngStream& rng) {
  require_modes(config, false, false, "estimate_vqe_full");
  return VqeEstimator(circuit, hamiltonian, config)(theta, rng);
}

GradientEstimate estimate_vqe_term_sampled(const ParamCircuit& circuit,
                                           const PauliObservable& hamiltonian,
                                           std::span<const double> theta,
                                           const EstimatorConfig& config, const RngStream& rng) {
  require_modes(config, true, false, "estimate_vqe_term_sampled");
  return VqeEstimator(circuit, hamiltonian, config)(theta, rng);
}

GradientEstimate estimate_vqe_doubly(const ParamCircuit& circuit,
                                     const PauliObservable& hamiltonian,
                                     std::span<const double> theta, const EstimatorConfig& config,
                                     const RngStream& rng) {
  require_modes(config, true, true, "estimate_vqe_doubly");
  return VqeEstimator(circuit, hamiltonian, config)(theta, rng);
}

// ---------------------------------------------------------------------------
// Batches

BatchSampler::BatchSampler(std::size_t dataset_size, std::size_t batch_size, BatchMode mode)
    : size_(dataset_size), batch_(batch_size), mode_(mode) {
  if (dataset_size == 0) throw std::invalid_argument("cannot sample batches from an empty dataset");
  if (batch_size == 0 || batch_size > dataset_size) {
    throw std::invalid_argument("batch size must be in [1, dataset size]");
  }
}

std::vector<std::size_t> BatchSampler::next(RngStream& rng) {
  std::vector<std::size_t> batch(batch_);
  if (mode_ == BatchMode::WithReplacement) {
    for (auto& b : batch) b = rng.uniform_index(size_);
    drawn_ += batch_;
    return batch;
  }
  for (auto& b : batch) {
    if (order_.empty() || cursor_ == size_) {
      if (!order_.empty()) ++epochs_;
      order_.resize(size_);
      std::iota(order_.begin(), order_.end(), std::size_t{0});
      for (std::size_t i = size_ - 1; i > 0; --i) std::swap(order_[i], order_[rng.uniform_index(i + 1)]);
      cursor_ = 0;
    }
    b = order_[cursor_++];
  }
  drawn_ += batch_;
  return batch;
}

std::size_t BatchSampler::epoch() const noexcept {
  if (mode_ == BatchMode::WithReplacement) return drawn_ / size_;
  return epochs_ + (cursor_ == size_ ? 1 : 0);
}

// ---------------------------------------------------------------------------
// MSE

std::pair<RngStream, RngStream> mse_substreams(const RngStream& rng, std::size_t slot,
                                               std::size_t batch_position) {
  const RngStream base = rng.split(slot, batch_position);
  RngStream value = base.split(kValueTag);
  RngStream deriv = base.split(kDerivTag);
  if (value.id() == deriv.id()) {
    throw std::logic_error("value and derivative estimates would share a random stream");
  }
  return {value, deriv};
}

MseEstimator::MseEstimator(ParamCircuit circuit, PauliObservable observable,
                           std::vector<StateVector> inputs, std::vector<double> targets,
                           EstimatorConfig config)
    : circuit_(std::move(circuit)),
      observable_(std::move(observable)),
      inputs_(std::move(inputs)),
      targets_(std::move(targets)),
      config_(config),
      rule_(derive_shift_rule(circuit_)) {
  if (inputs_.size() != targets_.size()) {
    throw std::invalid_argument("inputs and targets differ in length");
  }
  if (inputs_.empty()) throw std::invalid_argument("MSE estimator needs a nonempty dataset");
  config_.validate(inputs_.size());
  if (config_.hamiltonian_sampling != HamiltonianSampling::None) {
    throw std::invalid_argument("term sampling is not defined for the MSE estimator");
  }
  check_register(circuit_, observable_);
  for (const auto& x : inputs_) {
    if (x.num_qubits() != circuit_.num_qubits()) {
      throw std::invalid_argument("encoded input size does not match the circuit");
    }
  }
}

double MseEstimator::value_estimate(const StateVector& state, RngStream& rng,
                                    GradientEstimate& cost) const {
  cost.circuits_executed += observable_.size();
  if (config_.exact_expectations) return expectation(state, observable_);
  cost.measurements_used += config_.shots * observable_.size();
  return sample_observable(state, observable_, config_.shots, rng);
}

GradientEstimate MseEstimator::operator()(std::span<const double> theta, const RngStream& rng,
                                          std::span<const std::size_t> batch) const {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  GradientEstimate est;
  est.values.assign(rule_.num_slots(), 0.0);
  const bool sample_shift = config_.shift_sampling == ShiftSampling::Uniform;

  for (std::size_t b = 0; b < batch.size(); ++b) {
    const std::size_t j = batch[b];
    if (j >= inputs_.size()) throw std::out_of_range("batch index out of range");
    const PrefixCache cache(circuit_, theta, inputs_[j]);
    for (std::size_t slot = 0; slot < rule_.num_slots(); ++slot) {
      auto [value_rng, deriv_rng] = mse_substreams(rng, slot, b);
      const double value = value_estimate(cache.final_state(), value_rng, est);
      const auto& terms = rule_.terms(slot);
      double deriv = 0.0;
      if (sample_shift) {
        double weight = 0.0;
        const std::size_t k = draw_shift_term(terms, config_.weighting, deriv_rng, weight);
        deriv = weight * value_estimate(cache.shifted(terms[k].op_index, terms[k].shift), deriv_rng, est);
      } else {
        for (const auto& t : terms) {
          deriv += t.gamma * value_estimate(cache.shifted(t.op_index, t.shift), deriv_rng, est);
        }
      }
      est.values[slot] += 2.0 * value * deriv - 2.0 * targets_[j] * deriv;
    }
  }
  for (auto& v : est.values) v /= static_cast<double>(batch.size());
  return est;
}

GradientEstimate MseEstimator::operator()(std::span<const double> theta, const RngStream& rng,
                                          BatchSampler& sampler) const {
  RngStream batch_rng = rng.split(kBatchTag);
  const auto batch = sampler.next(batch_rng);
  return (*this)(theta, rng, batch);
}

std::uint64_t MseEstimator::expected_measurements() const {
  if (config_.exact_expectations) return 0;
  std::uint64_t per_instance = 0;
  for (std::size_t slot = 0; slot < rule_.num_slots(); ++slot) {
    per_instance += 1 + (config_.shift_sampling == ShiftSampling::Uniform ? 1 : rule_.num_terms(slot));
  }
  return per_instance * config_.batch_size * config_.shots * observable_.size();
}

std::uint64_t MseEstimator::single_shot_full_cost() const {
  std::uint64_t per_instance = 0;
  for (std::size_t slot = 0; slot < rule_.num_slots(); ++slot) per_instance += 1 + rule_.num_terms(slot);
  return per_instance * config_.batch_size * observable_.size();
}

GradientEstimate estimate_mse(const ParamCircuit& circuit, const PauliObservable& observable,
                              std::span<const double> theta, std::span<const StateVector> inputs,
                              std::span<const double> targets, const EstimatorConfig& config,
                              const RngStream& rng) {
  if (config.batch_mode != BatchMode::WithReplacement) {
    throw std::invalid_argument("one-call MSE estimate supports with-replacement batches only");
  }
  const MseEstimator estimator(circuit, observable,
                               std::vector<StateVector>(inputs.begin(), inputs.end()),
                               std::vector<double>(targets.begin(), targets.end()), config);
  BatchSampler sampler(inputs.size(), config.batch_size, config.batch_mode);
  return estimator(theta, rng, sampler);
}

// ---------------------------------------------------------------------------
// Regularization

double L2Regularizer::value(std::span<const double> theta) const {
  double total = 0.0;
  for (double t : theta) total += t * t;
  return strength * total;
}

std::vector<double> L2Regularizer::gradient(std::span<const double> theta) const {
  std::vector<double> g(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) g[i] = 2.0 * strength * theta[i];
  return g;
}

GradientEstimate add_regularizer(GradientEstimate estimate, const L2Regularizer& reg,
                                 std::span<const double> theta) {
  if (estimate.values.size() != theta.size()) {
    throw std::invalid_argument("gradient and parameter vector differ in length");
  }
  for (std::size_t i = 0; i < theta.size(); ++i) estimate.values[i] += 2.0 * reg.strength * theta[i];
  return estimate;
}

// ---------------------------------------------------------------------------
// Polynomials of a mean

double u_statistic(const PolynomialEstimator& poly, std::span<const double> samples) {
  if (poly.coefficients.empty()) throw std::invalid_argument("polynomial has no coefficients");
  const std::size_t k = poly.degree();
  if (samples.size() < std::max<std::size_t>(k, 1)) {
    throw std::invalid_argument("U-statistic needs at least " + std::to_string(k) +
                                " samples, got " + std::to_string(samples.size()));
  }
  std::vector<double> xs(samples.begin(), samples.end());
  for (double x : xs) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite sample");
  }
  std::sort(xs.begin(), xs.end());

  // mean[j] = average over j-subsets of the first t samples of their product.
  std::vector<double> mean(k + 1, 0.0);
  mean[0] = 1.0;
  for (std::size_t t = 1; t <= xs.size(); ++t) {
    const double td = static_cast<double>(t);
    for (std::size_t j = std::min(t, k); j >= 1; --j) {
      const double jd = static_cast<double>(j);
      mean[j] = mean[j] * (td - jd) / td + xs[t - 1] * mean[j - 1] * jd / td;
    }
  }
  double u = poly.coefficients[0];
  for (std::size_t j = 1; j <= k; ++j) u += poly.coefficients[j] * mean[j];
  return u;
}

}  // namespace dsgd
