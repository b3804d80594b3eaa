#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dsgd/circuits.hpp"
#include "dsgd/gradients.hpp"
#include "dsgd/pauli.hpp"
#include "dsgd/rng.hpp"
#include "dsgd/state_vector.hpp"

namespace dsgd {

enum class HamiltonianSampling { None, UniformTerm, UniformGroup };
enum class ShiftSampling { None, Uniform };
enum class Weighting { Uniform, Importance };
enum class BatchMode { WithReplacement, WithoutReplacement };

struct EstimatorConfig {
  std::size_t shots = 1;
  HamiltonianSampling hamiltonian_sampling = HamiltonianSampling::None;
  ShiftSampling shift_sampling = ShiftSampling::None;
  /// How the sampled shift term is drawn when shift_sampling is active.
  Weighting weighting = Weighting::Uniform;
  std::size_t batch_size = 1;
  BatchMode batch_mode = BatchMode::WithReplacement;
  /// Replace every n-shot mean by the exact expectation (simulator only).
  bool exact_expectations = false;

  /// Throws std::invalid_argument on shots == 0, batch_size == 0, or
  /// batch_size > dataset_size when a dataset size is given.
  void validate(std::size_t dataset_size = 0) const;
};

/// A stochastic gradient together with what it cost to produce.
///
/// `measurements_used` counts Born-rule samples: one per shot per measurement
/// context, where a context is one prepared circuit measured in one basis
/// (a jointly measured commuting group is one context). `circuits_executed`
/// counts distinct contexts; each is repeated `shots` times.
struct GradientEstimate {
  std::vector<double> values;
  std::uint64_t measurements_used = 0;
  std::uint64_t circuits_executed = 0;
};

/// Stochastic gradient estimators for L(theta) = <H>_theta (VQE and QAOA).
///
/// The sampling modes of the config select the estimator:
///  - none/none: every Hamiltonian term at every shift term (n K_i M per slot);
///  - term or group sampling: one uniformly drawn term (or commuting group)
///    at every shift term, weighted by the number of terms (groups);
///  - term/group sampling plus shift sampling: one term and one shift term,
///    weighted by K_i * M (uniform) or M * gamma / prob(k) (importance).
/// Every slot draws its own term and shift indices.
class VqeEstimator {
 public:
  VqeEstimator(ParamCircuit circuit, PauliObservable hamiltonian, EstimatorConfig config,
               StateVector initial);
  VqeEstimator(ParamCircuit circuit, PauliObservable hamiltonian, EstimatorConfig config);

  GradientEstimate operator()(std::span<const double> theta, const RngStream& rng) const;

  /// Closed-form measurement cost of one estimate for this config.
  std::uint64_t expected_measurements() const;
  /// Cost of one 1-shot estimate with neither term nor shift sampling.
  std::uint64_t single_shot_full_cost() const;

  const ShiftRule& rule() const noexcept { return rule_; }
  const TermGroups& sampling_units() const noexcept { return units_; }
  const EstimatorConfig& config() const noexcept { return config_; }
  const ParamCircuit& circuit() const noexcept { return circuit_; }
  const PauliObservable& hamiltonian() const noexcept { return hamiltonian_; }
  const StateVector& initial_state() const noexcept { return initial_; }

 private:
  double measure_unit(const StateVector& state, std::size_t unit, RngStream& rng,
                      GradientEstimate& cost) const;
  std::size_t draw_shift(std::size_t slot, RngStream& rng, double& weight) const;

  ParamCircuit circuit_;
  PauliObservable hamiltonian_;
  EstimatorConfig config_;
  StateVector initial_;
  ShiftRule rule_;
  TermGroups units_;
};

GradientEstimate estimate_vqe_full(const ParamCircuit& circuit, const PauliObservable& hamiltonian,
                                   std::span<const double> theta, const EstimatorConfig& config,
                                   const RngStream& rng);
GradientEstimate estimate_vqe_term_sampled(const ParamCircuit& circuit,
                                           const PauliObservable& hamiltonian,
                                           std::span<const double> theta,
                                           const EstimatorConfig& config, const RngStream& rng);
GradientEstimate estimate_vqe_doubly(const ParamCircuit& circuit,
                                     const PauliObservable& hamiltonian,
                                     std::span<const double> theta, const EstimatorConfig& config,
                                     const RngStream& rng);

/// Draws mini-batches of dataset indices. With replacement every index is
/// uniform and independent; without replacement the sampler walks a fresh
/// shuffle each epoch.
class BatchSampler {
 public:
  BatchSampler(std::size_t dataset_size, std::size_t batch_size, BatchMode mode);

  std::vector<std::size_t> next(RngStream& rng);
  /// Completed passes over the data (without-replacement mode) or
  /// floor(drawn / dataset_size) (with replacement).
  std::size_t epoch() const noexcept;

 private:
  std::size_t size_;
  std::size_t batch_;
  BatchMode mode_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::size_t drawn_ = 0;
  std::size_t epochs_ = 0;
};

/// Substreams feeding the value factor o~ and the derivative factor d~ of one
/// (slot, batch position) pair. Guaranteed distinct.
std::pair<RngStream, RngStream> mse_substreams(const RngStream& rng, std::size_t slot,
                                               std::size_t batch_position);

/// Gradient estimator for the dataset MSE loss
/// (1/M) sum_j (<O>_{theta,x_j} - y_j)^2.
///
/// For each slot and batch instance it combines an n-shot value estimate o~
/// and an independent derivative estimate d~ = sum_k gamma_k o~(theta_k) as
/// 2 o~ d~ - 2 y d~, averaged over the batch.
class MseEstimator {
 public:
  MseEstimator(ParamCircuit circuit, PauliObservable observable, std::vector<StateVector> inputs,
               std::vector<double> targets, EstimatorConfig config);

  GradientEstimate operator()(std::span<const double> theta, const RngStream& rng,
                              std::span<const std::size_t> batch) const;
  GradientEstimate operator()(std::span<const double> theta, const RngStream& rng,
                              BatchSampler& sampler) const;

  std::uint64_t expected_measurements() const;
  /// Cost of one 1-shot estimate without shift sampling at this batch size.
  std::uint64_t single_shot_full_cost() const;

  std::size_t dataset_size() const noexcept { return inputs_.size(); }
  const ShiftRule& rule() const noexcept { return rule_; }
  const EstimatorConfig& config() const noexcept { return config_; }

 private:
  double value_estimate(const StateVector& state, RngStream& rng, GradientEstimate& cost) const;

  ParamCircuit circuit_;
  PauliObservable observable_;
  std::vector<StateVector> inputs_;
  std::vector<double> targets_;
  EstimatorConfig config_;
  ShiftRule rule_;
};

/// One-call form; draws the batch from `rng` according to the config
/// (with-replacement sampling only, since shuffle state cannot persist here).
GradientEstimate estimate_mse(const ParamCircuit& circuit, const PauliObservable& observable,
                              std::span<const double> theta, std::span<const StateVector> inputs,
                              std::span<const double> targets, const EstimatorConfig& config,
                              const RngStream& rng);

/// R(theta) = strength * ||theta||^2.
struct L2Regularizer {
  double strength = 0.0;

  double value(std::span<const double> theta) const;
  std::vector<double> gradient(std::span<const double> theta) const;
};

/// Adds the regularizer gradient to an unbiased loss-gradient estimate; the
/// result is unbiased for the regularized loss. Costs are unchanged.
GradientEstimate add_regularizer(GradientEstimate estimate, const L2Regularizer& reg,
                                 std::span<const double> theta);

/// Polynomial f(x) = sum_j a_j x^j with a sample budget m >= degree.
struct PolynomialEstimator {
  std::vector<double> coefficients;
  std::size_t sample_budget = 1;

  std::size_t degree() const noexcept {
    return coefficients.empty() ? 0 : coefficients.size() - 1;
  }
};

/// U-statistic of the kernel h(x_1..x_k) = a_0 + sum_j a_j prod_{i<=j} x_i over
/// all ordered k-arrangements of the samples; unbiased for f(E[X]) when the
/// samples are i.i.d. Throws if fewer samples than the degree are supplied.
/// The result does not depend on sample order, bit for bit.
double u_statistic(const PolynomialEstimator& poly, std::span<const double> samples);

}  // namespace dsgd
