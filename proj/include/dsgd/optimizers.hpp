#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dsgd/circuits.hpp"
#include "dsgd/estimators.hpp"
#include "dsgd/rng.hpp"

namespace dsgd {

enum class Strategy { Constant, PlateauDecay, Adam };

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Halve-on-plateau schedule: once at least W+1 losses have been observed,
/// alpha is divided by `factor` whenever the minimum of the last W
/// observations is not below the minimum of all earlier ones. The window then
/// restarts from the latest observation.
struct PlateauParams {
  std::size_t window = 20;
  double factor = 2.0;
};

struct OptimizerConfig {
  Strategy strategy = Strategy::Constant;
  double alpha0 = 0.01;
  PlateauParams plateau;
  AdamParams adam;
  std::size_t max_steps = 1000;
  /// Stop once the monitored loss is at or below this value.
  std::optional<double> stop_below;
  /// Record (and evaluate) the monitored loss every this many steps; the last
  /// step is always recorded. Plateau decay evaluates the loss every step.
  std::size_t monitor_every = 1;
  /// Keep a copy of theta every this many steps (0 keeps none).
  std::size_t snapshot_every = 0;

  void validate() const;
};

struct OptimizerState {
  ParameterVector theta;
  std::size_t t = 0;
  double alpha = 0.0;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::vector<double> loss_window;

  static OptimizerState initial(ParameterVector theta, const OptimizerConfig& config);
};

/// One update of theta from a gradient estimate. `loss_observation` is the
/// loss at the current theta (before the update); plateau decay requires it
/// and adjusts alpha before applying the update.
void step(OptimizerState& state, std::span<const double> gradient, const OptimizerConfig& config,
          std::optional<double> loss_observation = std::nullopt);
OptimizerState step(OptimizerState state, const GradientEstimate& estimate,
                    const OptimizerConfig& config,
                    std::optional<double> loss_observation = std::nullopt);

struct TraceRecord {
  std::size_t step = 0;
  double loss = 0.0;
  double alpha = 0.0;
  double grad_norm = 0.0;
  std::uint64_t measurements = 0;
  std::uint64_t circuits = 0;
};

struct RunTrace {
  /// Row 0 is the initial point (zero cost, zero gradient norm).
  std::vector<TraceRecord> records;
  std::vector<std::pair<std::size_t, ParameterVector>> snapshots;
  ParameterVector final_theta;
  std::size_t steps_taken = 0;
  bool stopped_early = false;
};

using LossFn = std::function<double(std::span<const double>)>;
/// Produces the gradient estimate for one step from the step's own stream.
using EstimatorFn =
    std::function<GradientEstimate(std::span<const double> theta, const RngStream& rng, std::size_t step)>;
/// Called after every recorded row; return true to stop the run.
using TraceObserver = std::function<bool(const TraceRecord&, const OptimizerState&)>;

/// Runs up to config.max_steps updates. Step t draws its estimate from
/// rng.split(t), so a run is a pure function of (inputs, rng). Estimator
/// exceptions are rethrown as std::runtime_error naming the step.
RunTrace run(const LossFn& loss, const EstimatorFn& estimator, ParameterVector theta0,
             const OptimizerConfig& config, const RngStream& rng,
             const TraceObserver& observer = nullptr);

}  // namespace dsgd
