#include "dsgd/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dsgd {

void OptimizerConfig::validate() const {
  if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) {
    throw std::invalid_argument("learning rate must be positive and finite");
  }
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw std::invalid_argument("Adam betas must lie in [0, 1)");
  }
  if (!(adam.epsilon >= 0.0)) throw std::invalid_argument("Adam epsilon must be nonnegative");
  if (plateau.window < 1) throw std::invalid_argument("plateau window must be at least 1");
  if (!(plateau.factor > 1.0)) throw std::invalid_argument("plateau factor must exceed 1");
  if (monitor_every < 1) throw std::invalid_argument("monitor interval must be at least 1");
}

OptimizerState OptimizerState::initial(ParameterVector theta, const OptimizerConfig& config) {
  config.validate();
  OptimizerState state;
  state.alpha = config.alpha0;
  if (config.strategy == Strategy::Adam) {
    state.first_moment.assign(theta.size(), 0.0);
    state.second_moment.assign(theta.size(), 0.0);
  }
  state.theta = std::move(theta);
  return state;
}

namespace {

void observe_plateau(OptimizerState& state, const PlateauParams& params, double loss) {
  auto& history = state.loss_window;
  history.push_back(loss);
  const std::size_t w = params.window;
  if (history.size() < w + 1) return;
  const auto split = history.end() - static_cast<std::ptrdiff_t>(w);
  const double recent = *std::min_element(split, history.end());
  const double earlier = *std::min_element(history.begin(), split);
  if (recent >= earlier) {
    state.alpha /= params.factor;
    history.assign(1, history.back());
  }
}

}  // namespace

void step(OptimizerState& state, std::span<const double> gradient, const OptimizerConfig& config,
          std::optional<double> loss_observation) {
  const std::size_t d = state.theta.size();
  if (gradient.size() != d) {
    throw std::invalid_argument("gradient has " + std::to_string(gradient.size()) +
                                " entries, parameters have " + std::to_string(d));
  }
  ++state.t;
  switch (config.strategy) {
    case Strategy::PlateauDecay:
      if (!loss_observation) {
        throw std::invalid_argument("plateau decay needs a loss observation every step");
      }
      observe_plateau(state, config.plateau, *loss_observation);
      [[fallthrough]];
    case Strategy::Constant:
      for (std::size_t i = 0; i < d; ++i) state.theta[i] -= state.alpha * gradient[i];
      break;
    case Strategy::Adam: {
      if (state.first_moment.size() != d) state.first_moment.assign(d, 0.0);
      if (state.second_moment.size() != d) state.second_moment.assign(d, 0.0);
      const auto& a = config.adam;
      const double t = static_cast<double>(state.t);
      const double c1 = 1.0 - std::pow(a.beta1, t);
      const double c2 = 1.0 - std::pow(a.beta2, t);
      for (std::size_t i = 0; i < d; ++i) {
        const double g = gradient[i];
        state.first_moment[i] = a.beta1 * state.first_moment[i] + (1.0 - a.beta1) * g;
        state.second_moment[i] = a.beta2 * state.second_moment[i] + (1.0 - a.beta2) * g * g;
        const double m_hat = state.first_moment[i] / c1;
        const double v_hat = state.second_moment[i] / c2;
        state.theta[i] -= state.alpha * m_hat / (std::sqrt(v_hat) + a.epsilon);
      }
      break;
    }
  }
}

OptimizerState step(OptimizerState state, const GradientEstimate& estimate,
                    const OptimizerConfig& config, std::optional<double> loss_observation) {
  step(state, estimate.values, config, loss_observation);
  return state;
}

RunTrace run(const LossFn& loss, const EstimatorFn& estimator, ParameterVector theta0,
             const OptimizerConfig& config, const RngStream& rng, const TraceObserver& observer) {
  if (config.max_steps < 1) throw std::invalid_argument("a run needs at least one step");
  if (!loss || !estimator) throw std::invalid_argument("run needs loss and estimator closures");

  OptimizerState state = OptimizerState::initial(std::move(theta0), config);
  RunTrace trace;
  const bool plateau = config.strategy == Strategy::PlateauDecay;

  double current_loss = loss(state.theta);
  TraceRecord row{0, current_loss, state.alpha, 0.0, 0, 0};
  trace.records.push_back(row);
  if (config.snapshot_every > 0) trace.snapshots.emplace_back(0, state.theta);

  auto should_stop = [&](const TraceRecord& r) {
    bool stop = config.stop_below && r.loss <= *config.stop_below;
    if (observer && observer(r, state)) stop = true;
    return stop;
  };

  if (should_stop(row)) {
    trace.stopped_early = true;
    trace.final_theta = state.theta;
    return trace;
  }

  for (std::size_t t = 1; t <= config.max_steps; ++t) {
    GradientEstimate est;
    try {
      est = estimator(state.theta, rng.split(t), t);
    } catch (const std::exception& e) {
      throw std::runtime_error("gradient estimate failed at step " + std::to_string(t) + ": " +
                               e.what());
    }
    double norm2 = 0.0;
    for (double g : est.values) norm2 += g * g;

    step(state, est.values, config, plateau ? std::optional<double>(current_loss) : std::nullopt);

    row.step = t;
    row.alpha = state.alpha;
    row.grad_norm = std::sqrt(norm2);
    row.measurements += est.measurements_used;
    row.circuits += est.circuits_executed;
    trace.steps_taken = t;

    const bool record = t % config.monitor_every == 0 || t == config.max_steps;
    if (plateau || record) current_loss = loss(state.theta);
    if (config.snapshot_every > 0 && t % config.snapshot_every == 0) {
      trace.snapshots.emplace_back(t, state.theta);
    }
    if (record) {
      row.loss = current_loss;
      trace.records.push_back(row);
      if (should_stop(row)) {
        trace.stopped_early = t < config.max_steps;
        break;
      }
    }
  }
  trace.final_theta = state.theta;
  return trace;
}

}  // namespace dsgd
