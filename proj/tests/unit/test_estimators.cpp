#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>
#include <stdexcept>

#include "dsgd/estimators.hpp"
#include "dsgd/gradients.hpp"

using namespace dsgd;

namespace {

const PauliObservable kTfim2 = PauliObservable::parse("Z0 Z1 + X0 + X1");

// Componentwise |mean - exact| <= 5 standard errors over `draws` estimates.
void expect_unbiased(const std::function<GradientEstimate(const RngStream&)>& draw,
                     const std::vector<double>& exact, int draws, std::uint64_t seed) {
  const RngStream root(seed);
  const std::size_t d = exact.size();
  std::vector<double> sum(d, 0.0), sum2(d, 0.0);
  for (int r = 0; r < draws; ++r) {
    const auto est = draw(root.split(static_cast<std::uint64_t>(r)));
    ASSERT_EQ(est.values.size(), d);
    for (std::size_t i = 0; i < d; ++i) {
      sum[i] += est.values[i];
      sum2[i] += est.values[i] * est.values[i];
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    const double mean = sum[i] / draws;
    const double var = std::max(0.0, sum2[i] / draws - mean * mean);
    const double se = std::sqrt(var / draws);
    EXPECT_NEAR(mean, exact[i], 5.0 * se + 1e-12) << "component " << i;
  }
}

std::vector<double> theta_for(std::size_t d) {
  std::vector<double> t(d);
  for (std::size_t i = 0; i < d; ++i) t[i] = 0.3 + 0.7 * static_cast<double>(i);
  return t;
}

EstimatorConfig config(std::size_t shots, HamiltonianSampling h, ShiftSampling s,
                       Weighting w = Weighting::Uniform) {
  EstimatorConfig c;
  c.shots = shots;
  c.hamiltonian_sampling = h;
  c.shift_sampling = s;
  c.weighting = w;
  return c;
}

struct MseToy {
  ParamCircuit circuit{1, 2};
  PauliObservable z = PauliObservable::parse("Z0");
  std::vector<StateVector> inputs;
  std::vector<double> targets = {1.0, -1.0, 1.0};

  MseToy() {
    circuit.add_rotation(Gate::ry(0), 0);
    circuit.add_rotation(Gate::rz(0), 1);
    circuit.add_rotation(Gate::rx(0), 1);
    inputs = {build_amplitude_encoder(std::vector<double>{1.0, 0.0}),
              build_amplitude_encoder(std::vector<double>{0.6, 0.8}),
              build_amplitude_encoder(std::vector<double>{-0.8, 0.6})};
  }
};

}  // namespace

TEST(EstimatorConfig, Validation) {
  EstimatorConfig c;
  c.shots = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.shots = 1;
  c.batch_size = 5;
  EXPECT_THROW(c.validate(4), std::invalid_argument);
  EXPECT_NO_THROW(c.validate(5));
}

TEST(VqeEstimators, FullIsUnbiased) {
  const auto c = build_sigma_block_ansatz(2, 2);
  const auto theta = theta_for(4);
  const auto exact = exact_gradient(c, kTfim2, theta);
  const auto cfg = config(1, HamiltonianSampling::None, ShiftSampling::None);
  expect_unbiased([&](const RngStream& r) { return estimate_vqe_full(c, kTfim2, theta, cfg, r); }, exact, 20000, 1);
}

TEST(VqeEstimators, TermSampledIsUnbiased) {
  const auto c = build_sigma_block_ansatz(2, 2);
  const auto theta = theta_for(4);
  const auto exact = exact_gradient(c, kTfim2, theta);
  const VqeEstimator term(c, kTfim2, config(1, HamiltonianSampling::UniformTerm, ShiftSampling::None));
  expect_unbiased([&](const RngStream& r) { return term(theta, r); }, exact, 20000, 2);
  const VqeEstimator group(c, kTfim2, config(2, HamiltonianSampling::UniformGroup, ShiftSampling::None));
  expect_unbiased([&](const RngStream& r) { return group(theta, r); }, exact, 20000, 3);
}

TEST(VqeEstimators, DoublyStochasticIsUnbiased) {
  const auto c = build_sigma_block_ansatz(2, 2);
  const auto theta = theta_for(4);
  const auto exact = exact_gradient(c, kTfim2, theta);
  const VqeEstimator uniform(c, kTfim2, config(1, HamiltonianSampling::UniformTerm, ShiftSampling::Uniform));
  expect_unbiased([&](const RngStream& r) { return uniform(theta, r); }, exact, 20000, 4);
  const VqeEstimator importance(
      c, kTfim2, config(1, HamiltonianSampling::UniformTerm, ShiftSampling::Uniform, Weighting::Importance));
  expect_unbiased([&](const RngStream& r) { return importance(theta, r); }, exact, 20000, 5);
}

TEST(VqeEstimators, SharedSlotDoublyStochasticIsUnbiased) {
  const auto hp = PauliObservable::parse("Z0 Z1 + -0.5 Z1 Z2 + Z0 Z2");
  const auto c = build_qaoa_ansatz(hp, PauliObservable::parse("X0 + X1 + X2"), 1);
  const auto theta = theta_for(2);
  const auto exact = exact_gradient(c, hp, theta);
  const VqeEstimator est(c, hp, config(1, HamiltonianSampling::UniformTerm, ShiftSampling::Uniform,
                                       Weighting::Importance));
  expect_unbiased([&](const RngStream& r) { return est(theta, r); }, exact, 20000, 6);
}

TEST(VqeEstimators, CostLedgerMatchesFormulas) {
  const auto c = build_sigma_block_ansatz(2, 3);  // d = 6, K_i = 2
  const auto theta = theta_for(6);
  const RngStream rng(9);
  const std::size_t n = 7, d = 6, k = 2, m = 3;
  const auto full = estimate_vqe_full(c, kTfim2, theta, config(n, HamiltonianSampling::None, ShiftSampling::None), rng);
  EXPECT_EQ(full.measurements_used, n * k * m * d);
  EXPECT_EQ(full.circuits_executed, k * m * d);
  const auto term = estimate_vqe_term_sampled(c, kTfim2, theta,
                                              config(n, HamiltonianSampling::UniformTerm, ShiftSampling::None), rng);
  EXPECT_EQ(term.measurements_used, n * k * d);
  const auto doubly = estimate_vqe_doubly(c, kTfim2, theta,
                                          config(n, HamiltonianSampling::UniformTerm, ShiftSampling::Uniform), rng);
  EXPECT_EQ(doubly.measurements_used, n * d);
  EXPECT_EQ(doubly.circuits_executed, d);

  const VqeEstimator est(c, kTfim2, config(n, HamiltonianSampling::None, ShiftSampling::None));
  EXPECT_EQ(est.expected_measurements(), n * k * m * d);
  EXPECT_EQ(est.single_shot_full_cost(), k * m * d);
}

TEST(VqeEstimators, RejectsMismatchedModes) {
  const auto c = build_sigma_block_ansatz(2, 1);
  const auto theta = theta_for(2);
  const RngStream rng(1);
  EXPECT_THROW(estimate_vqe_full(c, kTfim2, theta, config(1, HamiltonianSampling::UniformTerm, ShiftSampling::None), rng),
               std::invalid_argument);
  EXPECT_THROW(estimate_vqe_doubly(c, kTfim2, theta, config(1, HamiltonianSampling::None, ShiftSampling::Uniform), rng),
               std::invalid_argument);
  EXPECT_THROW(VqeEstimator(c, PauliObservable::parse("Z2"), EstimatorConfig{}), std::out_of_range);
}

TEST(VqeEstimators, DeterministicGivenStream) {
  const auto c = build_sigma_block_ansatz(2, 2);
  const auto theta = theta_for(4);
  const VqeEstimator est(c, kTfim2, config(3, HamiltonianSampling::UniformTerm, ShiftSampling::Uniform));
  const auto a = est(theta, RngStream(77));
  const auto b = est(theta, RngStream(77));
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, est(theta, RngStream(78)).values);
}

TEST(VqeEstimators, ExactModeReproducesExactGradient) {
  const auto c = build_sigma_block_ansatz(2, 2);
  const auto theta = theta_for(4);
  auto cfg = config(1, HamiltonianSampling::None, ShiftSampling::None);
  cfg.exact_expectations = true;
  const auto est = VqeEstimator(c, kTfim2, cfg)(theta, RngStream(1));
  const auto exact = exact_gradient(c, kTfim2, theta);
  for (std::size_t i = 0; i < exact.size(); ++i) EXPECT_NEAR(est.values[i], exact[i], 1e-12);
  EXPECT_EQ(est.measurements_used, 0u);
}

TEST(BatchSampler, WithoutReplacementVisitsEachIndexOncePerEpoch) {
  BatchSampler sampler(10, 3, BatchMode::WithoutReplacement);
  RngStream rng(4);
  std::vector<std::size_t> seen;
  while (seen.size() < 30) {
    for (auto i : sampler.next(rng)) seen.push_back(i);
  }
  for (int epoch = 0; epoch < 3; ++epoch) {
    std::set<std::size_t> s(seen.begin() + epoch * 10, seen.begin() + epoch * 10 + 10);
    EXPECT_EQ(s.size(), 10u);
  }
  EXPECT_EQ(sampler.epoch(), 3u);
  EXPECT_THROW(BatchSampler(3, 4, BatchMode::WithReplacement), std::invalid_argument);
}

TEST(BatchSampler, WithReplacementIsUniform) {
  BatchSampler sampler(4, 2, BatchMode::WithReplacement);
  RngStream rng(5);
  std::vector<int> counts(4, 0);
  for (int i = 0; i < 20000; ++i) {
    for (auto j : sampler.next(rng)) ++counts[j];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 5 * std::sqrt(40000 * 0.25 * 0.75));
}

TEST(MseEstimator, SubstreamsAreDistinct) {
  const RngStream rng(3);
  std::set<std::uint64_t> ids;
  for (std::size_t slot = 0; slot < 5; ++slot) {
    for (std::size_t b = 0; b < 5; ++b) {
      auto [v, d] = mse_substreams(rng, slot, b);
      EXPECT_NE(v.id(), d.id());
      ids.insert(v.id());
      ids.insert(d.id());
    }
  }
  EXPECT_EQ(ids.size(), 50u);
}

TEST(MseEstimator, IsUnbiasedForDatasetGradient) {
  MseToy toy;
  const std::vector<double> theta = {0.4, -0.9};
  const auto exact = exact_mse_gradient(toy.circuit, toy.z, theta, toy.inputs, toy.targets);
  EstimatorConfig cfg;
  cfg.batch_size = 2;
  expect_unbiased([&](const RngStream& r) { return estimate_mse(toy.circuit, toy.z, theta, toy.inputs, toy.targets, cfg, r); },
                  exact, 20000, 11);
  cfg.shift_sampling = ShiftSampling::Uniform;
  expect_unbiased([&](const RngStream& r) { return estimate_mse(toy.circuit, toy.z, theta, toy.inputs, toy.targets, cfg, r); },
                  exact, 20000, 12);
}

TEST(MseEstimator, CostLedgerMatchesFormula) {
  MseToy toy;  // slot 0 has K = 2, slot 1 has K = 4
  const std::vector<double> theta = {0.4, -0.9};
  EstimatorConfig cfg;
  cfg.shots = 5;
  cfg.batch_size = 3;
  const auto est = estimate_mse(toy.circuit, toy.z, theta, toy.inputs, toy.targets, cfg, RngStream(1));
  EXPECT_EQ(est.measurements_used, 3u * ((2 + 1) + (4 + 1)) * 5u);
  const MseEstimator mse(toy.circuit, toy.z, toy.inputs, toy.targets, cfg);
  EXPECT_EQ(mse.expected_measurements(), est.measurements_used);
  EXPECT_EQ(mse.single_shot_full_cost(), 3u * 8u);
}

TEST(MseEstimator, RejectsBadInputs) {
  MseToy toy;
  EstimatorConfig cfg;
  EXPECT_THROW(MseEstimator(toy.circuit, toy.z, toy.inputs, {1.0}, cfg), std::invalid_argument);
  cfg.batch_size = 4;
  EXPECT_THROW(MseEstimator(toy.circuit, toy.z, toy.inputs, toy.targets, cfg), std::invalid_argument);
  cfg.batch_size = 1;
  cfg.hamiltonian_sampling = HamiltonianSampling::UniformTerm;
  EXPECT_THROW(MseEstimator(toy.circuit, toy.z, toy.inputs, toy.targets, cfg), std::invalid_argument);
}

TEST(Regularizer, AddsTwiceStrengthTimesTheta) {
  const L2Regularizer reg{0.1};
  const std::vector<double> theta = {1.0, -2.0};
  EXPECT_DOUBLE_EQ(reg.value(theta), 0.5);
  GradientEstimate g{{0.5, 0.5}, 10, 2};
  const auto out = add_regularizer(g, reg, theta);
  EXPECT_DOUBLE_EQ(out.values[0], 0.7);
  EXPECT_DOUBLE_EQ(out.values[1], 0.1);
  EXPECT_EQ(out.measurements_used, 10u);
  EXPECT_THROW(add_regularizer(g, reg, std::vector<double>{1.0}), std::invalid_argument);
}

TEST(UStatistic, MatchesBruteForceOverArrangements) {
  const PolynomialEstimator poly{{0.3, -1.0, 2.0, 0.5}, 6};
  const std::vector<double> xs = {0.2, -1.0, 1.5, 0.7, -0.3, 2.0};
  // Average of the kernel over all ordered triples of distinct indices.
  double total = 0.0;
  int count = 0;
  for (std::size_t a = 0; a < xs.size(); ++a) {
    for (std::size_t b = 0; b < xs.size(); ++b) {
      for (std::size_t c = 0; c < xs.size(); ++c) {
        if (a == b || b == c || a == c) continue;
        total += 0.3 - 1.0 * xs[a] + 2.0 * xs[a] * xs[b] + 0.5 * xs[a] * xs[b] * xs[c];
        ++count;
      }
    }
  }
  EXPECT_NEAR(u_statistic(poly, xs), total / count, 1e-12);
}

TEST(UStatistic, PermutationInvariantBitForBit) {
  const PolynomialEstimator poly{{0.0, 0.0, 1.0}, 8};
  std::vector<double> xs = {1, -1, 1, 1, -1, 1, -1, -1};
  const double u = u_statistic(poly, xs);
  std::vector<double> perm = xs;
  RngStream rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
    EXPECT_EQ(u_statistic(poly, perm), u);
  }
}

TEST(UStatistic, UnbiasedForSquaredMean) {
  // X = +-1 with P(+1) = 0.8: E[X]^2 = 0.36.
  const PolynomialEstimator poly{{0.0, 0.0, 1.0}, 4};
  RngStream rng(6);
  const int draws = 50000;
  double sum = 0.0, sum2 = 0.0;
  for (int r = 0; r < draws; ++r) {
    std::vector<double> xs(4);
    for (auto& x : xs) x = rng.uniform() < 0.8 ? 1.0 : -1.0;
    const double u = u_statistic(poly, xs);
    sum += u;
    sum2 += u * u;
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sum2 / draws - mean * mean) / draws);
  EXPECT_NEAR(mean, 0.36, 5 * se);
}

TEST(UStatistic, RequiresEnoughSamples) {
  const PolynomialEstimator poly{{0.0, 0.0, 0.0, 1.0}, 3};
  EXPECT_THROW(u_statistic(poly, std::vector<double>{1.0, 2.0}), std::invalid_argument);
  EXPECT_THROW(u_statistic(PolynomialEstimator{{}, 1}, std::vector<double>{1.0}), std::invalid_argument);
  EXPECT_DOUBLE_EQ(u_statistic(poly, std::vector<double>{1.0, 2.0, 3.0}), 6.0);
}
