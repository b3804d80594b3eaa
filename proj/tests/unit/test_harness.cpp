#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dsgd/harness.hpp"
#include "reference.hpp"

using namespace dsgd;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("dsgd_harness_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSmallTfim = R"(
name = small
[task]
kind = tfim
qubits = 3
blocks = 2
[estimator]
shots = 1
[optimizer]
strategy = adam
alpha = 0.01
steps = 40
[run]
repeats = 3
seed = 11
)";

}  // namespace

TEST(Spec, ParsesSections) {
  const auto s = ExperimentSpec::parse(kSmallTfim);
  EXPECT_EQ(s.name, "small");
  EXPECT_EQ(s.task.kind, TaskKind::Tfim);
  EXPECT_EQ(s.task.qubits, 3);
  EXPECT_EQ(s.optimizer.strategy, Strategy::Adam);
  EXPECT_DOUBLE_EQ(s.optimizer.alpha0, 0.01);
  EXPECT_EQ(s.optimizer.max_steps, 40u);
  EXPECT_EQ(s.repeats, 3u);
  EXPECT_EQ(s.base_seed, 11u);
}

TEST(Spec, MaxCutEdgesAndChoices) {
  const auto s = ExperimentSpec::parse(
      "[task]\nkind = maxcut\nedges = 0-1, 1-2,0-2\ndepth = 4\n"
      "[estimator]\nhamiltonian_sampling = group\nshots = 5\n");
  EXPECT_EQ(s.task.edges, (std::vector<Edge>{{0, 1}, {1, 2}, {0, 2}}));
  EXPECT_EQ(s.estimator.hamiltonian_sampling, HamiltonianSampling::UniformGroup);
  EXPECT_EQ(s.estimator.shots, 5u);
}

TEST(Spec, RejectsBadInput) {
  EXPECT_THROW(ExperimentSpec::parse("[task]\ncolour = red\n"), std::invalid_argument);
  EXPECT_THROW(ExperimentSpec::parse("[task]\nkind = chess\n"), std::invalid_argument);
  EXPECT_THROW(ExperimentSpec::parse("[task]\nqubits = four\n"), std::invalid_argument);
  EXPECT_THROW(ExperimentSpec::parse("[run]\nrepeats = 0\n"), std::invalid_argument);
  EXPECT_THROW(ExperimentSpec::parse("[estimator]\nshots = 0\n"), std::invalid_argument);
  EXPECT_THROW(ExperimentSpec::parse("[task]\nedges = 0_1\nkind = maxcut\n"), std::invalid_argument);
  EXPECT_THROW(ExperimentSpec::parse("[optimizer]\nepochs = 3\n"), std::invalid_argument);
  EXPECT_THROW(ExperimentSpec::parse("[task]\nkind = classifier\n[estimator]\nhamiltonian_sampling = term\n"),
               std::invalid_argument);
  EXPECT_THROW(ExperimentSpec::load("/nonexistent/spec.ini"), std::runtime_error);
}

TEST(Spec, TaskSignatureIgnoresEstimator) {
  auto a = ExperimentSpec::parse(kSmallTfim);
  auto b = a;
  b.estimator.shots = 100;
  b.name = "other";
  EXPECT_EQ(a.task_signature(), b.task_signature());
  b.task.blocks = 3;
  EXPECT_NE(a.task_signature(), b.task_signature());
}

TEST(Ensemble, SingleRunSummaryEqualsTrace) {
  auto spec = ExperimentSpec::parse(kSmallTfim);
  spec.repeats = 1;
  const auto res = run_ensemble(spec);
  ASSERT_EQ(res.runs.size(), 1u);
  const auto& rec = res.runs[0].records;
  ASSERT_EQ(res.summary.size(), rec.size());
  for (std::size_t i = 0; i < rec.size(); ++i) {
    EXPECT_EQ(res.summary[i].step, rec[i].step);
    EXPECT_EQ(res.summary[i].loss_min, rec[i].loss);
    EXPECT_EQ(res.summary[i].loss_mean, rec[i].loss);
    EXPECT_EQ(res.summary[i].loss_max, rec[i].loss);
    EXPECT_EQ(res.summary[i].meas_cum, static_cast<double>(rec[i].measurements));
  }
}

TEST(Ensemble, DeterministicAcrossRunsAndJobCounts) {
  auto spec = ExperimentSpec::parse(kSmallTfim);
  spec.repeats = 8;
  const auto d1 = temp_dir("det1"), d2 = temp_dir("det2");
  run_ensemble(spec, {1, d1});
  run_ensemble(spec, {3, d2});
  EXPECT_EQ(slurp(d1 / "summary.csv"), slurp(d2 / "summary.csv"));
  for (int r = 0; r < 8; ++r) {
    const std::string f = "run_" + std::to_string(r) + ".csv";
    ASSERT_TRUE(std::filesystem::exists(d1 / f));
    EXPECT_EQ(slurp(d1 / f), slurp(d2 / f));
  }
}

TEST(Ensemble, RunsUseDistinctSeeds) {
  const auto res = run_ensemble(ExperimentSpec::parse(kSmallTfim));
  EXPECT_NE(res.runs[0].records[0].loss, res.runs[1].records[0].loss);
}

TEST(Ensemble, SummaryInvariants) {
  const auto res = run_ensemble(ExperimentSpec::parse(kSmallTfim));
  for (std::size_t i = 0; i < res.summary.size(); ++i) {
    const auto& row = res.summary[i];
    EXPECT_LE(row.loss_min, row.loss_mean);
    EXPECT_LE(row.loss_mean, row.loss_max);
    if (i > 0) {
      EXPECT_GT(row.meas_cum, res.summary[i - 1].meas_cum);
      EXPECT_GT(row.circ_cum, res.summary[i - 1].circ_cum);
    }
  }
}

TEST(Ensemble, CsvSchema) {
  const auto dir = temp_dir("schema");
  run_ensemble(ExperimentSpec::parse(kSmallTfim), {1, dir});
  std::ifstream in(dir / "summary.csv");
  std::string first, header;
  std::getline(in, first);
  std::getline(in, header);
  const ExperimentTask task(ExperimentSpec::parse(kSmallTfim));
  EXPECT_EQ(first, "# mc1=" + std::to_string(task.mc1()));
  EXPECT_EQ(header, "step,loss_min,loss_mean,loss_max,alpha_mean,meas_cum,circ_cum");
  std::ifstream run(dir / "run_0.csv");
  std::getline(run, header);
  EXPECT_EQ(header, "step,loss,alpha,grad_norm,meas_cum,circ_cum");
}

TEST(Ensemble, LedgerMatchesAnalyticCost) {
  // TFIM N=3: 5 terms, each sigma-block rotation has a 2-term shift rule.
  const auto spec = ExperimentSpec::parse(kSmallTfim);
  const ExperimentTask task(spec);
  const auto& c = task.circuit();
  std::uint64_t per_step = 0;
  const auto rule = derive_shift_rule(c);
  for (int i = 0; i < c.num_params(); ++i) per_step += 5 * rule.num_terms(i);
  EXPECT_EQ(task.mc1(), per_step);
  const auto res = run_ensemble(spec);
  for (const auto& run : res.runs) {
    for (const auto& r : run.records) EXPECT_EQ(r.measurements, r.step * per_step);
  }
}

TEST(Ensemble, ExactGradientReachesTfimGround) {
  auto spec = ExperimentSpec::parse(
      "[task]\nkind = tfim\nqubits = 4\nblocks = 10\n"
      "[estimator]\nexact = true\n"
      "[optimizer]\nstrategy = adam\nalpha = 0.01\nsteps = 2000\nmonitor_every = 100\n"
      "[run]\nrepeats = 2\n");
  const auto res = run_ensemble(spec);
  const double ground = ref::min_eigenvalue(ref::observable(tfim_hamiltonian(4), 4));
  EXPECT_NEAR(res.summary.back().loss_mean, ground, 0.02 * std::abs(ground));
}

TEST(Ensemble, ClassifierEpochsSetStepCount) {
  const auto spec = ExperimentSpec::parse(
      "[task]\nkind = classifier\nqubits = 2\nblocks = 2\ntrain_per_class = 5\nvalidation_per_class = 5\n"
      "[estimator]\nbatch_size = 3\n[optimizer]\nepochs = 2\n");
  const ExperimentTask task(spec);
  EXPECT_EQ(task.steps(), 2u * 4u);
  const auto res = run_ensemble(spec);
  EXPECT_EQ(res.runs[0].steps_taken, 8u);
}

TEST(Ensemble, FailureIsReported) {
  auto spec = ExperimentSpec::parse(kSmallTfim);
  EXPECT_THROW(run_ensemble(spec, {1, std::filesystem::path("/proc/forbidden/dir")}), std::exception);
}

TEST(Frontier, IdenticalSpecsGiveIdenticalCurves) {
  const auto spec = ExperimentSpec::parse(kSmallTfim);
  const std::vector<ExperimentSpec> specs = {spec, spec};
  const std::vector<EnsembleResult> results = {run_ensemble(spec), run_ensemble(spec)};
  const auto cmp = compare_measurement_frontiers(specs, results, -1.0);
  EXPECT_EQ(cmp.mean_loss[0], cmp.mean_loss[1]);
  EXPECT_EQ(cmp.mean_crossing[0], cmp.mean_crossing[1]);
}

TEST(Frontier, HundredShotCostIsExactlyHundredTimes) {
  auto one = ExperimentSpec::parse(kSmallTfim);
  auto hundred = one;
  hundred.estimator.shots = 100;
  const auto r1 = run_ensemble(one);
  const auto r100 = run_ensemble(hundred);
  EXPECT_EQ(r1.mc1, r100.mc1);
  for (std::size_t i = 0; i < r1.runs[0].records.size(); ++i) {
    EXPECT_EQ(r100.runs[0].records[i].measurements, 100 * r1.runs[0].records[i].measurements);
  }
}

TEST(Frontier, StepFunctionAndCrossings) {
  auto spec = ExperimentSpec::parse(kSmallTfim);
  const auto res = run_ensemble(spec);
  const std::vector<ExperimentSpec> specs = {spec};
  const std::vector<EnsembleResult> results = {res};
  const double threshold = res.summary[10].loss_mean;
  const auto cmp = compare_measurement_frontiers(specs, results, threshold);
  ASSERT_EQ(cmp.grid.size(), res.summary.size());
  for (std::size_t i = 0; i < cmp.grid.size(); ++i) {
    EXPECT_DOUBLE_EQ(cmp.grid[i], res.summary[i].meas_cum / res.mc1);
    EXPECT_EQ(cmp.mean_loss[0][i], res.summary[i].loss_mean);
  }
  ASSERT_TRUE(cmp.mean_crossing[0].has_value());
  EXPECT_LE(*cmp.mean_crossing[0], cmp.grid[10]);
  for (std::size_t r = 0; r < res.runs.size(); ++r) {
    EXPECT_EQ(cmp.run_crossing[0][r], first_crossing(res.runs[r], threshold, res.mc1));
  }
  std::ostringstream csv;
  write_frontier_csv(csv, cmp);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "meas_norm,small");
}

TEST(Frontier, MismatchedTasksThrow) {
  auto a = ExperimentSpec::parse(kSmallTfim);
  auto b = a;
  b.task.qubits = 4;
  a.repeats = b.repeats = 1;
  const std::vector<ExperimentSpec> specs = {a, b};
  const std::vector<EnsembleResult> results = {run_ensemble(a), run_ensemble(b)};
  EXPECT_THROW(compare_measurement_frontiers(specs, results, 0.0), std::invalid_argument);
}

TEST(Frontier, FirstCrossing) {
  RunTrace t;
  t.records = {{0, 1.0, 0.1, 0, 0, 0}, {1, 0.5, 0.1, 0, 20, 2}, {2, 0.2, 0.1, 0, 40, 4}};
  EXPECT_EQ(first_crossing(t, 0.5, 10), 2.0);
  EXPECT_EQ(first_crossing(t, 0.1, 10), std::nullopt);
  EXPECT_THROW(first_crossing(t, 0.5, 0), std::invalid_argument);
}
