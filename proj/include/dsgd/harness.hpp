#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dsgd/estimators.hpp"
#include "dsgd/optimizers.hpp"
#include "dsgd/spec_file.hpp"
#include "dsgd/tasks.hpp"

namespace dsgd {

enum class TaskKind { Tfim, MaxCut, Classifier };

struct TaskSpec {
  TaskKind kind = TaskKind::Tfim;
  int qubits = 4;
  int blocks = 10;
  // MaxCut: either an explicit edge list or a random graph.
  std::vector<Edge> edges;
  int vertices = 6;
  int num_edges = 9;
  std::uint64_t graph_seed = 1;
  int depth = 40;
  // Classifier data.
  std::string data = "synthetic";  // synthetic | mnist | csv
  std::filesystem::path data_dir;
  std::size_t train_per_class = 100;
  std::size_t validation_per_class = 50;
  std::uint64_t data_seed = 7;
  double noise = 0.25;
};

struct ExperimentSpec {
  std::string name = "experiment";
  TaskSpec task;
  EstimatorConfig estimator;
  OptimizerConfig optimizer;
  /// Classifier only: when set, overrides optimizer.max_steps with
  /// epochs * ceil(train size / batch size).
  std::optional<std::size_t> epochs;
  std::size_t repeats = 1;
  std::uint64_t base_seed = 1;
  std::filesystem::path output = "out";

  static ExperimentSpec from_config(const KeyValueFile& file);
  static ExperimentSpec parse(std::string_view text);
  static ExperimentSpec load(const std::filesystem::path& path);

  void validate() const;
  /// Canonical text of the task section; equal signatures mean equal tasks.
  std::string task_signature() const;
};

/// A task built from a spec, shared read-only by all runs of an ensemble.
class ExperimentTask {
 public:
  explicit ExperimentTask(const ExperimentSpec& spec);

  /// Monitored loss: energy (TFIM), normalized cost (MaxCut) or training MSE
  /// (classifier), all exact.
  double loss(std::span<const double> theta) const;
  ParameterVector initial_theta(RngStream& rng) const;
  const ParamCircuit& circuit() const;
  /// Measurements of one 1-shot estimate without term or shift sampling
  /// (ungrouped), the unit of the normalized measurement axis.
  std::uint64_t mc1() const;
  std::size_t steps() const { return steps_; }

  /// Runs one member of the ensemble with seed base_seed + run_index.
  RunTrace run(std::size_t run_index, const TraceObserver& observer = nullptr) const;

  const ExperimentSpec& spec() const noexcept { return spec_; }
  const std::optional<TfimTask>& tfim() const noexcept { return tfim_; }
  const std::optional<MaxCutTask>& maxcut() const noexcept { return maxcut_; }
  const std::optional<ClassifierTask>& classifier() const noexcept { return classifier_; }

 private:
  ExperimentSpec spec_;
  std::optional<TfimTask> tfim_;
  std::optional<MaxCutTask> maxcut_;
  std::optional<ClassifierTask> classifier_;
  std::optional<VqeEstimator> vqe_;
  std::optional<MseEstimator> mse_;
  std::size_t steps_ = 0;
};

struct SummaryRow {
  std::size_t step = 0;
  double loss_min = 0.0;
  double loss_mean = 0.0;
  double loss_max = 0.0;
  double alpha_mean = 0.0;
  double meas_cum = 0.0;
  double circ_cum = 0.0;
};

struct EnsembleResult {
  std::uint64_t mc1 = 0;
  std::vector<RunTrace> runs;
  std::vector<SummaryRow> summary;
};

struct EnsembleOptions {
  std::size_t jobs = 1;
  /// When set, per-run traces stream to <dir>/run_<r>.csv (flushed every 50
  /// rows) and the summary goes to <dir>/summary.csv.
  std::optional<std::filesystem::path> out_dir;
};

/// Row-wise min/mean/max across runs. Runs that stopped early contribute their
/// last row to later steps.
std::vector<SummaryRow> summarize(std::span<const RunTrace> runs);

EnsembleResult run_ensemble(const ExperimentSpec& spec, const EnsembleOptions& options = {});

void write_trace_header(std::ostream& out);
void write_trace_row(std::ostream& out, const TraceRecord& row);
void write_summary_csv(std::ostream& out, const EnsembleResult& result);

/// Loss-vs-measurement curves of several ensembles on one grid of normalized
/// measurement counts (cumulative measurements / MC_1). Each curve is a step
/// function carried forward; before its first point it is empty.
struct FrontierComparison {
  std::vector<std::string> labels;
  std::vector<double> grid;
  std::vector<std::vector<std::optional<double>>> mean_loss;  // [curve][grid point]
  /// First normalized measurement count at which the mean loss is at or below
  /// the threshold, per curve.
  std::vector<std::optional<double>> mean_crossing;
  /// Same, per run: [curve][run].
  std::vector<std::vector<std::optional<double>>> run_crossing;
};

/// Normalized measurement count at which `trace` first reaches `threshold`.
std::optional<double> first_crossing(const RunTrace& trace, double threshold, std::uint64_t mc1);

FrontierComparison compare_measurement_frontiers(std::span<const ExperimentSpec> specs,
                                                 std::span<const EnsembleResult> results,
                                                 double threshold);
void write_frontier_csv(std::ostream& out, const FrontierComparison& comparison);

}  // namespace dsgd
