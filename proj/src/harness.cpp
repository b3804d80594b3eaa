#include "dsgd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace dsgd {

namespace {

constexpr std::size_t kFlushEvery = 50;

const std::set<std::string> kKnownKeys = {
    "name",
    "task.kind", "task.qubits", "task.blocks", "task.edges", "task.vertices", "task.num_edges",
    "task.graph_seed", "task.depth", "task.data", "task.data_dir", "task.train_per_class",
    "task.validation_per_class", "task.data_seed", "task.noise",
    "estimator.shots", "estimator.hamiltonian_sampling", "estimator.shift_sampling",
    "estimator.weighting", "estimator.batch_size", "estimator.batch_mode", "estimator.exact",
    "optimizer.strategy", "optimizer.alpha", "optimizer.beta1", "optimizer.beta2",
    "optimizer.epsilon", "optimizer.window", "optimizer.factor", "optimizer.steps",
    "optimizer.epochs", "optimizer.stop_below", "optimizer.monitor_every",
    "run.repeats", "run.seed", "run.output",
};

std::size_t as_size(long long v, const char* key) {
  if (v < 0) throw std::invalid_argument(std::string("key '") + key + "' must be nonnegative");
  return static_cast<std::size_t>(v);
}

std::vector<Edge> parse_edges(const std::string& text) {
  std::vector<Edge> edges;
  std::string normalized = text;
  std::replace(normalized.begin(), normalized.end(), ',', ' ');
  std::istringstream in(normalized);
  std::string token;
  while (in >> token) {
    const auto dash = token.find('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 == token.size()) {
      throw std::invalid_argument("edge '" + token + "' is not of the form a-b");
    }
    edges.emplace_back(std::stoi(token.substr(0, dash)), std::stoi(token.substr(dash + 1)));
  }
  return edges;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Spec

ExperimentSpec ExperimentSpec::from_config(const KeyValueFile& f) {
  f.require_known(kKnownKeys);
  ExperimentSpec s;
  s.name = f.get_string("name", s.name);

  auto& t = s.task;
  const std::string kind = f.get_choice("task.kind", {"tfim", "maxcut", "classifier"}, "tfim");
  t.kind = kind == "tfim" ? TaskKind::Tfim : kind == "maxcut" ? TaskKind::MaxCut : TaskKind::Classifier;
  t.qubits = static_cast<int>(f.get_int("task.qubits", t.qubits));
  t.blocks = static_cast<int>(f.get_int("task.blocks", t.blocks));
  if (auto e = f.get_string("task.edges")) t.edges = parse_edges(*e);
  t.vertices = static_cast<int>(f.get_int("task.vertices", t.vertices));
  t.num_edges = static_cast<int>(f.get_int("task.num_edges", t.num_edges));
  t.graph_seed = static_cast<std::uint64_t>(f.get_int("task.graph_seed", static_cast<long long>(t.graph_seed)));
  t.depth = static_cast<int>(f.get_int("task.depth", t.depth));
  t.data = f.get_choice("task.data", {"synthetic", "mnist", "csv"}, t.data);
  t.data_dir = f.get_string("task.data_dir", data_directory().string());
  t.train_per_class = as_size(f.get_int("task.train_per_class", static_cast<long long>(t.train_per_class)), "task.train_per_class");
  t.validation_per_class = as_size(f.get_int("task.validation_per_class", static_cast<long long>(t.validation_per_class)), "task.validation_per_class");
  t.data_seed = static_cast<std::uint64_t>(f.get_int("task.data_seed", static_cast<long long>(t.data_seed)));
  t.noise = f.get_double("task.noise", t.noise);

  auto& e = s.estimator;
  e.shots = as_size(f.get_int("estimator.shots", 1), "estimator.shots");
  const std::string hs = f.get_choice("estimator.hamiltonian_sampling", {"none", "term", "group"}, "none");
  e.hamiltonian_sampling = hs == "none"   ? HamiltonianSampling::None
                           : hs == "term" ? HamiltonianSampling::UniformTerm
                                          : HamiltonianSampling::UniformGroup;
  e.shift_sampling = f.get_choice("estimator.shift_sampling", {"none", "uniform"}, "none") == "uniform"
                         ? ShiftSampling::Uniform
                         : ShiftSampling::None;
  e.weighting = f.get_choice("estimator.weighting", {"uniform", "importance"}, "uniform") == "importance"
                    ? Weighting::Importance
                    : Weighting::Uniform;
  e.batch_size = as_size(f.get_int("estimator.batch_size", 1), "estimator.batch_size");
  e.batch_mode = f.get_choice("estimator.batch_mode", {"replacement", "shuffle"}, "replacement") == "shuffle"
                     ? BatchMode::WithoutReplacement
                     : BatchMode::WithReplacement;
  e.exact_expectations = f.get_bool("estimator.exact", false);

  auto& o = s.optimizer;
  const std::string strategy = f.get_choice("optimizer.strategy", {"constant", "plateau", "adam"}, "constant");
  o.strategy = strategy == "constant" ? Strategy::Constant
               : strategy == "plateau" ? Strategy::PlateauDecay
                                       : Strategy::Adam;
  o.alpha0 = f.get_double("optimizer.alpha", o.alpha0);
  o.adam.beta1 = f.get_double("optimizer.beta1", o.adam.beta1);
  o.adam.beta2 = f.get_double("optimizer.beta2", o.adam.beta2);
  o.adam.epsilon = f.get_double("optimizer.epsilon", o.adam.epsilon);
  o.plateau.window = as_size(f.get_int("optimizer.window", 20), "optimizer.window");
  o.plateau.factor = f.get_double("optimizer.factor", o.plateau.factor);
  o.max_steps = as_size(f.get_int("optimizer.steps", static_cast<long long>(o.max_steps)), "optimizer.steps");
  if (f.has("optimizer.epochs")) s.epochs = as_size(f.get_int("optimizer.epochs", 0), "optimizer.epochs");
  o.stop_below = f.get_optional_double("optimizer.stop_below");
  o.monitor_every = as_size(f.get_int("optimizer.monitor_every", 1), "optimizer.monitor_every");

  s.repeats = as_size(f.get_int("run.repeats", 1), "run.repeats");
  s.base_seed = static_cast<std::uint64_t>(f.get_int("run.seed", 1));
  s.output = f.get_string("run.output", "out");
  s.validate();
  return s;
}

ExperimentSpec ExperimentSpec::parse(std::string_view text) {
  return from_config(KeyValueFile::parse(text));
}

ExperimentSpec ExperimentSpec::load(const std::filesystem::path& path) {
  return from_config(KeyValueFile::load(path));
}

void ExperimentSpec::validate() const {
  if (repeats < 1) throw std::invalid_argument("run.repeats must be at least 1");
  estimator.validate();
  optimizer.validate();
  if (optimizer.max_steps < 1 && !epochs) throw std::invalid_argument("optimizer.steps must be at least 1");
  if (epochs && *epochs < 1) throw std::invalid_argument("optimizer.epochs must be at least 1");
  if (epochs && task.kind != TaskKind::Classifier) {
    throw std::invalid_argument("optimizer.epochs applies to the classifier task only");
  }
  if (task.kind == TaskKind::Classifier &&
      estimator.hamiltonian_sampling != HamiltonianSampling::None) {
    throw std::invalid_argument("term sampling does not apply to the classifier task");
  }
}

std::string ExperimentSpec::task_signature() const {
  std::ostringstream os;
  switch (task.kind) {
    case TaskKind::Tfim:
      os << "tfim qubits=" << task.qubits << " blocks=" << task.blocks;
      break;
    case TaskKind::MaxCut:
      os << "maxcut depth=" << task.depth << " vertices=" << task.vertices;
      if (task.edges.empty()) {
        os << " random edges=" << task.num_edges << " graph_seed=" << task.graph_seed;
      } else {
        os << " edges=";
        for (auto [a, b] : task.edges) os << a << '-' << b << ' ';
      }
      break;
    case TaskKind::Classifier:
      os << "classifier blocks=" << task.blocks << " data=" << task.data;
      if (task.data == "synthetic") {
        os << " qubits=" << task.qubits << " train=" << task.train_per_class
           << " validation=" << task.validation_per_class << " seed=" << task.data_seed
           << " noise=" << format_double(task.noise);
      } else {
        os << " dir=" << task.data_dir.string();
      }
      break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Task

ExperimentTask::ExperimentTask(const ExperimentSpec& spec) : spec_(spec) {
  spec_.validate();
  const auto& t = spec_.task;
  switch (t.kind) {
    case TaskKind::Tfim:
      tfim_ = build_tfim(t.qubits, t.blocks);
      vqe_.emplace(tfim_->circuit, tfim_->hamiltonian, spec_.estimator);
      break;
    case TaskKind::MaxCut: {
      std::vector<Edge> edges = t.edges;
      int vertices = t.vertices;
      if (edges.empty()) {
        RngStream graph_rng(t.graph_seed);
        edges = random_maxcut_instance(t.vertices, t.num_edges, graph_rng);
      } else {
        vertices = 0;
      }
      maxcut_ = build_maxcut(edges, t.depth, vertices);
      vqe_.emplace(maxcut_->circuit, maxcut_->problem, spec_.estimator, maxcut_->initial);
      break;
    }
    case TaskKind::Classifier: {
      Dataset data;
      if (t.data == "synthetic") {
        data = make_synthetic_dataset({t.qubits, t.train_per_class, t.validation_per_class, t.noise, t.data_seed});
      } else if (t.data == "mnist") {
        data = load_mnist_dataset({t.data_dir, 3, 6, t.train_per_class, t.validation_per_class});
      } else {
        data = read_dataset_csv(t.data_dir);
      }
      classifier_ = build_classifier(data, t.blocks);
      mse_.emplace(classifier_->estimator(spec_.estimator));
      break;
    }
  }
  steps_ = spec_.optimizer.max_steps;
  if (spec_.epochs) {
    const std::size_t m = classifier_->train_inputs.size();
    const std::size_t b = spec_.estimator.batch_size;
    steps_ = *spec_.epochs * ((m + b - 1) / b);
  }
}

double ExperimentTask::loss(std::span<const double> theta) const {
  if (tfim_) return evaluate_loss(*tfim_, theta, LossMode::exact());
  if (maxcut_) return maxcut_->normalized_cost(theta);
  return evaluate_loss(*classifier_, theta, LossMode::exact());
}

ParameterVector ExperimentTask::initial_theta(RngStream& rng) const {
  if (tfim_) return tfim_->initial_theta(rng);
  if (maxcut_) return maxcut_->initial_theta();
  return classifier_->initial_theta(rng);
}

const ParamCircuit& ExperimentTask::circuit() const {
  if (tfim_) return tfim_->circuit;
  if (maxcut_) return maxcut_->circuit;
  return classifier_->circuit;
}

std::uint64_t ExperimentTask::mc1() const {
  if (vqe_) return vqe_->single_shot_full_cost();
  return mse_->single_shot_full_cost();
}

RunTrace ExperimentTask::run(std::size_t run_index, const TraceObserver& observer) const {
  const RngStream root(spec_.base_seed + run_index);
  RngStream init_rng = root.split(1);
  const RngStream step_rng = root.split(2);
  ParameterVector theta0 = initial_theta(init_rng);

  OptimizerConfig config = spec_.optimizer;
  config.max_steps = steps_;
  const LossFn loss_fn = [this](std::span<const double> theta) { return loss(theta); };

  if (vqe_) {
    const EstimatorFn est = [this](std::span<const double> theta, const RngStream& rng, std::size_t) {
      return (*vqe_)(theta, rng);
    };
    return dsgd::run(loss_fn, est, std::move(theta0), config, step_rng, observer);
  }
  BatchSampler sampler(mse_->dataset_size(), spec_.estimator.batch_size, spec_.estimator.batch_mode);
  const EstimatorFn est = [this, &sampler](std::span<const double> theta, const RngStream& rng,
                                           std::size_t) { return (*mse_)(theta, rng, sampler); };
  return dsgd::run(loss_fn, est, std::move(theta0), config, step_rng, observer);
}

// ---------------------------------------------------------------------------
// Ensembles

std::vector<SummaryRow> summarize(std::span<const RunTrace> runs) {
  std::vector<SummaryRow> rows;
  if (runs.empty()) return rows;
  std::size_t length = 0;
  for (const auto& r : runs) {
    if (r.records.empty()) throw std::invalid_argument("trace without records");
    length = std::max(length, r.records.size());
  }
  const double count = static_cast<double>(runs.size());
  for (std::size_t i = 0; i < length; ++i) {
    SummaryRow row;
    row.loss_min = std::numeric_limits<double>::infinity();
    row.loss_max = -std::numeric_limits<double>::infinity();
    for (const auto& r : runs) {
      const TraceRecord& rec = r.records[std::min(i, r.records.size() - 1)];
      row.step = std::max(row.step, rec.step);
      row.loss_min = std::min(row.loss_min, rec.loss);
      row.loss_max = std::max(row.loss_max, rec.loss);
      row.loss_mean += rec.loss;
      row.alpha_mean += rec.alpha;
      row.meas_cum += static_cast<double>(rec.measurements);
      row.circ_cum += static_cast<double>(rec.circuits);
    }
    row.loss_mean /= count;
    // Rounding can push the mean a few ulps outside [min, max].
    row.loss_mean = std::clamp(row.loss_mean, row.loss_min, row.loss_max);
    row.alpha_mean /= count;
    row.meas_cum /= count;
    row.circ_cum /= count;
    rows.push_back(row);
  }
  return rows;
}

void write_trace_header(std::ostream& out) {
  out << "step,loss,alpha,grad_norm,meas_cum,circ_cum\n";
}

void write_trace_row(std::ostream& out, const TraceRecord& row) {
  out << row.step << ',' << format_double(row.loss) << ',' << format_double(row.alpha) << ','
      << format_double(row.grad_norm) << ',' << row.measurements << ',' << row.circuits << '\n';
}

void write_summary_csv(std::ostream& out, const EnsembleResult& result) {
  out << "# mc1=" << result.mc1 << '\n';
  out << "step,loss_min,loss_mean,loss_max,alpha_mean,meas_cum,circ_cum\n";
  for (const auto& r : result.summary) {
    out << r.step << ',' << format_double(r.loss_min) << ',' << format_double(r.loss_mean) << ','
        << format_double(r.loss_max) << ',' << format_double(r.alpha_mean) << ','
        << format_double(r.meas_cum) << ',' << format_double(r.circ_cum) << '\n';
  }
}

EnsembleResult run_ensemble(const ExperimentSpec& spec, const EnsembleOptions& options) {
  const ExperimentTask task(spec);
  EnsembleResult result;
  result.mc1 = task.mc1();
  result.runs.resize(spec.repeats);
  if (options.out_dir) std::filesystem::create_directories(*options.out_dir);

  std::vector<std::exception_ptr> errors(spec.repeats);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < spec.repeats; r = next++) {
      try {
        std::ofstream file;
        TraceObserver observer;
        if (options.out_dir) {
          const auto path = *options.out_dir / ("run_" + std::to_string(r) + ".csv");
          file.open(path);
          if (!file) throw std::runtime_error("cannot write " + path.string());
          write_trace_header(file);
          observer = [&file, rows = std::size_t{0}](const TraceRecord& row, const OptimizerState&) mutable {
            write_trace_row(file, row);
            if (++rows % kFlushEvery == 0) file.flush();
            return false;
          };
        }
        result.runs[r] = task.run(r, observer);
        if (file.is_open()) {
          file.flush();
          if (!file) throw std::runtime_error("error writing trace of run " + std::to_string(r));
        }
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };

  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, spec.repeats);
  std::vector<std::thread> threads;
  for (std::size_t j = 1; j < jobs; ++j) threads.emplace_back(worker);
  worker();
  for (auto& th : threads) th.join();

  for (std::size_t r = 0; r < errors.size(); ++r) {
    if (!errors[r]) continue;
    try {
      std::rethrow_exception(errors[r]);
    } catch (const std::exception& e) {
      throw std::runtime_error("run " + std::to_string(r) + " failed: " + e.what());
    }
  }

  result.summary = summarize(result.runs);
  if (options.out_dir) {
    const auto path = *options.out_dir / "summary.csv";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_summary_csv(out, result);
    if (!out) throw std::runtime_error("error writing " + path.string());
  }
  return result;
}

// ---------------------------------------------------------------------------
// Frontiers

std::optional<double> first_crossing(const RunTrace& trace, double threshold, std::uint64_t mc1) {
  if (mc1 == 0) throw std::invalid_argument("MC_1 must be positive");
  for (const auto& r : trace.records) {
    if (r.loss <= threshold) return static_cast<double>(r.measurements) / static_cast<double>(mc1);
  }
  return std::nullopt;
}

FrontierComparison compare_measurement_frontiers(std::span<const ExperimentSpec> specs,
                                                 std::span<const EnsembleResult> results,
                                                 double threshold) {
  if (specs.size() != results.size()) throw std::invalid_argument("one result per spec expected");
  if (specs.empty()) throw std::invalid_argument("nothing to compare");
  const std::string signature = specs.front().task_signature();
  for (const auto& s : specs) {
    if (s.task_signature() != signature) {
      throw std::invalid_argument("specs '" + specs.front().name + "' and '" + s.name +
                                  "' describe different tasks");
    }
  }

  FrontierComparison cmp;
  std::vector<std::vector<std::pair<double, double>>> curves;
  for (std::size_t c = 0; c < specs.size(); ++c) {
    const auto& res = results[c];
    if (res.mc1 == 0) throw std::invalid_argument("MC_1 must be positive");
    cmp.labels.push_back(specs[c].name);
    std::vector<std::pair<double, double>> curve;
    for (const auto& row : res.summary) {
      const double x = row.meas_cum / static_cast<double>(res.mc1);
      curve.emplace_back(x, row.loss_mean);
      cmp.grid.push_back(x);
    }
    curves.push_back(std::move(curve));

    std::optional<double> crossing;
    for (const auto& [x, loss] : curves.back()) {
      if (loss <= threshold) {
        crossing = x;
        break;
      }
    }
    cmp.mean_crossing.push_back(crossing);
    std::vector<std::optional<double>> per_run;
    for (const auto& run : res.runs) per_run.push_back(first_crossing(run, threshold, res.mc1));
    cmp.run_crossing.push_back(std::move(per_run));
  }
  std::sort(cmp.grid.begin(), cmp.grid.end());
  cmp.grid.erase(std::unique(cmp.grid.begin(), cmp.grid.end()), cmp.grid.end());

  for (const auto& curve : curves) {
    std::vector<std::optional<double>> values;
    values.reserve(cmp.grid.size());
    std::size_t k = 0;
    std::optional<double> current;
    for (double x : cmp.grid) {
      while (k < curve.size() && curve[k].first <= x) current = curve[k++].second;
      values.push_back(current);
    }
    cmp.mean_loss.push_back(std::move(values));
  }
  return cmp;
}

void write_frontier_csv(std::ostream& out, const FrontierComparison& cmp) {
  out << "meas_norm";
  for (const auto& label : cmp.labels) out << ',' << label;
  out << '\n';
  for (std::size_t i = 0; i < cmp.grid.size(); ++i) {
    out << format_double(cmp.grid[i]);
    for (const auto& curve : cmp.mean_loss) {
      out << ',';
      if (curve[i]) out << format_double(*curve[i]);
    }
    out << '\n';
  }
}

}  // namespace dsgd
