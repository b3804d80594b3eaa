#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "dsgd/dataset.hpp"
#include "dsgd/harness.hpp"

namespace {

using namespace dsgd;

int cmd_run(const std::string& spec_path, std::size_t jobs, const std::string& out_dir,
            std::optional<std::uint64_t> seed, bool dump) {
  ExperimentSpec spec = ExperimentSpec::load(spec_path);
  if (seed) spec.base_seed = *seed;
  const std::filesystem::path out = out_dir.empty() ? spec.output : std::filesystem::path(out_dir);
  if (dump) {
    const ExperimentTask task(spec);
    std::cout << dump_circuit(task.circuit());
    return 0;
  }
  const EnsembleResult result = run_ensemble(spec, {jobs, out});
  const auto& last = result.summary.back();
  std::cout << spec.name << ": " << result.runs.size() << " runs, " << last.step
            << " steps, final loss mean " << last.loss_mean << " [" << last.loss_min << ", "
            << last.loss_max << "], mc1=" << result.mc1 << "\n"
            << "wrote " << (out / "summary.csv").string() << '\n';
  return 0;
}

int cmd_compare(const std::vector<std::string>& spec_paths, double threshold, std::size_t jobs,
                const std::string& out_path) {
  std::vector<ExperimentSpec> specs;
  std::vector<EnsembleResult> results;
  for (const auto& p : spec_paths) {
    specs.push_back(ExperimentSpec::load(p));
    results.push_back(run_ensemble(specs.back(), {jobs, std::nullopt}));
  }
  const auto cmp = compare_measurement_frontiers(specs, results, threshold);
  for (std::size_t c = 0; c < cmp.labels.size(); ++c) {
    std::cout << cmp.labels[c] << ": mean reaches " << threshold << " at ";
    if (cmp.mean_crossing[c]) {
      std::cout << *cmp.mean_crossing[c] << " x MC1";
    } else {
      std::cout << "never";
    }
    std::cout << "; runs:";
    for (const auto& x : cmp.run_crossing[c]) {
      std::cout << ' ';
      if (x) {
        std::cout << *x;
      } else {
        std::cout << '-';
      }
    }
    std::cout << '\n';
  }
  if (out_path.empty()) {
    write_frontier_csv(std::cout, cmp);
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    write_frontier_csv(out, cmp);
  }
  return 0;
}

int cmd_data_prepare(const std::string& source, const std::string& out_dir,
                     const std::string& mnist_dir, std::size_t train, std::size_t validation,
                     int qubits, std::uint64_t seed) {
  Dataset data;
  if (source == "mnist") {
    const std::filesystem::path dir = mnist_dir.empty() ? data_directory() : std::filesystem::path(mnist_dir);
    data = load_mnist_dataset({dir, 3, 6, train, validation});
  } else {
    SyntheticConfig cfg;
    cfg.num_qubits = qubits;
    cfg.train_per_class = train;
    cfg.validation_per_class = validation;
    cfg.seed = seed;
    data = make_synthetic_dataset(cfg);
  }
  write_dataset_csv(data, out_dir);
  std::cout << "wrote " << data.train.size() << " training and " << data.validation.size()
            << " validation instances (" << data.dimension() << " features) to " << out_dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Doubly stochastic gradient descent for variational quantum circuits"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment ensemble from a spec file");
  std::string spec_path, out_dir;
  std::size_t jobs = 1;
  std::optional<std::uint64_t> seed;
  bool dump = false;
  run->add_option("spec", spec_path, "Experiment spec file")->required()->check(CLI::ExistingFile);
  run->add_option("--jobs,-j", jobs, "Concurrent runs")->check(CLI::PositiveNumber);
  run->add_option("--out,-o", out_dir, "Output directory (default: run.output of the spec)");
  run->add_option("--seed", seed, "Override the base seed");
  run->add_flag("--dump-circuit", dump, "Print the circuit and exit");

  auto* compare = app.add_subcommand("compare", "Compare loss against normalized measurements");
  std::vector<std::string> compare_specs;
  double threshold = 0.0;
  std::string compare_out;
  compare->add_option("specs", compare_specs, "Spec files sharing one task")->required()->check(CLI::ExistingFile);
  compare->add_option("--threshold", threshold, "Loss threshold")->required();
  compare->add_option("--jobs,-j", jobs, "Concurrent runs")->check(CLI::PositiveNumber);
  compare->add_option("--out,-o", compare_out, "Merged CSV path (default: stdout)");

  auto* data = app.add_subcommand("data", "Dataset utilities");
  data->require_subcommand(1);
  auto* prepare = data->add_subcommand("prepare", "Write a classification dataset as CSV");
  std::string source = "synthetic", data_out, mnist_dir;
  std::size_t train = 100, validation = 50;
  int qubits = 2;
  std::uint64_t data_seed = 7;
  prepare->add_option("--source", source, "mnist or synthetic")->check(CLI::IsMember({"mnist", "synthetic"}));
  prepare->add_option("--out", data_out, "Output directory")->required();
  prepare->add_option("--mnist-dir", mnist_dir, "Directory with the IDX files (default: $DSGD_DATA_DIR or ./data)");
  prepare->add_option("--train-per-class", train, "Training instances per class");
  prepare->add_option("--validation-per-class", validation, "Validation instances per class");
  prepare->add_option("--qubits", qubits, "Synthetic feature dimension is 2^qubits");
  prepare->add_option("--seed", data_seed, "Synthetic data seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(spec_path, jobs, out_dir, seed, dump);
    if (*compare) return cmd_compare(compare_specs, threshold, jobs, compare_out);
    if (*prepare) {
      if (source == "mnist" && !app.get_subcommand("data")->get_subcommand("prepare")->count("--train-per-class")) {
        train = 2000;
        validation = 200;
      }
      return cmd_data_prepare(source, data_out, mnist_dir, train, validation, qubits, data_seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
