// bench: experiment runner for the optimizer library.
//
//   bench run --optimizer ssa1 --lr 0.1 --epochs 50 --dataset synth:... --out m.csv
//   bench timing --in m.csv --out table.csv
//   bench splitting-study --out split.csv
//
// Exit status: 0 success, 1 bad arguments or config, 2 I/O failure,
// 3 training diverged (completed epochs are still written).

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "splitopt/bench/experiment.hpp"
#include "splitopt/bench/metrics.hpp"
#include "splitopt/bench/splitting_study.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitDiverged = 3;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace splitopt::bench;

  CLI::App app{"Benchmark runner for splitting-based and classical optimizers"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Train the MLP and write per-epoch metrics");
  std::string config_path;
  std::map<std::string, std::string> flags;
  run->add_option("--config", config_path, "key=value settings file; flags override it");
  const std::vector<std::pair<std::string, std::string>> run_flags = {
      {"optimizer", "Optimizer name"},
      {"lr", "Learning rate / step size h"},
      {"k", "Velocity boost exponent for the splitting optimizers"},
      {"k-schedule", "constant | exp-decay"},
      {"momentum", "n/(n+3) | (n-1)/(n+2) | constant in [0,1]"},
      {"rho", "Running-average decay for adaptive optimizers"},
      {"eps", "Division guard for adaptive optimizers"},
      {"epochs", "Number of epochs"},
      {"batch-size", "Mini-batch size"},
      {"seed", "Seed for shuffling and weight initialization"},
      {"dataset", "synth:key=value,... | idx:train-img,train-lbl,test-img,test-lbl"},
      {"loss", "nll | xent"},
      {"hidden", "Comma-separated hidden layer sizes"},
      {"ssa1-update", "equation | pseudocode"},
      {"out", "Metrics CSV path ('-' for stdout)"},
  };
  std::map<std::string, CLI::Option*> run_options;
  for (const auto& [name, help] : run_flags)
    run_options[name] = run->add_option("--" + name, flags[name], help);
  bool list = false;
  run->add_flag("--list-optimizers", list, "Print the optimizer names and exit");

  // timing
  auto* timing = app.add_subcommand("timing", "Summarize the epoch_time_s column of a metrics CSV");
  std::string timing_in;
  std::string timing_out;
  timing->add_option("--in", timing_in, "Metrics CSV")->required();
  timing->add_option("--out", timing_out, "Output table ('-' for stdout)");

  // splitting-study
  auto* study = app.add_subcommand("splitting-study", "Lie splitting defect and order sweep");
  std::string study_out;
  std::string scheme_name = "lie";
  double horizon = 1.0;
  std::vector<int> steps = {10, 20, 40, 80, 160};
  study->add_option("--out", study_out, "Output CSV ('-' for stdout)");
  study->add_option("--scheme", scheme_name, "lie | strang")
      ->check(CLI::IsMember({"lie", "strang"}));
  study->add_option("--horizon", horizon, "Integration horizon T");
  study->add_option("--steps", steps, "Step counts N (h = T/N)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (*run) {
    if (list) {
      for (const auto& name : optimizer_names()) std::cout << name << '\n';
      return 0;
    }
    ExperimentConfig config;
    try {
      std::map<std::string, std::string> settings;
      if (!config_path.empty()) settings = read_config_file(config_path);
      for (const auto& [name, opt] : run_options)
        if (opt->count() > 0) settings[name] = flags[name];
      config = config_from_settings(settings);
    } catch (const std::exception& e) {
      std::cerr << "bench run: " << e.what() << '\n';
      return kExitUsage;
    }

    TrainTestData data;
    try {
      data = load_data(config.dataset);
    } catch (const std::exception& e) {
      std::cerr << "bench run: dataset: " << e.what() << '\n';
      return kExitIo;
    }

    const ExperimentResult result = run_experiment(config, data);
    try {
      write_text(config.out.string(), format_metrics(result.records));
    } catch (const std::exception& e) {
      std::cerr << "bench run: " << e.what() << '\n';
      return kExitIo;
    }
    if (result.status == RunStatus::Diverged) {
      std::cerr << "bench run: diverged: " << result.message << '\n';
      return kExitDiverged;
    }
    return 0;
  }

  if (*timing) {
    try {
      const auto records = read_metrics(timing_in);
      std::vector<double> samples;
      samples.reserve(records.size());
      for (const auto& r : records) samples.push_back(r.epoch_time_s);
      write_text(timing_out, format_timing_table(timing_stats(samples)));
    } catch (const std::invalid_argument& e) {
      std::cerr << "bench timing: " << e.what() << '\n';
      return kExitUsage;
    } catch (const std::exception& e) {
      std::cerr << "bench timing: " << e.what() << '\n';
      return kExitIo;
    }
    return 0;
  }

  if (*study) {
    try {
      const auto scheme =
          scheme_name == "strang" ? splitopt::SplitScheme::Strang : splitopt::SplitScheme::Lie;
      const auto rows = splitting_study(nilpotent_pair(), horizon, steps, scheme);
      write_text(study_out, format_splitting_csv(rows));
    } catch (const std::invalid_argument& e) {
      std::cerr << "bench splitting-study: " << e.what() << '\n';
      return kExitUsage;
    } catch (const std::exception& e) {
      std::cerr << "bench splitting-study: " << e.what() << '\n';
      return kExitIo;
    }
    return 0;
  }
  return kExitUsage;
}
