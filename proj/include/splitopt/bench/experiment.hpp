#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "splitopt/bench/optimizers.hpp"
#include "splitopt/datasets.hpp"
#include "splitopt/mlp.hpp"

namespace splitopt::bench {

/// `synth:<key=value,...>` or `idx:<train-img>,<train-lbl>,<test-img>,<test-lbl>`.
struct DatasetSpec {
  enum class Kind { Synthetic, Idx } kind = Kind::Synthetic;
  data::BlobSpec blobs;
  std::filesystem::path train_images, train_labels, test_images, test_labels;
  bool normalize = true;  // IDX only: MNIST mean/std normalization

  static DatasetSpec parse(const std::string& text);
  std::string to_string() const;
};

struct TrainTestData {
  data::Dataset train;
  data::Dataset test;
};

/// Synthetic test data is an independent draw with the data seed offset by kTestSeedOffset.
inline constexpr std::uint64_t kTestSeedOffset = 1000003;
TrainTestData load_data(const DatasetSpec& spec);

struct ExperimentConfig {
  OptimizerSettings optimizer;
  int epochs = 1;
  int batch_size = 32;
  std::uint64_t seed = 1;
  DatasetSpec dataset;
  nn::LossKind loss = nn::LossKind::NllOnLogSoftmax;
  std::vector<int> hidden = {32};
  std::filesystem::path out;

  void validate() const;
};

struct MetricsRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double test_loss = 0.0;
  double test_acc = 0.0;
  double epoch_time_s = 0.0;
};

enum class RunStatus { Completed, Diverged };

struct ExperimentResult {
  RunStatus status = RunStatus::Completed;
  std::vector<MetricsRecord> records;  // one per finished epoch
  Eigen::VectorXd initial_parameters;
  Eigen::VectorXd final_parameters;
  std::string message;  // divergence details
};

/// Epoch/mini-batch training loop. Each epoch shuffles with seed + epoch,
/// takes one optimizer step per batch, then evaluates the frozen model on the
/// full train and test sets. A non-finite loss stops the run with
/// RunStatus::Diverged and keeps the records of completed epochs.
ExperimentResult run_experiment(const ExperimentConfig& config, const TrainTestData& data);
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Builds a config from key=value settings. Keys match the CLI flags without
/// the leading dashes: optimizer, lr, k, k-schedule, momentum, rho, eps,
/// epochs, batch-size, seed, dataset, loss, hidden, ssa1-update, out.
ExperimentConfig config_from_settings(const std::map<std::string, std::string>& settings);

/// Reads `key = value` lines; '#' starts a comment.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

}  // namespace splitopt::bench
