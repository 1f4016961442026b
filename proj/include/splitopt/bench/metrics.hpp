#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "splitopt/bench/experiment.hpp"

namespace splitopt::bench {

inline constexpr const char* kMetricsHeader =
    "epoch,train_loss,train_acc,test_loss,test_acc,epoch_time_s";

/// CSV text: header plus one row per record, 6 significant digits.
std::string format_metrics(std::span<const MetricsRecord> records);
/// Writes format_metrics to `path`; I/O failures name the path.
void emit_metrics(std::span<const MetricsRecord> records, const std::filesystem::path& path);
std::vector<MetricsRecord> parse_metrics(const std::string& csv);
std::vector<MetricsRecord> read_metrics(const std::filesystem::path& path);

struct TimingStats {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double q25 = 0.0;
  double q50 = 0.0;
  double q75 = 0.0;
  double max = 0.0;
  double sum = 0.0;
};

/// Sample statistics (std divides by count - 1; quantiles interpolate
/// linearly between order statistics). Throws on empty input.
TimingStats timing_stats(std::span<const double> samples);

/// Two-column `statistic,seconds` table.
std::string format_timing_table(const TimingStats& stats);

}  // namespace splitopt::bench
