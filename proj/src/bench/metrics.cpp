#include "splitopt/bench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace splitopt::bench {
namespace {

std::string sig6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string sig12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::string format_metrics(std::span<const MetricsRecord> records) {
  std::string out = std::string(kMetricsHeader) + "\n";
  for (const auto& r : records) {
    out += std::to_string(r.epoch) + ',' + sig6(r.train_loss) + ',' + sig6(r.train_acc) + ',' +
           sig6(r.test_loss) + ',' + sig6(r.test_acc) + ',' + sig6(r.epoch_time_s) + '\n';
  }
  return out;
}

void emit_metrics(std::span<const MetricsRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << format_metrics(records);
  out.flush();
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

std::vector<MetricsRecord> parse_metrics(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader)
    throw std::invalid_argument("metrics CSV: missing or unexpected header");
  std::vector<MetricsRecord> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 6)
      throw std::invalid_argument("metrics CSV line " + std::to_string(line_no) +
                                  ": expected 6 fields");
    try {
      out.push_back({std::stoi(fields[0]), std::stod(fields[1]), std::stod(fields[2]),
                     std::stod(fields[3]), std::stod(fields[4]), std::stod(fields[5])});
    } catch (const std::exception&) {
      throw std::invalid_argument("metrics CSV line " + std::to_string(line_no) +
                                  ": unparsable value");
    }
  }
  return out;
}

std::vector<MetricsRecord> read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_metrics(buf.str());
}

TimingStats timing_stats(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("timing_stats: no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());

  TimingStats s;
  s.count = sorted.size();
  s.sum = std::accumulate(sorted.begin(), sorted.end(), 0.0);
  s.mean = s.sum / static_cast<double>(s.count);
  if (s.count > 1) {
    double ss = 0.0;
    for (double x : sorted) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.count - 1));
  }
  s.min = sorted.front();
  s.max = sorted.back();
  s.q25 = quantile(sorted, 0.25);
  s.q50 = quantile(sorted, 0.50);
  s.q75 = quantile(sorted, 0.75);
  return s;
}

std::string format_timing_table(const TimingStats& s) {
  std::string out = "statistic,seconds\n";
  out += "count," + std::to_string(s.count) + '\n';
  out += "mean," + sig12(s.mean) + '\n';
  out += "std," + sig12(s.std) + '\n';
  out += "min," + sig12(s.min) + '\n';
  out += "25%," + sig12(s.q25) + '\n';
  out += "50%," + sig12(s.q50) + '\n';
  out += "75%," + sig12(s.q75) + '\n';
  out += "max," + sig12(s.max) + '\n';
  out += "sum," + sig12(s.sum) + '\n';
  return out;
}

}  // namespace splitopt::bench
