#include "splitopt/bench/splitting_study.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace splitopt::bench {

LinearSplitSystem<double> nilpotent_pair() {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 0, 1, 0, 0;
  b << 0, 0, 1, 0;
  return {a, b};
}

std::vector<SplittingRow> splitting_study(const LinearSplitSystem<double>& sys, double horizon,
                                          std::span<const int> step_counts, SplitScheme scheme) {
  if (!(horizon > 0.0)) throw std::invalid_argument("splitting_study: horizon must be positive");
  std::vector<SplittingRow> rows;
  rows.reserve(step_counts.size());
  for (int steps : step_counts) {
    if (steps < 1) throw std::invalid_argument("splitting_study: step counts must be >= 1");
    const double h = horizon / steps;
    const double defect =
        scheme == SplitScheme::Lie
            ? splitting_defect(sys, h)
            : spectral_norm(matrix_exp((sys.a + sys.b) * h) - strang_propagator(sys, h));
    rows.push_back({h, defect, splitting_global_error(sys, horizon, steps, scheme), std::nullopt});
  }
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const bool halved = std::abs(rows[i + 1].h * 2.0 - rows[i].h) <= 1e-12 * rows[i].h;
    if (halved && rows[i].global_error > 0.0 && rows[i + 1].global_error > 0.0)
      rows[i].observed_order = std::log2(rows[i].global_error / rows[i + 1].global_error);
  }
  return rows;
}

std::string format_splitting_csv(std::span<const SplittingRow> rows) {
  std::string out = "h,defect,observed_order\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,", r.h, r.defect);
    out += buf;
    if (r.observed_order) {
      std::snprintf(buf, sizeof buf, "%.6f", *r.observed_order);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace splitopt::bench
