#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "splitopt/split_ode.hpp"

namespace splitopt::bench {

struct SplittingRow {
  double h = 0.0;
  double defect = 0.0;                   // one-step distance of the scheme propagator from e^{(A+B)h}
  double global_error = 0.0;             // error at the horizon after N steps
  std::optional<double> observed_order;  // log2(e(h) / e(h/2)) when the next row halves h
};

/// The non-commuting pair A = [[0,1],[0,0]], B = [[0,0],[1,0]].
LinearSplitSystem<double> nilpotent_pair();

/// One row per step count, h = horizon / steps.
std::vector<SplittingRow> splitting_study(const LinearSplitSystem<double>& sys, double horizon,
                                          std::span<const int> step_counts,
                                          SplitScheme scheme = SplitScheme::Lie);

/// `h,defect,observed_order` CSV; the order field is empty when undefined.
std::string format_splitting_csv(std::span<const SplittingRow> rows);

}  // namespace splitopt::bench
