#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace splitopt {

using Index = std::int64_t;

enum class ScheduleKind {
  NOverNPlus3,        // beta_n = n / (n + 3)
  NMinus1OverNPlus2,  // beta_n = (n - 1) / (n + 2), clamped to 0 at n = 0
  Constant,
};

/// Rule producing the momentum coefficient beta_n for iteration n.
struct MomentumSchedule {
  ScheduleKind kind = ScheduleKind::NOverNPlus3;
  double beta = 0.0;  // only read for ScheduleKind::Constant

  static MomentumSchedule n_over_n_plus_3() { return {ScheduleKind::NOverNPlus3, 0.0}; }
  static MomentumSchedule n_minus_1_over_n_plus_2() {
    return {ScheduleKind::NMinus1OverNPlus2, 0.0};
  }
  static MomentumSchedule constant(double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) {
      throw std::invalid_argument("constant momentum must lie in [0, 1], got " +
                                  std::to_string(beta));
    }
    return {ScheduleKind::Constant, beta};
  }
};

template <typename Scalar = double>
Scalar momentum_coefficient(Index n, const MomentumSchedule& schedule) {
  if (n < 0) throw std::invalid_argument("iteration index must be nonnegative");
  const auto nn = static_cast<Scalar>(n);
  switch (schedule.kind) {
    case ScheduleKind::NOverNPlus3:
      return nn / (nn + Scalar(3));
    case ScheduleKind::NMinus1OverNPlus2:
      return n == 0 ? Scalar(0) : (nn - Scalar(1)) / (nn + Scalar(2));
    case ScheduleKind::Constant:
      return static_cast<Scalar>(schedule.beta);
  }
  return Scalar(0);
}

/// 1 - beta_n evaluated without cancellation (3/(n+3), 3/(n+2), or 1 - beta).
/// For large n the naive subtraction loses about log10(n) digits.
template <typename Scalar = double>
Scalar momentum_complement(Index n, const MomentumSchedule& schedule) {
  if (n < 0) throw std::invalid_argument("iteration index must be nonnegative");
  const auto nn = static_cast<Scalar>(n);
  switch (schedule.kind) {
    case ScheduleKind::NOverNPlus3:
      return Scalar(3) / (nn + Scalar(3));
    case ScheduleKind::NMinus1OverNPlus2:
      return n == 0 ? Scalar(1) : Scalar(3) / (nn + Scalar(2));
    case ScheduleKind::Constant:
      return Scalar(1) - static_cast<Scalar>(schedule.beta);
  }
  return Scalar(1);
}

enum class KSchedule {
  Constant,
  ExponentialDecay,  // k(n) = exp(-k / n) for n >= 1
};

/// Step size and velocity boost exponent shared by the splitting optimizers.
struct SplitHyperParams {
  double h = 0.1;
  double k = 2.0;
  KSchedule k_schedule = KSchedule::Constant;

  void validate() const {
    if (!(h > 0.0)) throw std::invalid_argument("step size h must be positive");
    if (!(k >= 0.0)) throw std::invalid_argument("exponent k must be nonnegative");
  }

  /// Exponent applied at iteration n. The decay rule starts at n = 1; n = 0 uses k.
  double k_at(Index n) const {
    if (k_schedule == KSchedule::ExponentialDecay && n >= 1) {
      return std::exp(-k / static_cast<double>(n));
    }
    return k;
  }
};

}  // namespace splitopt
