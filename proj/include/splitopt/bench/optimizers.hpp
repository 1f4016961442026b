#pragma once

// Runtime registry wrapping every step rule behind one stateful interface
// over a flat double-precision parameter vector.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "splitopt/optim_adaptive.hpp"
#include "splitopt/optim_core.hpp"

namespace splitopt::bench {

using VectorXd = Eigen::VectorXd;
using GradientFn = std::function<VectorXd(const VectorXd&)>;

struct OptimizerSettings {
  std::string name;
  double lr = 0.0;
  double k = 2.0;
  KSchedule k_schedule = KSchedule::Constant;
  std::optional<MomentumSchedule> momentum;  // unset: the optimizer's default
  std::optional<double> rho;
  std::optional<double> eps;
  double beta1 = 0.9;
  double beta2 = 0.999;
  Ssa1Update ssa1_update = Ssa1Update::Equation;
};

class Optimizer {
 public:
  virtual ~Optimizer() = default;

  /// Advances one iteration; `grad` is the (mini-batch) gradient oracle.
  virtual void step(const GradientFn& grad) = 0;
  /// Point whose loss is reported (u_n or theta_n).
  virtual const VectorXd& parameters() const = 0;
  virtual Index iterations() const = 0;
};

/// Names accepted by make_optimizer, in a fixed order.
const std::vector<std::string>& optimizer_names();
bool is_adaptive(const std::string& name);
/// Default learning rate used when none is given.
double default_learning_rate(const std::string& name);
/// Momentum schedule used when OptimizerSettings::momentum is unset.
std::optional<MomentumSchedule> default_momentum(const std::string& name);

/// Throws std::invalid_argument for unknown names or invalid hyper-parameters.
std::unique_ptr<Optimizer> make_optimizer(const OptimizerSettings& settings, VectorXd theta0);

/// Parses "n/(n+3)", "(n-1)/(n+2)" or a number in [0,1].
MomentumSchedule parse_momentum(const std::string& text);
std::string to_string(const MomentumSchedule& schedule);

}  // namespace splitopt::bench
