#include "splitopt/bench/optimizers.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <stdexcept>

namespace splitopt::bench {
namespace {

const std::vector<std::string> kNames = {
    "sgd",      "polyak",  "nesterov", "nesterov-two-sequence", "nesterov-const",
    "ssa1",     "ssa2",    "ssa1-const", "ssa2-const",          "adagrad",
    "adadelta", "rmsprop", "adam",     "ssa1-ada",              "ssa1-ada-zfirst"};

constexpr double kConstantMomentum = 0.5;

class SgdOptimizer final : public Optimizer {
 public:
  SgdOptimizer(VectorXd theta, double h) : theta_(std::move(theta)), h_(h) {}
  void step(const GradientFn& grad) override {
    theta_ = minibatch_sgd_step<double>(theta_, grad(theta_), h_);
    ++n_;
  }
  const VectorXd& parameters() const override { return theta_; }
  Index iterations() const override { return n_; }

 private:
  VectorXd theta_;
  double h_;
  Index n_ = 0;
};

class PolyakOptimizer final : public Optimizer {
 public:
  PolyakOptimizer(VectorXd theta, double h, double gamma)
      : state_(InertialState<double>::at_rest(std::move(theta))), h_(h), gamma_(gamma) {}
  void step(const GradientFn& grad) override {
    state_ = polyak_step<double>(std::move(state_), grad(state_.u), gamma_, h_);
  }
  const VectorXd& parameters() const override { return state_.u; }
  Index iterations() const override { return state_.n; }

 private:
  InertialState<double> state_;
  double h_;
  double gamma_;
};

class NesterovOptimizer final : public Optimizer {
 public:
  NesterovOptimizer(VectorXd theta, double h, MomentumSchedule schedule, NesterovForm form)
      : state_(InertialState<double>::at_rest(std::move(theta))),
        h_(h),
        schedule_(schedule),
        form_(form) {}
  void step(const GradientFn& grad) override {
    state_ = nesterov_step<double>(std::move(state_), grad, h_, schedule_, form_);
  }
  const VectorXd& parameters() const override { return state_.u; }
  Index iterations() const override { return state_.n; }

 private:
  InertialState<double> state_;
  double h_;
  MomentumSchedule schedule_;
  NesterovForm form_;
};

class SplittingOptimizer final : public Optimizer {
 public:
  SplittingOptimizer(VectorXd theta, SplitHyperParams hp, MomentumSchedule schedule, bool second,
                     Ssa1Update update)
      : state_(InertialState<double>::at_rest(std::move(theta))),
        hp_(hp),
        schedule_(schedule),
        second_(second),
        update_(update) {}
  void step(const GradientFn& grad) override {
    state_ = second_ ? ssa2_step<double>(std::move(state_), grad, hp_, schedule_)
                     : ssa1_step<double>(std::move(state_), grad, hp_, schedule_, update_);
  }
  const VectorXd& parameters() const override { return state_.u; }
  Index iterations() const override { return state_.n; }

 private:
  InertialState<double> state_;
  SplitHyperParams hp_;
  MomentumSchedule schedule_;
  bool second_;
  Ssa1Update update_;
};

enum class AdaptiveRule { Adagrad, Adadelta, RmsProp, Adam };

class AdaptiveOptimizer final : public Optimizer {
 public:
  AdaptiveOptimizer(VectorXd theta, AdaptiveHyperParams hp, AdaptiveRule rule)
      : state_(AdaptiveState<double>::zeros(std::move(theta))), hp_(hp), rule_(rule) {}
  void step(const GradientFn& grad) override {
    const VectorXd g = grad(state_.theta);
    switch (rule_) {
      case AdaptiveRule::Adagrad: state_ = adagrad_step<double>(std::move(state_), g, hp_); break;
      case AdaptiveRule::Adadelta: state_ = adadelta_step<double>(std::move(state_), g, hp_); break;
      case AdaptiveRule::RmsProp: state_ = rmsprop_step<double>(std::move(state_), g, hp_); break;
      case AdaptiveRule::Adam: state_ = adam_step<double>(std::move(state_), g, hp_); break;
    }
  }
  const VectorXd& parameters() const override { return state_.theta; }
  Index iterations() const override { return state_.n; }

 private:
  AdaptiveState<double> state_;
  AdaptiveHyperParams hp_;
  AdaptiveRule rule_;
};

class Ssa1AdaOptimizer final : public Optimizer {
 public:
  Ssa1AdaOptimizer(VectorXd theta, AdaptiveHyperParams hp, MomentumSchedule schedule,
                   Ssa1AdaVariant variant)
      : state_(AdaptiveState<double>::zeros(std::move(theta))),
        hp_(hp),
        schedule_(schedule),
        variant_(variant) {}
  void step(const GradientFn& grad) override {
    state_ = ssa1_ada_step<double>(std::move(state_), grad, hp_, schedule_, variant_);
  }
  const VectorXd& parameters() const override { return state_.theta; }
  Index iterations() const override { return state_.n; }

 private:
  AdaptiveState<double> state_;
  AdaptiveHyperParams hp_;
  MomentumSchedule schedule_;
  Ssa1AdaVariant variant_;
};

AdaptiveHyperParams adaptive_defaults(const std::string& name) {
  if (name == "adagrad") return AdaptiveHyperParams::adagrad();
  if (name == "adadelta") return AdaptiveHyperParams::adadelta();
  if (name == "rmsprop") return AdaptiveHyperParams::rmsprop();
  if (name == "adam") return AdaptiveHyperParams::adam();
  return AdaptiveHyperParams::ssa1_ada();
}

}  // namespace

const std::vector<std::string>& optimizer_names() { return kNames; }

bool is_adaptive(const std::string& name) {
  return name == "adagrad" || name == "adadelta" || name == "rmsprop" || name == "adam" ||
         name == "ssa1-ada" || name == "ssa1-ada-zfirst";
}

double default_learning_rate(const std::string& name) {
  if (std::find(kNames.begin(), kNames.end(), name) == kNames.end())
    throw std::invalid_argument("unknown optimizer '" + name + "'");
  if (name == "adadelta" || name == "ssa1-ada" || name == "ssa1-ada-zfirst") return 1.0;
  if (name == "polyak") return 0.01;
  if (is_adaptive(name)) return 0.001;
  return 0.1;
}

std::optional<MomentumSchedule> default_momentum(const std::string& name) {
  if (name == "polyak" || name == "nesterov-const" || name == "ssa1-const" || name == "ssa2-const")
    return MomentumSchedule::constant(kConstantMomentum);
  if (name == "nesterov" || name == "nesterov-two-sequence" || name == "ssa1" || name == "ssa2" ||
      name == "ssa1-ada" || name == "ssa1-ada-zfirst")
    return MomentumSchedule::n_over_n_plus_3();
  return std::nullopt;
}

std::unique_ptr<Optimizer> make_optimizer(const OptimizerSettings& s, VectorXd theta0) {
  const std::string& name = s.name;
  if (std::find(kNames.begin(), kNames.end(), name) == kNames.end())
    throw std::invalid_argument("unknown optimizer '" + name + "'");
  const MomentumSchedule schedule =
      s.momentum.value_or(default_momentum(name).value_or(MomentumSchedule::constant(0.0)));

  if (is_adaptive(name)) {
    AdaptiveHyperParams hp = adaptive_defaults(name);
    hp.h = s.lr;
    hp.k = s.k;
    hp.beta1 = s.beta1;
    hp.beta2 = s.beta2;
    if (s.rho) hp.rho = *s.rho;
    if (s.eps) hp.eps = *s.eps;
    hp.validate();
    if (name == "adagrad")
      return std::make_unique<AdaptiveOptimizer>(std::move(theta0), hp, AdaptiveRule::Adagrad);
    if (name == "adadelta")
      return std::make_unique<AdaptiveOptimizer>(std::move(theta0), hp, AdaptiveRule::Adadelta);
    if (name == "rmsprop")
      return std::make_unique<AdaptiveOptimizer>(std::move(theta0), hp, AdaptiveRule::RmsProp);
    if (name == "adam")
      return std::make_unique<AdaptiveOptimizer>(std::move(theta0), hp, AdaptiveRule::Adam);
    return std::make_unique<Ssa1AdaOptimizer>(
        std::move(theta0), hp, schedule,
        name == "ssa1-ada" ? Ssa1AdaVariant::AsWritten : Ssa1AdaVariant::ZFirst);
  }

  if (name == "sgd") {
    if (!(s.lr >= 0.0)) throw std::invalid_argument("sgd: learning rate must be >= 0");
    return std::make_unique<SgdOptimizer>(std::move(theta0), s.lr);
  }
  if (!(s.lr > 0.0)) throw std::invalid_argument(name + ": learning rate must be > 0");
  if (name == "polyak") {
    const double gamma = momentum_coefficient(0, schedule);
    if (schedule.kind != ScheduleKind::Constant || gamma >= 1.0)
      throw std::invalid_argument("polyak: momentum must be a constant in [0, 1)");
    return std::make_unique<PolyakOptimizer>(std::move(theta0), s.lr, gamma);
  }
  if (name == "nesterov" || name == "nesterov-const")
    return std::make_unique<NesterovOptimizer>(std::move(theta0), s.lr, schedule,
                                               NesterovForm::Velocity);
  if (name == "nesterov-two-sequence")
    return std::make_unique<NesterovOptimizer>(std::move(theta0), s.lr, schedule,
                                               NesterovForm::TwoSequence);

  SplitHyperParams hp{s.lr, s.k, s.k_schedule};
  hp.validate();
  const bool second = name == "ssa2" || name == "ssa2-const";
  return std::make_unique<SplittingOptimizer>(std::move(theta0), hp, schedule, second,
                                              s.ssa1_update);
}

MomentumSchedule parse_momentum(const std::string& text) {
  std::string t;
  for (char c : text)
    if (c != ' ') t += c;
  if (t == "n/(n+3)") return MomentumSchedule::n_over_n_plus_3();
  if (t == "(n-1)/(n+2)") return MomentumSchedule::n_minus_1_over_n_plus_2();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size())
    throw std::invalid_argument("momentum must be n/(n+3), (n-1)/(n+2) or a number, got '" +
                                text + "'");
  return MomentumSchedule::constant(value);
}

std::string to_string(const MomentumSchedule& schedule) {
  switch (schedule.kind) {
    case ScheduleKind::NOverNPlus3: return "n/(n+3)";
    case ScheduleKind::NMinus1OverNPlus2: return "(n-1)/(n+2)";
    case ScheduleKind::Constant: {
      std::ostringstream os;
      os << schedule.beta;
      return os.str();
    }
  }
  return "?";
}

}  // namespace splitopt::bench
