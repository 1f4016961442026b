// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "splitopt/bench/experiment.hpp"
#include "splitopt/bench/metrics.hpp"
#include "splitopt/bench/optimizers.hpp"
#include "splitopt/mlp.hpp"
#include "splitopt/objectives.hpp"
#include "splitopt/optim_adaptive.hpp"
#include "splitopt/optim_core.hpp"
#include "splitopt/schedule.hpp"
#include "splitopt/split_ode.hpp"

using namespace splitopt;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Vec random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

// 1
Outcome schedule_identity() {
  const auto s = MomentumSchedule::n_minus_1_over_n_plus_2();
  double worst = 0.0;
  for (double h : {0.1, 0.01}) {
    for (Index n = 1; n <= 10000; ++n) {
      const double lhs = momentum_complement(n, s) / h;
      const double rhs = 3.0 / (static_cast<double>(n) * h + 2.0 * h);
      worst = std::max(worst, std::abs(lhs - rhs) / rhs);
    }
  }
  return {worst <= 1e-15, "max relative error " + fmt("%.3g", worst) + " (tol 1e-15)"};
}

// 2
Outcome nesterov_forms() {
  std::mt19937_64 rng(21);
  const auto f = quadratic(random_spd(10, 1.0, 10.0, 2), random_vector(rng, 10));
  const Vec u0 = random_vector(rng, 10);
  auto a = InertialState<double>::at_rest(u0);
  auto b = InertialState<double>::at_rest(u0);
  const auto sched = MomentumSchedule::n_over_n_plus_3();
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    a = nesterov_step(a, f.gradient_oracle(), 0.1, sched, NesterovForm::TwoSequence);
    b = nesterov_step(b, f.gradient_oracle(), 0.1, sched, NesterovForm::Velocity);
    worst = std::max(worst, (a.u - b.u).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-12, "max divergence " + fmt("%.3g", worst) + " (tol 1e-12)"};
}

// 3
Outcome multistep_identities() {
  std::mt19937_64 rng(31);
  const auto f = quadratic(random_spd(5, 0.5, 5.0, 3), random_vector(rng, 5));
  const auto grad = f.gradient_oracle();
  const auto sched = MomentumSchedule::n_over_n_plus_3();
  const double h = 0.1;
  double worst = 0.0;
  for (double k : {0.0, 2.0}) {
    const SplitHyperParams hp{h, k};
    for (int variant = 0; variant < 2; ++variant) {
      InertialState<double> s;
      s.u = random_vector(rng, 5);
      s.v = random_vector(rng, 5);
      s.n = 1;
      std::vector<Vec> u, y;
      std::vector<double> beta;
      for (int i = 0; i < 51; ++i) {
        const double b = momentum_coefficient(s.n, sched);
        u.push_back(s.u);
        y.push_back(s.u + h * b * s.v);
        beta.push_back(b);
        s = variant == 0 ? ssa1_step(s, grad, hp, sched) : ssa2_step(s, grad, hp, sched);
      }
      for (std::size_t n = 1; n < u.size(); ++n) {
        const double bn = beta[n];
        const double bp = beta[n - 1];
        Vec predicted = u[n] + bn * std::pow(bp, k) * (u[n] - u[n - 1]);
        if (variant == 0) {
          predicted += bn * std::pow(bp, k - 1.0) * (1.0 - h * bp) * (1.0 - bp * bp) *
                       (y[n - 1] - u[n - 1]);
        } else {
          predicted -= h * h * bn * std::pow(bp, k) * grad(y[n - 1]);
        }
        worst = std::max(worst, (predicted - y[n]).cwiseAbs().maxCoeff());
      }
    }
  }
  return {worst <= 1e-10, "max residual " + fmt("%.3g", worst) + " (tol 1e-10)"};
}

// 4
Outcome splitting_composition() {
  std::mt19937_64 rng(41);
  const auto f = quadratic(random_spd(6, 1.0, 8.0, 4), random_vector(rng, 6));
  const auto grad = f.gradient_oracle();
  const auto sched = MomentumSchedule::n_over_n_plus_3();
  const double h = 0.1;
  const SplitHyperParams hp{h, 0.0};
  InertialState<double> s;
  s.u = random_vector(rng, 6);
  s.v = random_vector(rng, 6);
  s.n = 1;
  Vec u = s.u, v = s.v;
  double worst = 0.0;
  for (Index n = 1; n <= 20; ++n) {
    const double b = momentum_coefficient(n, sched);
    const Vec g = grad(Vec(u + h * b * v));
    // Linear velocity subproblem.
    const Vec v_half = (1.0 - h * b) * v;
    // Gradient subproblem with the perturbed velocity.
    const Vec v_next = v_half - h * g;
    const Vec v_hat = v_next - h * (1.0 / (b * b) - 1.0) * g;
    u = u + h * b * b * v_hat;
    v = v_next;
    s = ssa1_step(s, grad, hp, sched);
    worst = std::max({worst, (u - s.u).cwiseAbs().maxCoeff(), (v - s.v).cwiseAbs().maxCoeff()});
  }
  return {worst <= 1e-12, "max difference " + fmt("%.3g", worst) + " (tol 1e-12)"};
}

// 5
Outcome lie_order() {
  Mat a(2, 2), b(2, 2);
  a << 0, 1, 0, 0;
  b << 0, 0, 1, 0;
  const LinearSplitSystem<double> sys{a, b};
  Mat da = Mat::Zero(3, 3), db = Mat::Zero(3, 3);
  da.diagonal() << -1.0, 0.5, 2.0;
  db.diagonal() << 0.3, -2.0, 1.0;
  const LinearSplitSystem<double> diag{da, db};

  const int steps[] = {10, 20, 40, 80};
  double err[4];
  double lo = 1e9, hi = -1e9, defect = 0.0;
  for (int i = 0; i < 4; ++i) {
    err[i] = splitting_global_error(sys, 1.0, steps[i], SplitScheme::Lie);
    defect = std::max(defect, splitting_defect(diag, 1.0 / steps[i]));
  }
  for (int i = 0; i < 3; ++i) {
    const double p = std::log2(err[i] / err[i + 1]);
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  const bool ok = lo >= 0.8 && hi <= 1.2 && defect <= 1e-12;
  return {ok, "order in [" + fmt("%.4f", lo) + ", " + fmt("%.4f", hi) + "], commuting defect " +
                  fmt("%.3g", defect)};
}

// 6
Outcome gradient_checks() {
  std::mt19937_64 rng(61);
  double mlp_worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 5;
    const int classes = 2 + trial % 4;
    auto model = nn::MlpModel::initialized({d, 12, classes}, 500 + static_cast<std::uint64_t>(trial));
    nn::Batch batch{Mat(10, d), std::vector<int>(10)};
    std::uniform_int_distribution<int> label(0, classes - 1);
    batch.inputs = Mat::NullaryExpr(10, d, [&]() { return std::normal_distribution<double>()(rng); });
    for (auto& t : batch.targets) t = label(rng);
    const auto kind = trial % 2 ? nn::LossKind::CrossEntropy : nn::LossKind::NllOnLogSoftmax;
    const Vec g = model.forward_backward(batch, kind).gradient;
    auto probe = model;
    const Vec fd = fd_gradient(
        [&](const Vec& th) {
          probe.set_parameters(th);
          return probe.loss(batch, kind);
        },
        model.parameters(), 1e-5);
    mlp_worst = std::max(mlp_worst, (g - fd).norm() / std::max(1.0, g.norm()));
  }

  const auto quad = quadratic(random_spd(8, 1.0, 10.0, 6), random_vector(rng, 8));
  const auto rosen = rosenbrock_objective();
  double obj_worst = 0.0;
  std::uniform_real_distribution<double> box(-2.0, 2.0);
  for (const Objective* f : {&quad, &rosen}) {
    for (int i = 0; i < 100; ++i) {
      Vec u(f->dim());
      for (Eigen::Index j = 0; j < u.size(); ++j) u(j) = box(rng);
      const Vec g = f->gradient(u);
      const Vec fd = fd_gradient([f](const Vec& x) { return f->value(x); }, u, 1e-5);
      obj_worst = std::max(obj_worst, (g - fd).norm() / std::max(1.0, g.norm()));
    }
  }
  return {mlp_worst <= 1e-5 && obj_worst <= 1e-6,
          "mlp " + fmt("%.3g", mlp_worst) + " (tol 1e-5), objectives " + fmt("%.3g", obj_worst) +
              " (tol 1e-6)"};
}

// 7
Outcome convex_convergence() {
  std::mt19937_64 rng(71);
  const auto f = quadratic(random_spd(10, 1.0, 10.0, 7), random_vector(rng, 10));
  const auto grad = f.gradient_oracle();
  const double fstar = f.value(*f.minimizer());
  const Vec u0 = random_vector(rng, 10, 3.0);
  const double h = 0.1;
  const SplitHyperParams hp{h, 2.0};
  const auto sched = MomentumSchedule::n_over_n_plus_3();
  constexpr int kIters = 5000;

  auto ssa1 = InertialState<double>::at_rest(u0);
  auto ssa2 = ssa1;
  auto nag = ssa1;
  Vec gd = u0;
  int reached[4] = {-1, -1, -1, -1};
  auto mark = [&](int slot, int iter, const Vec& u) {
    if (reached[slot] < 0 && f.value(u) - fstar <= 1e-6) reached[slot] = iter;
  };
  for (int i = 1; i <= kIters; ++i) {
    ssa1 = ssa1_step(ssa1, grad, hp, sched);
    ssa2 = ssa2_step(ssa2, grad, hp, sched);
    nag = nesterov_step(nag, grad, h, sched, NesterovForm::Velocity);
    gd = gd_step<double>(gd, grad(gd), h);
    mark(0, i, ssa1.u);
    mark(1, i, ssa2.u);
    mark(2, i, nag.u);
    mark(3, i, gd);
  }
  const double gaps[] = {f.value(ssa1.u) - fstar, f.value(ssa2.u) - fstar, f.value(nag.u) - fstar,
                         f.value(gd) - fstar};
  const double worst = *std::max_element(std::begin(gaps), std::end(gaps));

  // Descent is checked up to the rounding level of f itself.
  const double slack = 1e-14 * std::max(1.0, std::abs(fstar));
  double largest_rise = 0.0;
  Vec u = u0;
  double prev = f.value(u);
  const double step = 1.0 / *f.lipschitz();
  for (int i = 0; i < kIters; ++i) {
    u = gd_step<double>(u, grad(u), step);
    const double now = f.value(u);
    largest_rise = std::max(largest_rise, now - prev);
    prev = now;
  }
  const bool monotone = largest_rise <= slack;
  return {worst <= 1e-6 && monotone,
          "iterations to 1e-6: ssa1 " + std::to_string(reached[0]) + ", ssa2 " +
              std::to_string(reached[1]) + ", nesterov " + std::to_string(reached[2]) + ", gd " +
              std::to_string(reached[3]) + " of " + std::to_string(kIters) +
              "; largest gd(1/L) rise " + fmt("%.2g", largest_rise)};
}

// 8 and 12
const char* const kDeskOptimizers[] = {"sgd",      "nesterov", "ssa1",    "ssa2",   "ssa1-ada",
                                       "adam",     "adadelta", "rmsprop", "adagrad"};

std::vector<std::string> desk_suite(std::string& detail, bool& ok) {
  const auto data =
      bench::load_data(bench::DatasetSpec::parse("synth:n_per_class=500,classes=2,dim=2,separation=6,seed=1"));
  std::vector<std::string> csvs;
  ok = true;
  double weakest = 1.0;
  std::string weakest_name;
  for (const char* name : kDeskOptimizers) {
    bench::ExperimentConfig c;
    c.optimizer.name = name;
    c.optimizer.lr = bench::default_learning_rate(name);
    c.epochs = 50;
    c.batch_size = 32;
    c.seed = 1;
    const auto r = bench::run_experiment(c, data);
    bool finite = r.status == bench::RunStatus::Completed && r.records.size() == 50;
    for (const auto& rec : r.records)
      finite = finite && std::isfinite(rec.train_loss) && std::isfinite(rec.test_loss);
    const double acc = r.records.empty() ? 0.0 : r.records.back().train_acc;
    if (!finite || acc < 0.95) ok = false;
    if (acc < weakest) {
      weakest = acc;
      weakest_name = name;
    }
    auto records = r.records;
    for (auto& rec : records) rec.epoch_time_s = 0.0;
    csvs.push_back(bench::format_metrics(records));
  }
  detail = "lowest final train accuracy " + fmt("%.4f", weakest) + " (" + weakest_name + ", tol 0.95)";
  return csvs;
}

std::vector<std::string> g_first_suite;

Outcome desk_training() {
  std::string detail;
  bool ok = false;
  g_first_suite = desk_suite(detail, ok);
  return {ok, detail};
}

Outcome determinism() {
  std::string detail;
  bool ok = false;
  const auto second = desk_suite(detail, ok);
  const bool same = !g_first_suite.empty() && second == g_first_suite;
  return {same, same ? "9 metric CSVs byte-identical" : "metric CSVs differ between runs"};
}

// 9
Outcome hand_oracles() {
  double worst = 0.0;
  auto track = [&worst](double got, double want) { worst = std::max(worst, std::abs(got - want)); };
  const auto identity = [](const Vec& u) { return Vec(u); };
  const auto scalar = [](double x) { return Vec::Constant(1, x); };
  const auto sched = MomentumSchedule::n_over_n_plus_3();

  InertialState<double> s{scalar(1.0), scalar(0.0), scalar(1.0), 1};
  s = ssa1_step(s, identity, SplitHyperParams{0.1, 2.0}, sched);
  track(s.v(0), -0.00625);
  track(s.u(0), 0.99);

  InertialState<double> t{scalar(1.0), scalar(1.0), scalar(1.0), 1};
  t = ssa2_step(t, identity, SplitHyperParams{0.1, 2.0}, sched);
  track(t.v(0), 0.05453125);
  track(t.u(0), 1.0975);

  auto a = AdaptiveState<double>::zeros(scalar(0.0));
  a = adam_step<double>(a, scalar(1.0), AdaptiveHyperParams::adam(0.001));
  track(a.theta(0), -0.001 / (1.0 + 1e-8));

  auto d = AdaptiveState<double>::zeros(scalar(0.0));
  d = adadelta_step<double>(d, scalar(1.0), AdaptiveHyperParams::adadelta(1.0));
  track(d.acc_grad_sq(0), 0.1);
  track(d.theta(0), -0.0031622618488986629);
  track(d.acc_update_sq(0), 9.9999000009999900e-7);

  auto r = AdaptiveState<double>::zeros(scalar(0.0));
  r = rmsprop_step<double>(r, scalar(1.0), AdaptiveHyperParams::rmsprop(0.001));
  track(r.theta(0), -0.0031622775020545082);

  auto g = AdaptiveState<double>::zeros(scalar(0.0));
  g = adagrad_step<double>(g, scalar(1.0), AdaptiveHyperParams::adagrad(0.1));
  track(g.theta(0), -0.099999999000000010);
  const double before = g.theta(0);
  g = adagrad_step<double>(g, scalar(1.0), AdaptiveHyperParams::adagrad(0.1));
  track(g.theta(0) - before, -0.070710677618654756);

  auto z = AdaptiveState<double>::zeros(scalar(1.0));
  z.n = 1;
  z = ssa1_ada_step<double>(z, identity, AdaptiveHyperParams::ssa1_ada(1.0), sched,
                            Ssa1AdaVariant::AsWritten);
  track(z.acc_grad_sq(0), 0.1);
  track(z.z(0), 1.0);
  track(z.v(0), -1.9764136555616643e-4);
  track(z.theta(0), 0.99999000009999900001);

  return {worst <= 1e-9, "max deviation " + fmt("%.3g", worst) + " (tol 1e-9)"};
}

// 10
Outcome timing_table() {
  const double s[] = {1, 2, 3, 4};
  const auto t = bench::timing_stats(s);
  double worst = 0.0;
  const double got[] = {t.mean, t.std, t.min, t.q25, t.q50, t.q75, t.max, t.sum};
  const double want[] = {2.5, 1.2909944487358056, 1, 1.75, 2.5, 3.25, 4, 10};
  for (int i = 0; i < 8; ++i) worst = std::max(worst, std::abs(got[i] - want[i]));

  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> len(1, 100);
  std::lognormal_distribution<double> secs(-3.0, 1.0);
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> x(static_cast<std::size_t>(len(rng)));
    for (auto& v : x) v = secs(rng);
    const auto r = bench::timing_stats(x);
    const bool ordered = r.min <= r.q25 && r.q25 <= r.q50 && r.q50 <= r.q75 && r.q75 <= r.max;
    const bool summed = std::abs(r.sum - r.mean * static_cast<double>(r.count)) <= 1e-9 * r.sum;
    violations += !(ordered && summed);
  }
  return {worst <= 1e-9 && violations == 0,
          "max deviation " + fmt("%.3g", worst) + ", invariant violations " +
              std::to_string(violations) + "/1000"};
}

// 11
Outcome ode_tracking() {
  const auto identity = [](const Vec& u) { return Vec(u); };
  auto sup_error = [&](double h) {
    const int n_steps = static_cast<int>(std::lround(5.0 / h));
    constexpr int kSub = 8;
    SecondOrderSystem<double> sys{[](double) { return 1.0; }, identity, Vec::Ones(1), Vec::Zero(1)};
    const auto ref = integrate_second_order(sys, 5.0, n_steps * kSub);
    auto s = InertialState<double>::at_rest(Vec::Ones(1));
    double worst = 0.0;
    for (int n = 1; n <= n_steps; ++n) {
      s = ssa2_step(s, identity, SplitHyperParams{h, 0.0}, MomentumSchedule::constant(1.0));
      worst = std::max(worst, std::abs(s.u(0) - ref[static_cast<std::size_t>(n * kSub)].u(0)));
    }
    return worst;
  };
  const double e[] = {sup_error(0.05), sup_error(0.025), sup_error(0.0125)};
  const double p1 = std::log2(e[0] / e[1]);
  const double p2 = std::log2(e[1] / e[2]);
  return {std::min(p1, p2) >= 0.8, "errors " + fmt("%.3g", e[0]) + ", " + fmt("%.3g", e[1]) + ", " +
                                        fmt("%.3g", e[2]) + ", orders " + fmt("%.3f", p1) + ", " +
                                        fmt("%.3f", p2) + " (min 0.8)"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "schedule identity", 1.0, schedule_identity},
      {2, "nesterov form equivalence", 1.0, nesterov_forms},
      {3, "ssa1/ssa2 multi-step identities", 1.0, multistep_identities},
      {4, "splitting composition", 1.0, splitting_composition},
      {5, "lie splitting order", 1.0, lie_order},
      {6, "gradient checks", 10.0, gradient_checks},
      {7, "convex convergence", 5.0, convex_convergence},
      {8, "desk-scale training", 60.0, desk_training},
      {9, "hand-oracle single steps", 1.0, hand_oracles},
      {10, "timing table", 1.0, timing_table},
      {11, "ode tracking", 5.0, ode_tracking},
      {12, "determinism", 60.0, determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("%s %2d %-32s %s; %.3f s (budget %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.budget_s);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures,
              std::size(criteria));
  return failures == 0 ? 0 : 1;
}
