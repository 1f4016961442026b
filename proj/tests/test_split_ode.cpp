#include <doctest.h>

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "splitopt/optim_core.hpp"
#include "splitopt/split_ode.hpp"

using namespace splitopt;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

namespace {

LinearSplitSystem<double> nilpotent() {
  Mat a(2, 2), b(2, 2);
  a << 0, 1, 0, 0;
  b << 0, 0, 1, 0;
  return {a, b};
}

LinearSplitSystem<double> diagonal_pair() {
  Mat a = Eigen::Vector3d(-1.0, 0.5, 2.0).asDiagonal();
  Mat b = Eigen::Vector3d(0.3, -2.0, 1.0).asDiagonal();
  return {a, b};
}

}  // namespace

TEST_CASE("matrix_exp hand cases") {
  CHECK(matrix_exp(Mat::Zero(3, 3)).isApprox(Mat::Identity(3, 3), 0.0));

  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 1.5;
  d(1, 1) = -7.0;
  const Mat ed = matrix_exp(d);
  CHECK(ed(0, 0) == doctest::Approx(std::exp(1.5)).epsilon(1e-14));
  CHECK(ed(1, 1) == doctest::Approx(std::exp(-7.0)).epsilon(1e-13));
  CHECK(ed(0, 1) == 0.0);

  Mat n(2, 2);
  n << 0, 1, 0, 0;
  CHECK((matrix_exp(n) - (Mat::Identity(2, 2) + n)).norm() <= 1e-15);

  Mat rot(2, 2);
  rot << 0, -std::numbers::pi, std::numbers::pi, 0;
  const Mat er = matrix_exp(rot);
  CHECK((er + Mat::Identity(2, 2)).norm() <= 1e-13);

  CHECK_THROWS_AS(matrix_exp(Mat::Zero(2, 3)), std::invalid_argument);
  Mat bad = Mat::Zero(2, 2);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(matrix_exp(bad), std::invalid_argument);
}

TEST_CASE("matrix_exp agrees with Eigen's Pade implementation") {
  std::srand(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Index d = 2 + trial % 5;
    Mat m = Mat::Random(d, d);
    m *= (0.5 + trial) / m.cwiseAbs().rowwise().sum().maxCoeff() * 10.0 / 20.0;
    const Mat ours = matrix_exp(m);
    const Mat ref = m.exp();
    CHECK((ours - ref).norm() <= 1e-13 * ref.norm());
  }
}

TEST_CASE("spectral_norm") {
  Mat d = Mat::Zero(3, 3);
  d.diagonal() << 1.0, -4.0, 2.0;
  CHECK(spectral_norm(d) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(spectral_norm(Mat::Zero(2, 2)) == 0.0);
  Mat r(2, 3);
  r << 1, 2, 3, 4, 5, 6;
  const Eigen::JacobiSVD<Mat> svd(r);
  CHECK(spectral_norm(r) == doctest::Approx(svd.singularValues()(0)).epsilon(1e-12));
}

TEST_CASE("lie_split_step") {
  const auto sys = nilpotent();
  const Vec x = Eigen::Vector2d(1.0, 0.0);
  CHECK(lie_split_step(sys, x, 0.0) == x);

  const Vec y = lie_split_step(sys, x, 0.1);
  CHECK(y(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(y(1) == doctest::Approx(0.1).epsilon(1e-15));

  const auto diag = diagonal_pair();
  const Vec z = Eigen::Vector3d(1.0, -2.0, 0.5);
  const Vec exact = matrix_exp((diag.a + diag.b) * 0.3) * z;
  CHECK((lie_split_step(diag, z, 0.3) - exact).norm() <= 1e-13 * exact.norm());

  // B first from (1,0): e^{Ah} e^{Bh} x = (1 + h^2, h).
  const Vec w = lie_split_step(sys, x, 0.1, SplitOrder::BFirst);
  CHECK(w(0) == doctest::Approx(1.01).epsilon(1e-15));
  CHECK(w(1) == doctest::Approx(0.1).epsilon(1e-15));

  CHECK_THROWS_AS(lie_split_step(sys, Vec(Vec::Zero(3)), 0.1), std::invalid_argument);
  CHECK_THROWS_AS(lie_split_step(sys, x, -0.1), std::invalid_argument);
}

TEST_CASE("splitting_defect") {
  const auto diag = diagonal_pair();
  CHECK(diag.commutes());
  for (double h : {1e-3, 0.0125, 0.1, 1.0}) CHECK(splitting_defect(diag, h) <= 1e-12);
  const double big = splitting_defect(diag, 3.0);
  CHECK(big <= 1e-13 * spectral_norm(matrix_exp((diag.a + diag.b) * 3.0)));

  const auto sys = nilpotent();
  CHECK_FALSE(sys.commutes());
  CHECK(splitting_defect(sys, 0.0) == 0.0);
  CHECK(splitting_defect(sys, 0.1) == doctest::Approx(0.005006947839995287).epsilon(1e-10));
  // Leading term h^2/2 ||[A,B]||.
  CHECK(splitting_defect(sys, 1e-3) == doctest::Approx(0.5e-6).epsilon(1e-2));
}

TEST_CASE("global splitting order") {
  const auto sys = nilpotent();
  const double errors_ref[] = {0.0591815, 0.0294940, 0.0147196, 0.0073525};
  const int steps[] = {10, 20, 40, 80};
  double e[4];
  for (int i = 0; i < 4; ++i) {
    e[i] = splitting_global_error(sys, 1.0, steps[i], SplitScheme::Lie);
    CHECK(e[i] == doctest::Approx(errors_ref[i]).epsilon(1e-5));
  }
  for (int i = 0; i < 3; ++i) {
    const double p = std::log2(e[i] / e[i + 1]);
    CHECK(p >= 0.8);
    CHECK(p <= 1.2);
  }
  for (int i : {10, 20}) {
    const double p = std::log2(splitting_global_error(sys, 1.0, i, SplitScheme::Strang) /
                               splitting_global_error(sys, 1.0, 2 * i, SplitScheme::Strang));
    CHECK(p == doctest::Approx(2.0).epsilon(0.05));
  }
}

TEST_CASE("integrate_second_order closed forms") {
  SecondOrderSystem<double> osc{[](double) { return 0.0; }, [](const Vec& u) { return Vec(u); },
                                Vec::Ones(1), Vec::Zero(1)};
  const double T = std::numbers::pi / 2;
  const auto traj = integrate_second_order(osc, T, 1000);
  CHECK(traj.size() == 1001);
  CHECK(traj.back().t == doctest::Approx(T));
  CHECK(std::abs(traj.back().u(0)) <= 1e-8);
  CHECK(traj.back().v(0) == doctest::Approx(-1.0).epsilon(1e-8));

  SecondOrderSystem<double> decay{[](double) { return 1.0; },
                                  [](const Vec& u) { return Vec(Vec::Zero(u.size())); },
                                  Vec::Zero(1), Vec::Ones(1)};
  const auto d = integrate_second_order(decay, 3.0, 600);
  for (const auto& p : d) {
    REQUIRE(std::abs(p.v(0) - std::exp(-p.t)) <= 1e-8);
    REQUIRE(std::abs(p.u(0) - (1.0 - std::exp(-p.t))) <= 1e-8);
  }

  SecondOrderSystem<double> rest{[](double) { return 2.0; },
                                 [](const Vec& u) { return Vec(Vec::Zero(u.size())); },
                                 Vec::Constant(2, 0.7), Vec::Zero(2)};
  for (const auto& p : integrate_second_order(rest, 1.0, 10)) REQUIRE(p.u == rest.u0);

  CHECK_THROWS_AS(integrate_second_order(osc, 1.0, 0), std::invalid_argument);
}

TEST_CASE("integrate_second_order reports divergence time") {
  SecondOrderSystem<double> blow{[](double) { return 0.0; },
                                 [](const Vec& u) { return Vec(-(u.array().square() * u.array()).matrix() * 1e30); },
                                 Vec::Constant(1, 10.0), Vec::Zero(1), 1.0};
  try {
    integrate_second_order(blow, 10.0, 10);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.time() > 1.0);
    CHECK(e.time() <= 11.0);
  }
}

TEST_CASE("damping schedule") {
  const DampingSchedule one{1.0};
  CHECK(damping_delta(1.0, one).delta == 0.0);
  const auto v = damping_delta(4.0, one);
  CHECK(v.delta == doctest::Approx(0.5));
  CHECK(v.rate == doctest::Approx(1.0 / 12.0));

  const double h = 0.1;
  for (int n = 1; n < 200; ++n) {
    REQUIRE(damping_delta(n * h, DampingSchedule{h}).delta ==
            doctest::Approx(momentum_coefficient(n, MomentumSchedule::n_minus_1_over_n_plus_2()))
                .epsilon(1e-14));
  }

  CHECK(ssa1_damping_coefficient(4.0, one) == doctest::Approx(1.0 / 6.0));
  CHECK(ssa1_damping_coefficient(1e6, one) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(ssa2_damping_coefficient(1e6, one) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(ssa1_damping_coefficient(1.001, one) < -1e3);
  CHECK_THROWS_AS(ssa1_damping_coefficient(1.0 + 1e-10, one), std::domain_error);
  CHECK_THROWS_AS(damping_delta(-1.0, one), std::invalid_argument);
}

TEST_CASE("ssa2 with unit momentum tracks the damped oscillator") {
  auto sup_error = [](double h) {
    const int n_steps = static_cast<int>(std::lround(5.0 / h));
    constexpr int kSub = 8;
    SecondOrderSystem<double> sys{[](double) { return 1.0; }, [](const Vec& u) { return Vec(u); },
                                  Vec::Ones(1), Vec::Zero(1)};
    const auto ref = integrate_second_order(sys, 5.0, n_steps * kSub);
    SplitHyperParams hp{h, 0.0};
    auto s = InertialState<double>::at_rest(Vec::Ones(1));
    double worst = 0.0;
    for (int n = 1; n <= n_steps; ++n) {
      s = ssa2_step(s, [](const Vec& u) { return Vec(u); }, hp, MomentumSchedule::constant(1.0));
      worst = std::max(worst, std::abs(s.u(0) - ref[static_cast<std::size_t>(n * kSub)].u(0)));
    }
    return worst;
  };
  const double e1 = sup_error(0.05), e2 = sup_error(0.025), e3 = sup_error(0.0125);
  CHECK(e2 < e1);
  CHECK(e3 < e2);
  CHECK(std::log2(e1 / e2) >= 0.8);
  CHECK(std::log2(e2 / e3) >= 0.8);
}
