#pragma once

// Operator splitting for linear systems X' = (A + B) X and a reference
// integrator for damped second-order gradient flows u'' + gamma(t) u' = -grad f(u).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "splitopt/optim_core.hpp"

namespace splitopt {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// e^M by scaling and squaring: M is scaled by 2^-s until its infinity norm
/// is at most 1/2, the Taylor series is summed until terms stop contributing,
/// and the result is squared s times.
template <typename Derived>
Matrix<typename Derived::Scalar> matrix_exp(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("matrix_exp: matrix must be square, got " +
                                std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  const Eigen::Index d = m.rows();
  if (!m.allFinite()) throw std::invalid_argument("matrix_exp: non-finite entry");

  const Scalar norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > Scalar(0.5)) {
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / Scalar(0.5)))));
  }
  const Matrix<Scalar> a = m / std::ldexp(Scalar(1), squarings);

  Matrix<Scalar> result = Matrix<Scalar>::Identity(d, d);
  Matrix<Scalar> term = Matrix<Scalar>::Identity(d, d);
  constexpr int kMaxTerms = 40;
  for (int j = 1; j <= kMaxTerms; ++j) {
    term = (term * a) / static_cast<Scalar>(j);
    result += term;
    if (term.cwiseAbs().maxCoeff() <=
        std::numeric_limits<Scalar>::epsilon() * result.cwiseAbs().maxCoeff() * Scalar(1e-3)) {
      break;
    }
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

/// Largest singular value via power iteration on M^T M.
/// The iteration runs on a normalized power (M^T M)^64, which separates
/// clustered singular values; the value is the Rayleigh quotient of M^T M.
template <typename Derived>
typename Derived::Scalar spectral_norm(const Eigen::MatrixBase<Derived>& m,
                                       typename Derived::Scalar tol = 1e-12,
                                       int max_iter = 10000) {
  using Scalar = typename Derived::Scalar;
  if (m.size() == 0) return Scalar(0);
  const Matrix<Scalar> gram = m.transpose() * m;
  const Scalar scale = gram.cwiseAbs().maxCoeff();
  if (scale == Scalar(0)) return Scalar(0);

  Matrix<Scalar> power = gram / scale;
  for (int i = 0; i < 6; ++i) {
    power = power * power;
    const Scalar s = power.cwiseAbs().maxCoeff();
    if (s == Scalar(0)) break;
    power /= s;
  }

  // Deterministic start with no zero components, so it is not orthogonal to
  // the dominant eigenvector for the small systems used here.
  Vector<Scalar> x(gram.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = Scalar(1) + Scalar(0.1) * Scalar(i);
  x.normalize();

  Scalar lambda = x.dot(gram * x);
  for (int it = 0; it < max_iter; ++it) {
    Vector<Scalar> y = power * x;
    const Scalar ny = y.norm();
    if (ny == Scalar(0)) break;
    x = y / ny;
    const Scalar next = x.dot(gram * x);
    const bool done = std::abs(next - lambda) <= tol * std::abs(next);
    lambda = next;
    if (done) break;
  }
  return std::sqrt(std::max(lambda, Scalar(0)));
}

template <typename Scalar = double>
struct LinearSplitSystem {
  Matrix<Scalar> a;
  Matrix<Scalar> b;

  LinearSplitSystem(Matrix<Scalar> a_in, Matrix<Scalar> b_in)
      : a(std::move(a_in)), b(std::move(b_in)) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
      throw std::invalid_argument("LinearSplitSystem: A and B must be square and of equal size");
    }
  }

  Eigen::Index dim() const { return a.rows(); }
  bool commutes(Scalar tol = Scalar(1e-14)) const {
    return (a * b - b * a).cwiseAbs().maxCoeff() <= tol;
  }
};

enum class SplitOrder { AFirst, BFirst };

/// One-step Lie propagator e^{Bh} e^{Ah} (A-subproblem first) or e^{Ah} e^{Bh}.
template <typename Scalar>
Matrix<Scalar> lie_propagator(const LinearSplitSystem<Scalar>& sys, Scalar h,
                              SplitOrder order = SplitOrder::AFirst) {
  const Matrix<Scalar> ea = matrix_exp(sys.a * h);
  const Matrix<Scalar> eb = matrix_exp(sys.b * h);
  return order == SplitOrder::AFirst ? Matrix<Scalar>(eb * ea) : Matrix<Scalar>(ea * eb);
}

/// Symmetric (Strang) propagator e^{Ah/2} e^{Bh} e^{Ah/2}. Supplementary:
/// only used for order comparisons against the Lie scheme.
template <typename Scalar>
Matrix<Scalar> strang_propagator(const LinearSplitSystem<Scalar>& sys, Scalar h) {
  const Matrix<Scalar> half_a = matrix_exp(sys.a * (h / Scalar(2)));
  return half_a * matrix_exp(sys.b * h) * half_a;
}

template <typename Scalar>
Vector<Scalar> lie_split_step(const LinearSplitSystem<Scalar>& sys, const Vector<Scalar>& x,
                              Scalar h, SplitOrder order = SplitOrder::AFirst) {
  detail::require_same_size(x.size(), sys.dim(), "state vs system");
  if (!(h >= Scalar(0))) throw std::invalid_argument("lie_split_step: h must be nonnegative");
  return lie_propagator(sys, h, order) * x;
}

template <typename Scalar>
Vector<Scalar> strang_split_step(const LinearSplitSystem<Scalar>& sys, const Vector<Scalar>& x,
                                 Scalar h) {
  detail::require_same_size(x.size(), sys.dim(), "state vs system");
  if (!(h >= Scalar(0))) throw std::invalid_argument("strang_split_step: h must be nonnegative");
  return strang_propagator(sys, h) * x;
}

/// || e^{(A+B)h} - e^{Ah} e^{Bh} ||_2
template <typename Scalar>
Scalar splitting_defect(const LinearSplitSystem<Scalar>& sys, Scalar h) {
  if (h < Scalar(0)) throw std::invalid_argument("splitting_defect: h must be nonnegative");
  const Matrix<Scalar> exact = matrix_exp((sys.a + sys.b) * h);
  return spectral_norm(exact - lie_propagator(sys, h, SplitOrder::BFirst));
}

enum class SplitScheme { Lie, Strang };

/// Error at time T of N composed splitting steps against the exact flow,
/// measured as the spectral norm of the propagator difference.
template <typename Scalar>
Scalar splitting_global_error(const LinearSplitSystem<Scalar>& sys, Scalar horizon, int steps,
                              SplitScheme scheme = SplitScheme::Lie) {
  if (steps < 1) throw std::invalid_argument("splitting_global_error: steps must be >= 1");
  const Scalar h = horizon / static_cast<Scalar>(steps);
  const Matrix<Scalar> one_step =
      scheme == SplitScheme::Lie ? lie_propagator(sys, h) : strang_propagator(sys, h);
  Matrix<Scalar> composed = Matrix<Scalar>::Identity(sys.dim(), sys.dim());
  for (int i = 0; i < steps; ++i) composed = one_step * composed;
  return spectral_norm(matrix_exp((sys.a + sys.b) * horizon) - composed);
}

/// delta(t) = (t - offset)/(t + 2 offset), the continuous counterpart of
/// beta_n = (n - 1)/(n + 2) when offset = h.
struct DampingSchedule {
  double offset = 0.1;
};

struct DampingValue {
  double delta;
  double rate;  // d delta / dt
};

inline DampingValue damping_delta(double t, const DampingSchedule& s) {
  if (t < 0.0) throw std::invalid_argument("damping_delta: t must be nonnegative");
  const double denom = t + 2.0 * s.offset;
  return {(t - s.offset) / denom, 3.0 * s.offset / (denom * denom)};
}

/// Damping delta(t) - 2 delta'(t)/delta(t) of the SSA1 dynamical system.
/// Singular at t = offset.
inline double ssa1_damping_coefficient(double t, const DampingSchedule& s) {
  if (std::abs(t - s.offset) <= 1e-9) {
    throw std::domain_error("ssa1_damping_coefficient: pole at t = offset (t = " +
                            std::to_string(t) + ")");
  }
  const auto [delta, rate] = damping_delta(t, s);
  return delta - 2.0 * rate / delta;
}

/// Damping delta(t) of the SSA2 dynamical system.
inline double ssa2_damping_coefficient(double t, const DampingSchedule& s) {
  return damping_delta(t, s).delta;
}

/// u'' + gamma(t) u' = -grad f(u), written as u' = v, v' = -gamma(t) v - grad f(u).
template <typename Scalar = double>
struct SecondOrderSystem {
  std::function<Scalar(Scalar)> damping;
  std::function<Vector<Scalar>(const Vector<Scalar>&)> gradient;
  Vector<Scalar> u0;
  Vector<Scalar> v0;
  Scalar t0 = Scalar(0);
};

template <typename Scalar = double>
struct TrajectoryPoint {
  Scalar t;
  Vector<Scalar> u;
  Vector<Scalar> v;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, double t) : std::runtime_error(what), time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Classical RK4 from t0 to t0 + horizon with a fixed number of steps.
/// Returns steps + 1 points including the initial state.
template <typename Scalar>
std::vector<TrajectoryPoint<Scalar>> integrate_second_order(const SecondOrderSystem<Scalar>& sys,
                                                            Scalar horizon, int steps) {
  if (steps < 1) throw std::invalid_argument("integrate_second_order: steps must be >= 1");
  if (!sys.damping || !sys.gradient)
    throw std::invalid_argument("integrate_second_order: damping and gradient are required");
  detail::require_same_size(sys.u0.size(), sys.v0.size(), "u0 vs v0");

  const Scalar dt = horizon / static_cast<Scalar>(steps);
  auto accel = [&](Scalar t, const Vector<Scalar>& u, const Vector<Scalar>& v) {
    return Vector<Scalar>(-sys.damping(t) * v - sys.gradient(u));
  };

  std::vector<TrajectoryPoint<Scalar>> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  Vector<Scalar> u = sys.u0;
  Vector<Scalar> v = sys.v0;
  out.push_back({sys.t0, u, v});
  for (int i = 0; i < steps; ++i) {
    const Scalar t = sys.t0 + dt * static_cast<Scalar>(i);
    const Vector<Scalar> k1u = v;
    const Vector<Scalar> k1v = accel(t, u, v);
    const Vector<Scalar> k2u = v + dt / 2 * k1v;
    const Vector<Scalar> k2v = accel(t + dt / 2, u + dt / 2 * k1u, k2u);
    const Vector<Scalar> k3u = v + dt / 2 * k2v;
    const Vector<Scalar> k3v = accel(t + dt / 2, u + dt / 2 * k2u, k3u);
    const Vector<Scalar> k4u = v + dt * k3v;
    const Vector<Scalar> k4v = accel(t + dt, u + dt * k3u, k4u);
    u += dt / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
    v += dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    const Scalar t_next = sys.t0 + dt * static_cast<Scalar>(i + 1);
    if (!u.allFinite() || !v.allFinite()) {
      throw DivergenceError("integrate_second_order: non-finite state at t = " +
                                std::to_string(static_cast<double>(t_next)),
                            static_cast<double>(t_next));
    }
    out.push_back({t_next, u, v});
  }
  return out;
}

}  // namespace splitopt
