#pragma once

// Single-step update rules for the non-adaptive optimizers: gradient descent,
// mini-batch SGD, Polyak heavy ball, Nesterov (two-sequence and velocity
// forms) and the two sequential-splitting methods SSA1 / SSA2.
//
// Every step takes the state by value and returns the advanced state. The
// gradient oracle is any callable `Vector<Scalar>(const Vector<Scalar>&)` and
// is invoked exactly once per step.

#include <Eigen/Dense>

#include <cmath>
#include <concepts>
#include <stdexcept>
#include <string>
#include <utility>

#include "splitopt/schedule.hpp"

namespace splitopt {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename F, typename Scalar>
concept GradientOracle = std::invocable<F&, const Vector<Scalar>&> &&
    std::convertible_to<std::invoke_result_t<F&, const Vector<Scalar>&>, Vector<Scalar>>;

namespace detail {

inline void require_same_size(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string("dimension mismatch: ") + what + " (" +
                                std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

template <typename Scalar, typename F>
Vector<Scalar> checked_gradient(F& grad_fn, const Vector<Scalar>& at) {
  Vector<Scalar> g = grad_fn(at);
  require_same_size(g.size(), at.size(), "gradient vs parameters");
  return g;
}

}  // namespace detail

/// Position u_n, velocity v_n and previous position u_{n-1} of an inertial
/// method. An empty v or u_prev means that slot is not populated.
template <typename Scalar = double>
struct InertialState {
  Vector<Scalar> u;
  Vector<Scalar> v;
  Vector<Scalar> u_prev;
  Index n = 0;

  /// Zero initial velocity and u_{-1} = u_0, so both forms start at rest.
  static InertialState at_rest(Vector<Scalar> u0) {
    InertialState s;
    s.v = Vector<Scalar>::Zero(u0.size());
    s.u_prev = u0;
    s.u = std::move(u0);
    return s;
  }

  bool has_velocity() const { return v.size() == u.size(); }
  bool has_previous() const { return u_prev.size() == u.size(); }
};

enum class NesterovForm { TwoSequence, Velocity };

/// Which arithmetic ssa1_step uses for the parameter update.
enum class Ssa1Update {
  Equation,        // u + beta (1 - h beta)(y - u) - h^2 g(y), i.e. the h beta^2 (1 - h beta) v term
  PseudocodeCompat // u + h (1 - h beta) v - h^2 g(y), as printed in the SSA1 pseudocode
};

template <typename Scalar>
Vector<Scalar> gd_step(const Vector<Scalar>& u, const Vector<Scalar>& grad, Scalar h) {
  detail::require_same_size(u.size(), grad.size(), "u vs grad");
  return u - h * grad;
}

/// Same arithmetic as gd_step; `grad_batch` is the loss gradient on one mini-batch.
template <typename Scalar>
Vector<Scalar> minibatch_sgd_step(const Vector<Scalar>& theta, const Vector<Scalar>& grad_batch,
                                  Scalar h) {
  detail::require_same_size(theta.size(), grad_batch.size(), "theta vs batch gradient");
  return theta - h * grad_batch;
}

/// Heavy ball with coefficients (alpha_n, beta_n); gradient taken at u_n.
template <typename Scalar>
InertialState<Scalar> polyak_step(InertialState<Scalar> state, const Vector<Scalar>& grad_at_u,
                                  Scalar alpha, Scalar beta) {
  if (!state.has_previous()) throw std::invalid_argument("polyak_step: u_prev not populated");
  detail::require_same_size(state.u.size(), grad_at_u.size(), "u vs grad");
  Vector<Scalar> y = state.u + alpha * (state.u - state.u_prev);
  Vector<Scalar> next = y - beta * grad_at_u;
  state.u_prev = std::move(state.u);
  state.u = std::move(next);
  ++state.n;
  return state;
}

/// Step size 2 (1 - alpha) c / L from the coercive heavy-ball analysis.
template <typename Scalar = double>
Scalar sun_stepsize(Scalar alpha, Scalar c, Scalar lipschitz) {
  if (!(alpha >= Scalar(0) && alpha < Scalar(1)))
    throw std::invalid_argument("sun_stepsize: alpha must lie in [0, 1)");
  if (!(c > Scalar(0) && c < Scalar(1)))
    throw std::invalid_argument("sun_stepsize: c must lie in (0, 1)");
  if (!(lipschitz > Scalar(0))) throw std::invalid_argument("sun_stepsize: L must be positive");
  return Scalar(2) * (Scalar(1) - alpha) * c / lipschitz;
}

/// Nesterov with s = h^2. The velocity form keeps h v_n = u_n - u_{n-1}, so
/// both forms populate u_prev and v after the step.
template <typename Scalar, typename GradFn>
  requires GradientOracle<GradFn, Scalar>
InertialState<Scalar> nesterov_step(InertialState<Scalar> state, GradFn&& grad_fn, Scalar h,
                                    const MomentumSchedule& schedule, NesterovForm form) {
  const Scalar beta = momentum_coefficient<Scalar>(state.n, schedule);
  if (form == NesterovForm::Velocity) {
    if (!state.has_velocity()) throw std::invalid_argument("nesterov_step: v not populated");
    Vector<Scalar> y = state.u + h * beta * state.v;
    const Vector<Scalar> g = detail::checked_gradient<Scalar>(grad_fn, y);
    state.v = beta * state.v - h * g;
    state.u_prev = state.u;
    state.u += h * state.v;
  } else {
    if (!state.has_previous()) throw std::invalid_argument("nesterov_step: u_prev not populated");
    Vector<Scalar> y = state.u + beta * (state.u - state.u_prev);
    const Vector<Scalar> g = detail::checked_gradient<Scalar>(grad_fn, y);
    Vector<Scalar> next = y - h * h * g;
    state.v = (next - state.u) / h;
    state.u_prev = std::move(state.u);
    state.u = std::move(next);
  }
  ++state.n;
  return state;
}

/// First sequential-splitting optimizer (SSA1).
///
///   y     = u + h b v
///   v'    = b^k ((1 - h b) v - h g(y))
///   u'    = u + b (1 - h b)(y - u) - h^2 g(y)
template <typename Scalar, typename GradFn>
  requires GradientOracle<GradFn, Scalar>
InertialState<Scalar> ssa1_step(InertialState<Scalar> state, GradFn&& grad_fn,
                                const SplitHyperParams& hp, const MomentumSchedule& schedule,
                                Ssa1Update update = Ssa1Update::Equation) {
  if (!state.has_velocity()) throw std::invalid_argument("ssa1_step: v not populated");
  const Scalar h = static_cast<Scalar>(hp.h);
  const Scalar beta = momentum_coefficient<Scalar>(state.n, schedule);
  const Scalar boost = std::pow(beta, static_cast<Scalar>(hp.k_at(state.n)));
  const Scalar damp = Scalar(1) - h * beta;

  const Vector<Scalar> y = state.u + h * beta * state.v;
  const Vector<Scalar> g = detail::checked_gradient<Scalar>(grad_fn, y);

  Vector<Scalar> next;
  if (update == Ssa1Update::Equation) {
    next = state.u + beta * damp * (y - state.u) - h * h * g;
  } else {
    next = state.u + h * damp * state.v - h * h * g;
  }
  state.v = boost * (damp * state.v - h * g);
  state.u_prev = std::move(state.u);
  state.u = std::move(next);
  ++state.n;
  return state;
}

/// Second sequential-splitting optimizer (SSA2). The position update
/// u + ((1 - h b)/b)(y - u) is evaluated as u + h (1 - h b) v, which is the
/// same quantity without the 1/b pole at b = 0.
template <typename Scalar, typename GradFn>
  requires GradientOracle<GradFn, Scalar>
InertialState<Scalar> ssa2_step(InertialState<Scalar> state, GradFn&& grad_fn,
                                const SplitHyperParams& hp, const MomentumSchedule& schedule) {
  if (!state.has_velocity()) throw std::invalid_argument("ssa2_step: v not populated");
  const Scalar h = static_cast<Scalar>(hp.h);
  const Scalar beta = momentum_coefficient<Scalar>(state.n, schedule);
  const Scalar boost = std::pow(beta, static_cast<Scalar>(hp.k_at(state.n)));
  const Scalar damp = Scalar(1) - h * beta;

  const Vector<Scalar> y = state.u + h * beta * state.v;
  const Vector<Scalar> g = detail::checked_gradient<Scalar>(grad_fn, y);

  Vector<Scalar> next = state.u + h * damp * state.v;
  state.v = boost * (damp * state.v - h * g);
  state.u_prev = std::move(state.u);
  state.u = std::move(next);
  ++state.n;
  return state;
}

}  // namespace splitopt
