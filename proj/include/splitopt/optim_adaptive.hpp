#pragma once

// Adaptive learning-rate optimizers: Adagrad, Adadelta, RMSProp, Adam and the
// adaptive splitting optimizer SSA1-Ada. All accumulators are componentwise.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <utility>

#include "splitopt/optim_core.hpp"

namespace splitopt {

struct AdaptiveHyperParams {
  double h = 1.0;
  double rho = 0.9;  // running-average decay (gamma)
  double eps = 1e-6;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double k = 2.0;

  void validate() const {
    if (!(h > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("decay rate must lie in (0, 1)");
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
      throw std::invalid_argument("Adam decay rates must lie in (0, 1)");
    if (!(k >= 0.0)) throw std::invalid_argument("exponent k must be nonnegative");
  }

  static AdaptiveHyperParams adagrad(double h = 0.001) { return {h, 0.9, 1e-8, 0.9, 0.999, 2.0}; }
  static AdaptiveHyperParams adadelta(double h = 1.0) { return {h, 0.9, 1e-6, 0.9, 0.999, 2.0}; }
  static AdaptiveHyperParams rmsprop(double h = 0.001) { return {h, 0.9, 1e-8, 0.9, 0.999, 2.0}; }
  static AdaptiveHyperParams adam(double h = 0.001) { return {h, 0.9, 1e-8, 0.9, 0.999, 2.0}; }
  static AdaptiveHyperParams ssa1_ada(double h = 1.0) { return {h, 0.9, 1e-6, 0.9, 0.999, 2.0}; }
};

template <typename Scalar = double>
struct AdaptiveState {
  Vector<Scalar> theta;
  Vector<Scalar> v;              // SSA1-Ada velocity
  Vector<Scalar> acc_grad_sq;    // E[g^2]; Adam second moment
  Vector<Scalar> acc_update_sq;  // E[delta^2]
  Vector<Scalar> mom;            // Adam first moment
  Vector<Scalar> z;              // SSA1-Ada auxiliary point
  Index n = 0;

  static AdaptiveState zeros(Vector<Scalar> theta0) {
    const auto d = theta0.size();
    AdaptiveState s;
    s.v = Vector<Scalar>::Zero(d);
    s.acc_grad_sq = Vector<Scalar>::Zero(d);
    s.acc_update_sq = Vector<Scalar>::Zero(d);
    s.mom = Vector<Scalar>::Zero(d);
    s.z = theta0;
    s.theta = std::move(theta0);
    return s;
  }
};

enum class Ssa1AdaVariant {
  AsWritten,  // accumulate at the previous auxiliary point, update at the new one
  ZFirst,     // compute the new auxiliary point first; one gradient per step
};

namespace detail {

template <typename Scalar>
void require_adaptive_shape(const AdaptiveState<Scalar>& s, Eigen::Index grad_size) {
  const auto d = s.theta.size();
  require_same_size(d, grad_size, "theta vs grad");
  require_same_size(d, s.acc_grad_sq.size(), "theta vs E[g^2]");
  require_same_size(d, s.acc_update_sq.size(), "theta vs E[delta^2]");
  require_same_size(d, s.mom.size(), "theta vs first moment");
  require_same_size(d, s.v.size(), "theta vs v");
}

template <typename Scalar>
void accumulate(Vector<Scalar>& acc, const Vector<Scalar>& x, Scalar rho) {
  acc = rho * acc + (Scalar(1) - rho) * x.cwiseAbs2();
}

}  // namespace detail

template <typename Scalar>
AdaptiveState<Scalar> adagrad_step(AdaptiveState<Scalar> s, const Vector<Scalar>& grad,
                                   const AdaptiveHyperParams& hp) {
  detail::require_adaptive_shape(s, grad.size());
  const auto h = static_cast<Scalar>(hp.h);
  const auto eps = static_cast<Scalar>(hp.eps);
  s.acc_grad_sq += grad.cwiseAbs2();
  s.theta.array() -= h * grad.array() / (s.acc_grad_sq.array().sqrt() + eps);
  ++s.n;
  return s;
}

/// Adadelta with an outer learning-rate multiplier h (1.0 recovers the
/// original rule). The numerator uses E[delta^2] from the previous step.
template <typename Scalar>
AdaptiveState<Scalar> adadelta_step(AdaptiveState<Scalar> s, const Vector<Scalar>& grad,
                                    const AdaptiveHyperParams& hp) {
  detail::require_adaptive_shape(s, grad.size());
  const auto h = static_cast<Scalar>(hp.h);
  const auto rho = static_cast<Scalar>(hp.rho);
  const auto eps = static_cast<Scalar>(hp.eps);
  detail::accumulate(s.acc_grad_sq, grad, rho);
  const Vector<Scalar> delta = -((s.acc_update_sq.array() + eps).sqrt() /
                                 (s.acc_grad_sq.array() + eps).sqrt() * grad.array())
                                    .matrix();
  detail::accumulate(s.acc_update_sq, delta, rho);
  s.theta += h * delta;
  ++s.n;
  return s;
}

template <typename Scalar>
AdaptiveState<Scalar> rmsprop_step(AdaptiveState<Scalar> s, const Vector<Scalar>& grad,
                                   const AdaptiveHyperParams& hp) {
  detail::require_adaptive_shape(s, grad.size());
  const auto h = static_cast<Scalar>(hp.h);
  const auto rho = static_cast<Scalar>(hp.rho);
  const auto eps = static_cast<Scalar>(hp.eps);
  detail::accumulate(s.acc_grad_sq, grad, rho);
  s.theta.array() -= h * grad.array() / (s.acc_grad_sq.array() + eps).sqrt();
  ++s.n;
  return s;
}

/// Adam. Uses `mom` for the first moment and `acc_grad_sq` for the second; n is
/// incremented before the bias correction so the first step runs with n = 1.
template <typename Scalar>
AdaptiveState<Scalar> adam_step(AdaptiveState<Scalar> s, const Vector<Scalar>& grad,
                                const AdaptiveHyperParams& hp) {
  detail::require_adaptive_shape(s, grad.size());
  const auto h = static_cast<Scalar>(hp.h);
  const auto b1 = static_cast<Scalar>(hp.beta1);
  const auto b2 = static_cast<Scalar>(hp.beta2);
  const auto eps = static_cast<Scalar>(hp.eps);
  ++s.n;
  s.mom = b1 * s.mom + (Scalar(1) - b1) * grad;
  s.acc_grad_sq = b2 * s.acc_grad_sq + (Scalar(1) - b2) * grad.cwiseAbs2();
  const auto nn = static_cast<Scalar>(s.n);
  const Vector<Scalar> m_hat = s.mom / (Scalar(1) - std::pow(b1, nn));
  const Vector<Scalar> v_hat = s.acc_grad_sq / (Scalar(1) - std::pow(b2, nn));
  s.theta.array() -= h * m_hat.array() / (v_hat.array().sqrt() + eps);
  return s;
}

namespace detail {

/// Default RMS[delta z]_{n-1}: sqrt(E[delta z^2]_{n-1} + eps). With zero
/// accumulators this is sqrt(eps).
struct PreviousUpdateRms {
  template <typename Scalar>
  Vector<Scalar> operator()(const Vector<Scalar>& acc_update_sq, const Vector<Scalar>& /*rms_grad*/,
                            Scalar eps) const {
    return (acc_update_sq.array() + eps).sqrt().matrix();
  }
};

/// SSA1-Ada with a pluggable source for RMS[delta z]_{n-1}.
template <typename Scalar, typename GradFn, typename PrevRms>
AdaptiveState<Scalar> ssa1_ada_step_with(AdaptiveState<Scalar> s, GradFn& grad_fn,
                                         const AdaptiveHyperParams& hp,
                                         const MomentumSchedule& schedule, Ssa1AdaVariant variant,
                                         PrevRms&& prev_rms) {
  const auto h = static_cast<Scalar>(hp.h);
  const auto rho = static_cast<Scalar>(hp.rho);
  const auto eps = static_cast<Scalar>(hp.eps);
  const auto d = s.theta.size();
  require_same_size(d, s.z.size(), "theta vs z");
  require_adaptive_shape(s, d);

  const Scalar beta = momentum_coefficient<Scalar>(s.n, schedule);
  const Scalar boost = std::pow(beta, static_cast<Scalar>(hp.k));
  const Vector<Scalar> z_next = s.theta + h * beta * s.v;

  Vector<Scalar> g_acc;
  Vector<Scalar> g_next;
  if (variant == Ssa1AdaVariant::AsWritten) {
    g_acc = checked_gradient<Scalar>(grad_fn, s.z);
    g_next = checked_gradient<Scalar>(grad_fn, z_next);
  } else {
    g_next = checked_gradient<Scalar>(grad_fn, z_next);
    g_acc = g_next;
  }

  accumulate(s.acc_grad_sq, g_acc, rho);
  const Vector<Scalar> rms_grad = (s.acc_grad_sq.array() + eps).sqrt().matrix();
  const Vector<Scalar> rms_prev = prev_rms(s.acc_update_sq, rms_grad, eps);
  const Eigen::Array<Scalar, Eigen::Dynamic, 1> h_n = h * rms_prev.array() / rms_grad.array();
  const Vector<Scalar> dz = (-h_n * g_acc.array()).matrix();
  accumulate(s.acc_update_sq, dz, rho);

  const auto damp = Scalar(1) - h_n * beta;
  const Vector<Scalar> theta_next =
      (s.theta.array() + beta * damp * (z_next - s.theta).array() -
       h_n.square() * g_next.array())
          .matrix();
  s.v = (boost * (damp * s.v.array() - h_n * g_next.array())).matrix();
  s.theta = theta_next;
  s.z = z_next;
  ++s.n;
  return s;
}

}  // namespace detail

/// Adaptive SSA1. Per step: beta_n, E[g^2] accumulated at the evaluation
/// point, h_n = h RMS[dz]_{n-1} / RMS[g]_n (componentwise), E[dz^2] update,
/// z' = theta + h beta v, then the SSA1 velocity/parameter updates with h_n.
template <typename Scalar, typename GradFn>
  requires GradientOracle<GradFn, Scalar>
AdaptiveState<Scalar> ssa1_ada_step(AdaptiveState<Scalar> s, GradFn&& grad_fn,
                                    const AdaptiveHyperParams& hp,
                                    const MomentumSchedule& schedule,
                                    Ssa1AdaVariant variant = Ssa1AdaVariant::AsWritten) {
  return detail::ssa1_ada_step_with(std::move(s), grad_fn, hp, schedule, variant,
                                    detail::PreviousUpdateRms{});
}

}  // namespace splitopt
