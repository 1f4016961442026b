#include "splitopt/objectives.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace splitopt {

Objective::Objective(Eigen::Index dim, ValueFn value, GradientFn gradient,
                     std::optional<VectorXd> minimizer, std::optional<double> lipschitz)
    : dim_(dim),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      minimizer_(std::move(minimizer)),
      lipschitz_(lipschitz) {
  if (dim_ < 1) throw std::invalid_argument("Objective: dimension must be positive");
  if (minimizer_ && minimizer_->size() != dim_)
    throw std::invalid_argument("Objective: minimizer has wrong dimension");
}

double Objective::value(const VectorXd& u) const {
  if (u.size() != dim_)
    throw std::invalid_argument("Objective::value: expected dimension " + std::to_string(dim_) +
                                ", got " + std::to_string(u.size()));
  return value_(u);
}

VectorXd Objective::gradient(const VectorXd& u) const {
  if (u.size() != dim_)
    throw std::invalid_argument("Objective::gradient: expected dimension " +
                                std::to_string(dim_) + ", got " + std::to_string(u.size()));
  return gradient_(u);
}

Objective quadratic(const MatrixXd& q, const VectorXd& b) {
  if (q.rows() != q.cols() || q.rows() != b.size())
    throw std::invalid_argument("quadratic: Q must be square and match b");
  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("quadratic: Q is not symmetric");
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(q, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument("quadratic: Q is not positive definite");

  const double lipschitz = eig.eigenvalues().maxCoeff();
  VectorXd minimizer = q.ldlt().solve(b);
  return Objective(
      q.rows(), [q, b](const VectorXd& u) { return 0.5 * u.dot(q * u) - b.dot(u); },
      [q, b](const VectorXd& u) { return VectorXd(q * u - b); }, std::move(minimizer), lipschitz);
}

MatrixXd random_spd(Eigen::Index dim, double lambda_min, double lambda_max, unsigned seed) {
  if (dim < 1 || !(lambda_min > 0.0) || lambda_max < lambda_min)
    throw std::invalid_argument("random_spd: need dim >= 1 and 0 < lambda_min <= lambda_max");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd g(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j)
    for (Eigen::Index i = 0; i < dim; ++i) g(i, j) = normal(rng);
  const MatrixXd basis = Eigen::HouseholderQR<MatrixXd>(g).householderQ();
  VectorXd spectrum(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    spectrum(i) = dim == 1 ? lambda_min
                           : lambda_min + (lambda_max - lambda_min) * static_cast<double>(i) /
                                              static_cast<double>(dim - 1);
  }
  MatrixXd q = basis * spectrum.asDiagonal() * basis.transpose();
  return 0.5 * (q + q.transpose());
}

ValueAndGradient rosenbrock(const VectorXd& u) {
  if (u.size() != 2) throw std::invalid_argument("rosenbrock: expects a 2-vector");
  const double x = u(0);
  const double y = u(1);
  const double r = y - x * x;
  VectorXd g(2);
  g << -2.0 * (1.0 - x) - 400.0 * x * r, 200.0 * r;
  return {(1.0 - x) * (1.0 - x) + 100.0 * r * r, std::move(g)};
}

Objective rosenbrock_objective() {
  return Objective(
      2, [](const VectorXd& u) { return rosenbrock(u).value; },
      [](const VectorXd& u) { return rosenbrock(u).gradient; }, VectorXd::Ones(2));
}

namespace {

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Objective logistic_regression(MatrixXd features, VectorXd labels_pm1, double l2) {
  if (features.rows() != labels_pm1.size() || features.rows() == 0)
    throw std::invalid_argument("logistic_regression: features and labels disagree");
  if (l2 < 0.0) throw std::invalid_argument("logistic_regression: l2 must be nonnegative");
  const auto m = static_cast<double>(features.rows());
  // Hessian is bounded by X^T X / (4m) + l2 I.
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(features.transpose() * features / (4.0 * m),
                                              Eigen::EigenvaluesOnly);
  const double lipschitz = eig.eigenvalues().maxCoeff() + l2;
  const Eigen::Index dim = features.cols();

  auto value = [features, labels_pm1, l2, m](const VectorXd& w) {
    const VectorXd margins = labels_pm1.cwiseProduct(features * w);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < margins.size(); ++i) loss += softplus(-margins(i));
    return loss / m + 0.5 * l2 * w.squaredNorm();
  };
  auto gradient = [features, labels_pm1, l2, m](const VectorXd& w) {
    const VectorXd margins = labels_pm1.cwiseProduct(features * w);
    VectorXd coeff(margins.size());
    for (Eigen::Index i = 0; i < margins.size(); ++i)
      coeff(i) = -labels_pm1(i) * sigmoid(-margins(i));
    return VectorXd(features.transpose() * coeff / m + l2 * w);
  };
  return Objective(dim, std::move(value), std::move(gradient), std::nullopt, lipschitz);
}

VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f, const VectorXd& u,
                     double step) {
  if (!(step > 0.0)) throw std::invalid_argument("fd_gradient: step must be positive");
  VectorXd g(u.size());
  VectorXd probe = u;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    probe(i) = u(i) + step;
    const double fp = f(probe);
    probe(i) = u(i) - step;
    const double fm = f(probe);
    probe(i) = u(i);
    g(i) = (fp - fm) / (2.0 * step);
  }
  return g;
}

}  // namespace splitopt
