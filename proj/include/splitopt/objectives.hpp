#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <utility>

namespace splitopt {

using VectorXd = Eigen::VectorXd;
using MatrixXd = Eigen::MatrixXd;

/// Differentiable test problem with an analytic gradient.
class Objective {
 public:
  using ValueFn = std::function<double(const VectorXd&)>;
  using GradientFn = std::function<VectorXd(const VectorXd&)>;

  Objective(Eigen::Index dim, ValueFn value, GradientFn gradient,
            std::optional<VectorXd> minimizer = std::nullopt,
            std::optional<double> lipschitz = std::nullopt);

  Eigen::Index dim() const { return dim_; }
  double value(const VectorXd& u) const;
  VectorXd gradient(const VectorXd& u) const;
  const std::optional<VectorXd>& minimizer() const { return minimizer_; }
  const std::optional<double>& lipschitz() const { return lipschitz_; }

  /// Callable returning the gradient; usable as an optimizer gradient oracle.
  auto gradient_oracle() const {
    return [this](const VectorXd& u) { return gradient(u); };
  }

 private:
  Eigen::Index dim_;
  ValueFn value_;
  GradientFn gradient_;
  std::optional<VectorXd> minimizer_;
  std::optional<double> lipschitz_;
};

/// f(u) = 1/2 u^T Q u - b^T u with Q symmetric positive definite.
Objective quadratic(const MatrixXd& q, const VectorXd& b);

/// Random SPD matrix with eigenvalues spread evenly over [lambda_min, lambda_max]
/// and a random orthogonal eigenbasis.
MatrixXd random_spd(Eigen::Index dim, double lambda_min, double lambda_max, unsigned seed);

struct ValueAndGradient {
  double value;
  VectorXd gradient;
};

/// (1 - x)^2 + 100 (y - x^2)^2
ValueAndGradient rosenbrock(const VectorXd& u);
Objective rosenbrock_objective();

/// Mean logistic loss log(1 + exp(-y w^T x)) over labels y in {-1, +1}, with
/// an L2 term (l2/2)|w|^2. Rows of `features` are samples.
Objective logistic_regression(MatrixXd features, VectorXd labels_pm1, double l2);

/// Central differences (f(u + s e_i) - f(u - s e_i)) / (2 s).
VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f, const VectorXd& u,
                     double step);

}  // namespace splitopt
