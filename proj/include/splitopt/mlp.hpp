#pragma once

// Small multilayer perceptron with rectifier hidden layers and a
// log-softmax head, trained through a single flat parameter vector.

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace splitopt::nn {

using VectorXd = Eigen::VectorXd;
using MatrixXd = Eigen::MatrixXd;
using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// m samples as rows, plus one class index per row.
struct Batch {
  MatrixXd inputs;
  std::vector<int> targets;

  Eigen::Index size() const { return inputs.rows(); }
  void validate(Eigen::Index input_dim, int classes) const;
};

enum class LossKind { NllOnLogSoftmax, CrossEntropy };

VectorXd log_softmax(const VectorXd& x);
/// Row-wise log-softmax.
MatrixXd log_softmax_rows(const MatrixXd& x);

/// Mean of -log_probs(i, targets[i]).
double nll_loss(const MatrixXd& log_probs, std::span<const int> targets);
/// Fused log-sum-exp form of nll_loss(log_softmax_rows(logits), targets).
double cross_entropy_loss(const MatrixXd& logits, std::span<const int> targets);

struct LossAndGradient {
  double loss;
  VectorXd gradient;
};

struct Evaluation {
  double loss;
  double accuracy;
};

class MlpModel {
 public:
  /// sizes = {input, hidden..., classes}; at least {input, classes}.
  explicit MlpModel(std::vector<int> sizes);

  /// Weights and biases drawn uniformly from +-1/sqrt(fan_in).
  static MlpModel initialized(std::vector<int> sizes, std::uint64_t seed);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int classes() const { return sizes_.back(); }
  std::size_t layers() const { return sizes_.size() - 1; }
  Eigen::Index parameter_count() const { return theta_.size(); }

  const VectorXd& parameters() const { return theta_; }
  void set_parameters(const VectorXd& theta);

  /// Views into the flat parameter vector. Weight l is (sizes[l+1] x sizes[l]), row-major.
  Eigen::Map<const RowMatrixXd> weight(std::size_t l) const;
  Eigen::Map<const VectorXd> bias(std::size_t l) const;
  Eigen::Map<RowMatrixXd> weight(std::size_t l);
  Eigen::Map<VectorXd> bias(std::size_t l);

  MatrixXd logits(const MatrixXd& inputs) const;
  MatrixXd log_probabilities(const MatrixXd& inputs) const { return log_softmax_rows(logits(inputs)); }

  /// Loss and its gradient w.r.t. the flat parameters, mean-reduced over the batch.
  LossAndGradient forward_backward(const Batch& batch, LossKind loss) const;
  double loss(const Batch& batch, LossKind loss) const;
  Evaluation evaluate(const Batch& data, LossKind loss) const;

 private:
  std::vector<int> sizes_;
  std::vector<Eigen::Index> weight_offset_;
  std::vector<Eigen::Index> bias_offset_;
  VectorXd theta_;
};

/// Seeded shuffling of [0, N) into batches of at most m indices. Epoch e is
/// shuffled with seed + e.
class EpochIterator {
 public:
  EpochIterator(std::size_t n, std::size_t batch_size, std::uint64_t seed);

  std::vector<std::vector<std::size_t>> batches(std::size_t epoch) const;
  std::size_t batch_count() const { return (n_ + batch_size_ - 1) / batch_size_; }

 private:
  std::size_t n_;
  std::size_t batch_size_;
  std::uint64_t seed_;
};

inline constexpr double kMnistMean = 0.1307;
inline constexpr double kMnistStd = 0.3081;

double normalize(double x);
MatrixXd normalize(const MatrixXd& x);

}  // namespace splitopt::nn
