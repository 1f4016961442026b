#include "splitopt/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace splitopt::nn {

void Batch::validate(Eigen::Index input_dim, int classes) const {
  if (inputs.rows() == 0) throw std::invalid_argument("batch is empty");
  if (inputs.cols() != input_dim)
    throw std::invalid_argument("batch has " + std::to_string(inputs.cols()) +
                                " features, model expects " + std::to_string(input_dim));
  if (static_cast<Eigen::Index>(targets.size()) != inputs.rows())
    throw std::invalid_argument("batch has " + std::to_string(inputs.rows()) + " rows but " +
                                std::to_string(targets.size()) + " targets");
  for (int t : targets)
    if (t < 0 || t >= classes)
      throw std::out_of_range("target " + std::to_string(t) + " outside [0, " +
                              std::to_string(classes) + ")");
}

VectorXd log_softmax(const VectorXd& x) {
  const double shift = x.maxCoeff();
  const double lse = shift + std::log((x.array() - shift).exp().sum());
  return (x.array() - lse).matrix();
}

MatrixXd log_softmax_rows(const MatrixXd& x) {
  const VectorXd shift = x.rowwise().maxCoeff();
  MatrixXd shifted = x.colwise() - shift;
  const VectorXd log_norm = shifted.array().exp().rowwise().sum().log().matrix();
  shifted.colwise() -= log_norm;
  return shifted;
}

namespace {

void check_targets(Eigen::Index rows, Eigen::Index classes, std::span<const int> targets) {
  if (rows == 0) throw std::invalid_argument("loss of an empty batch");
  if (static_cast<Eigen::Index>(targets.size()) != rows)
    throw std::invalid_argument("loss: " + std::to_string(rows) + " rows but " +
                                std::to_string(targets.size()) + " targets");
  for (int t : targets)
    if (t < 0 || t >= classes)
      throw std::out_of_range("target " + std::to_string(t) + " outside [0, " +
                              std::to_string(classes) + ")");
}

}  // namespace

double nll_loss(const MatrixXd& log_probs, std::span<const int> targets) {
  check_targets(log_probs.rows(), log_probs.cols(), targets);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < log_probs.rows(); ++i) sum -= log_probs(i, targets[i]);
  return sum / static_cast<double>(log_probs.rows());
}

double cross_entropy_loss(const MatrixXd& logits, std::span<const int> targets) {
  check_targets(logits.rows(), logits.cols(), targets);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double shift = logits.row(i).maxCoeff();
    const double lse = shift + std::log((logits.row(i).array() - shift).exp().sum());
    sum += lse - logits(i, targets[i]);
  }
  return sum / static_cast<double>(logits.rows());
}

MlpModel::MlpModel(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("MlpModel: need input and output sizes");
  for (int s : sizes_)
    if (s < 1) throw std::invalid_argument("MlpModel: layer sizes must be positive");
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    weight_offset_.push_back(offset);
    offset += static_cast<Eigen::Index>(sizes_[l]) * sizes_[l + 1];
    bias_offset_.push_back(offset);
    offset += sizes_[l + 1];
  }
  theta_ = VectorXd::Zero(offset);
}

MlpModel MlpModel::initialized(std::vector<int> sizes, std::uint64_t seed) {
  MlpModel model(std::move(sizes));
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < model.layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(model.sizes_[l]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto w = model.weight(l);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = dist(rng);
    auto b = model.bias(l);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = dist(rng);
  }
  return model;
}

void MlpModel::set_parameters(const VectorXd& theta) {
  if (theta.size() != theta_.size())
    throw std::invalid_argument("set_parameters: expected " + std::to_string(theta_.size()) +
                                " parameters, got " + std::to_string(theta.size()));
  theta_ = theta;
}

Eigen::Map<const RowMatrixXd> MlpModel::weight(std::size_t l) const {
  return {theta_.data() + weight_offset_.at(l), sizes_[l + 1], sizes_[l]};
}
Eigen::Map<const VectorXd> MlpModel::bias(std::size_t l) const {
  return {theta_.data() + bias_offset_.at(l), sizes_[l + 1]};
}
Eigen::Map<RowMatrixXd> MlpModel::weight(std::size_t l) {
  return {theta_.data() + weight_offset_.at(l), sizes_[l + 1], sizes_[l]};
}
Eigen::Map<VectorXd> MlpModel::bias(std::size_t l) {
  return {theta_.data() + bias_offset_.at(l), sizes_[l + 1]};
}

MatrixXd MlpModel::logits(const MatrixXd& inputs) const {
  if (inputs.cols() != input_dim())
    throw std::invalid_argument("logits: input has " + std::to_string(inputs.cols()) +
                                " columns, model expects " + std::to_string(input_dim()));
  MatrixXd a = inputs;
  for (std::size_t l = 0; l < layers(); ++l) {
    MatrixXd z = a * weight(l).transpose();
    z.rowwise() += bias(l).transpose();
    if (l + 1 < layers()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

LossAndGradient MlpModel::forward_backward(const Batch& batch, LossKind loss) const {
  batch.validate(input_dim(), classes());
  const auto m = static_cast<double>(batch.size());

  // Pre-activations z_l and activations a_l; a_0 is the input.
  std::vector<MatrixXd> acts;
  std::vector<MatrixXd> pre;
  acts.reserve(layers() + 1);
  pre.reserve(layers());
  acts.push_back(batch.inputs);
  for (std::size_t l = 0; l < layers(); ++l) {
    MatrixXd z = acts.back() * weight(l).transpose();
    z.rowwise() += bias(l).transpose();
    pre.push_back(z);
    acts.push_back(l + 1 < layers() ? MatrixXd(z.cwiseMax(0.0)) : z);
  }

  const MatrixXd& out = acts.back();
  const MatrixXd log_probs = log_softmax_rows(out);
  const double value = loss == LossKind::CrossEntropy ? cross_entropy_loss(out, batch.targets)
                                                      : nll_loss(log_probs, batch.targets);

  // d loss / d logits = (softmax - onehot) / m for both loss kinds.
  MatrixXd delta = log_probs.array().exp().matrix();
  for (Eigen::Index i = 0; i < delta.rows(); ++i) delta(i, batch.targets[i]) -= 1.0;
  delta /= m;

  VectorXd grad = VectorXd::Zero(theta_.size());
  for (std::size_t l = layers(); l-- > 0;) {
    Eigen::Map<RowMatrixXd> dw(grad.data() + weight_offset_[l], sizes_[l + 1], sizes_[l]);
    Eigen::Map<VectorXd> db(grad.data() + bias_offset_[l], sizes_[l + 1]);
    dw = delta.transpose() * acts[l];
    db = delta.colwise().sum().transpose();
    if (l > 0) {
      MatrixXd back = delta * weight(l);
      // Rectifier derivative is 0 at 0.
      back.array() *= (pre[l - 1].array() > 0.0).cast<double>();
      delta = std::move(back);
    }
  }
  return {value, std::move(grad)};
}

double MlpModel::loss(const Batch& batch, LossKind kind) const {
  batch.validate(input_dim(), classes());
  const MatrixXd out = logits(batch.inputs);
  return kind == LossKind::CrossEntropy ? cross_entropy_loss(out, batch.targets)
                                        : nll_loss(log_softmax_rows(out), batch.targets);
}

Evaluation MlpModel::evaluate(const Batch& data, LossKind kind) const {
  data.validate(input_dim(), classes());
  const MatrixXd out = logits(data.inputs);
  const double value = kind == LossKind::CrossEntropy
                           ? cross_entropy_loss(out, data.targets)
                           : nll_loss(log_softmax_rows(out), data.targets);
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    Eigen::Index arg = 0;
    out.row(i).maxCoeff(&arg);
    if (arg == data.targets[static_cast<std::size_t>(i)]) ++correct;
  }
  return {value, static_cast<double>(correct) / static_cast<double>(out.rows())};
}

EpochIterator::EpochIterator(std::size_t n, std::size_t batch_size, std::uint64_t seed)
    : n_(n), batch_size_(batch_size), seed_(seed) {
  if (n_ < 1) throw std::invalid_argument("EpochIterator: dataset size must be >= 1");
  if (batch_size_ < 1) throw std::invalid_argument("EpochIterator: batch size must be >= 1");
}

std::vector<std::vector<std::size_t>> EpochIterator::batches(std::size_t epoch) const {
  std::vector<std::size_t> order(n_);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed_ + epoch);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::vector<std::size_t>> out;
  out.reserve(batch_count());
  for (std::size_t start = 0; start < n_; start += batch_size_) {
    const std::size_t stop = std::min(n_, start + batch_size_);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return out;
}

double normalize(double x) { return (x - kMnistMean) / kMnistStd; }

MatrixXd normalize(const MatrixXd& x) { return ((x.array() - kMnistMean) / kMnistStd).matrix(); }

}  // namespace splitopt::nn
