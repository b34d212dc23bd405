#ifndef ADFUSE_CLASSIFIER_HPP
#define ADFUSE_CLASSIFIER_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <numeric>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "adfuse/rng.hpp"
#include "adfuse/sketch.hpp"

namespace adfuse {

/// Linear softmax classifier: p = softmax(W x + b), W is C x D.
template <typename Scalar = double>
struct ClassifierModel {
  Matrix<Scalar> weights;
  Vector<Scalar> bias;
  std::vector<std::string> class_names;

  std::size_t num_classes() const noexcept { return static_cast<std::size_t>(weights.rows()); }
  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(weights.cols()); }

  friend bool operator==(const ClassifierModel& a, const ClassifierModel& b) {
    return a.class_names == b.class_names && a.weights.rows() == b.weights.rows() &&
           a.weights.cols() == b.weights.cols() && a.bias.size() == b.bias.size() &&
           a.weights == b.weights && a.bias == b.bias;
  }
};

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 50;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  double l2 = 0.0;

  void validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
      throw std::invalid_argument("learning rate must be finite and >= 0");
    }
    if (epochs == 0) throw std::invalid_argument("epochs must be positive");
    if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
    if (!(l2 >= 0.0) || !std::isfinite(l2)) throw std::invalid_argument("l2 must be >= 0");
  }
};

/// Labeled examples stored column-wise: features.col(i) has label labels[i].
template <typename Scalar = double>
struct LabeledSet {
  Matrix<Scalar> features;
  std::vector<std::size_t> labels;

  std::size_t size() const noexcept { return labels.size(); }
  bool empty() const noexcept { return labels.empty(); }

  static LabeledSet from_rows(const std::vector<Vector<Scalar>>& rows,
                              std::vector<std::size_t> labels) {
    if (rows.size() != labels.size()) {
      throw std::invalid_argument("feature and label counts differ");
    }
    LabeledSet set;
    set.labels = std::move(labels);
    const Eigen::Index dim = rows.empty() ? 0 : rows.front().size();
    set.features.resize(dim, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != dim) throw std::invalid_argument("inconsistent feature dims");
      set.features.col(static_cast<Eigen::Index>(i)) = rows[i];
    }
    return set;
  }
};

template <typename Scalar>
ClassifierModel<Scalar> init_model(std::size_t input_dim,
                                   std::vector<std::string> class_names,
                                   std::uint64_t seed) {
  if (input_dim == 0) throw std::invalid_argument("input dim must be positive");
  if (class_names.size() < 2) throw std::invalid_argument("need at least 2 classes");
  if (std::set<std::string>(class_names.begin(), class_names.end()).size() !=
      class_names.size()) {
    throw std::invalid_argument("duplicate class names");
  }
  const auto rows = static_cast<Eigen::Index>(class_names.size());
  const auto cols = static_cast<Eigen::Index>(input_dim);
  ClassifierModel<Scalar> m;
  m.weights.resize(rows, cols);
  SplitMix64 rng(seed);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m.weights(r, c) = static_cast<Scalar>(rng.uniform(-0.01, 0.01));
    }
  }
  m.bias = Vector<Scalar>::Zero(rows);
  m.class_names = std::move(class_names);
  return m;
}

namespace detail {

template <typename Scalar>
void check_input(const ClassifierModel<Scalar>& m, Eigen::Index dim) {
  if (dim != m.weights.cols()) {
    throw std::invalid_argument("classifier expects dim " +
                                std::to_string(m.weights.cols()) + ", got " +
                                std::to_string(dim));
  }
}

/// Column-wise softmax with max subtraction, in place.
template <typename Scalar>
void softmax_columns(Matrix<Scalar>& logits) {
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    auto col = logits.col(j);
    col.array() -= col.maxCoeff();
    col = col.array().exp().matrix();
    col /= col.sum();
  }
}

}  // namespace detail

template <typename Scalar, typename Derived>
Vector<Scalar> logits(const ClassifierModel<Scalar>& m, const Eigen::MatrixBase<Derived>& x) {
  detail::check_input(m, x.size());
  return m.weights * x + m.bias;
}

/// Class probabilities softmax(W x + b).
template <typename Scalar, typename Derived>
Vector<Scalar> forward(const ClassifierModel<Scalar>& m, const Eigen::MatrixBase<Derived>& x) {
  Matrix<Scalar> z = logits(m, x);
  detail::softmax_columns(z);
  return z.col(0);
}

/// First index of the maximum.
template <typename Derived>
std::size_t argmax(const Eigen::MatrixBase<Derived>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return static_cast<std::size_t>(best);
}

template <typename Scalar, typename Derived>
std::size_t predict(const ClassifierModel<Scalar>& m, const Eigen::MatrixBase<Derived>& x) {
  return argmax(logits(m, x));
}

template <typename Scalar>
struct LossGrad {
  Scalar loss{};
  Matrix<Scalar> grad_weights;
  Vector<Scalar> grad_bias;
};

/// Mean cross-entropy over the batch columns plus (l2/2) * ||W||_F^2, with
/// its exact gradient.
template <typename Scalar, typename Derived>
LossGrad<Scalar> loss_and_grad(const ClassifierModel<Scalar>& m,
                               const Eigen::MatrixBase<Derived>& batch,
                               std::span<const std::size_t> labels, Scalar l2) {
  if (labels.empty()) throw std::invalid_argument("empty batch");
  if (static_cast<std::size_t>(batch.cols()) != labels.size()) {
    throw std::invalid_argument("batch columns and labels differ in count");
  }
  detail::check_input(m, batch.rows());
  const auto n = static_cast<Eigen::Index>(labels.size());
  const auto classes = static_cast<std::size_t>(m.weights.rows());

  Matrix<Scalar> z = (m.weights * batch).colwise() + m.bias;
  Scalar ce(0);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto label = labels[static_cast<std::size_t>(j)];
    if (label >= classes) throw std::invalid_argument("label out of range");
    const Scalar peak = z.col(j).maxCoeff();
    const Scalar lse = peak + std::log((z.col(j).array() - peak).exp().sum());
    ce += lse - z(static_cast<Eigen::Index>(label), j);
  }

  detail::softmax_columns(z);
  for (Eigen::Index j = 0; j < n; ++j) {
    z(static_cast<Eigen::Index>(labels[static_cast<std::size_t>(j)]), j) -= Scalar(1);
  }
  z /= static_cast<Scalar>(n);

  LossGrad<Scalar> out;
  out.loss = ce / static_cast<Scalar>(n) + l2 / Scalar(2) * m.weights.squaredNorm();
  out.grad_weights = z * batch.transpose() + l2 * m.weights;
  out.grad_bias = z.rowwise().sum();
  return out;
}

template <typename Scalar>
struct TrainResult {
  ClassifierModel<Scalar> model;
  std::vector<double> epoch_loss;
};

/// Mini-batch SGD. The example order is reshuffled every epoch from one
/// SplitMix64(cfg.seed) stream; epoch_loss[e] is the size-weighted mean of the
/// batch losses seen during epoch e (pre-update values).
template <typename Scalar>
TrainResult<Scalar> train(ClassifierModel<Scalar> model, const LabeledSet<Scalar>& data,
                          const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw std::invalid_argument("empty training set");
  detail::check_input(model, data.features.rows());

  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(cfg.seed);
  const auto lr = static_cast<Scalar>(cfg.learning_rate);
  const auto l2 = static_cast<Scalar>(cfg.l2);

  TrainResult<Scalar> result;
  result.epoch_loss.reserve(cfg.epochs);
  Matrix<Scalar> batch;
  std::vector<std::size_t> batch_labels;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(std::span<std::size_t>(order), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      const auto size = static_cast<Eigen::Index>(stop - start);
      batch.resize(data.features.rows(), size);
      batch_labels.resize(stop - start);
      for (std::size_t i = start; i < stop; ++i) {
        batch.col(static_cast<Eigen::Index>(i - start)) =
            data.features.col(static_cast<Eigen::Index>(order[i]));
        batch_labels[i - start] = data.labels[order[i]];
      }
      const auto step = loss_and_grad(model, batch, std::span<const std::size_t>(batch_labels), l2);
      total += static_cast<double>(step.loss) * static_cast<double>(size);
      model.weights -= lr * step.grad_weights;
      model.bias -= lr * step.grad_bias;
    }
    result.epoch_loss.push_back(total / static_cast<double>(n));
  }
  result.model = std::move(model);
  return result;
}

struct Evaluation {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  /// confusion(i, j): examples of true class i predicted as j.
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> confusion;
};

template <typename Scalar>
Evaluation evaluate(const ClassifierModel<Scalar>& m, const LabeledSet<Scalar>& data) {
  if (data.empty()) throw std::invalid_argument("empty evaluation set");
  detail::check_input(m, data.features.rows());
  const auto classes = static_cast<Eigen::Index>(m.num_classes());
  Evaluation ev;
  ev.confusion.setZero(classes, classes);
  const Matrix<Scalar> z = (m.weights * data.features).colwise() + m.bias;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto truth = data.labels[i];
    if (truth >= m.num_classes()) throw std::invalid_argument("label out of range");
    const auto pred = argmax(z.col(static_cast<Eigen::Index>(i)));
    ++ev.confusion(static_cast<Eigen::Index>(truth), static_cast<Eigen::Index>(pred));
    if (pred == truth) ++ev.correct;
  }
  ev.total = data.size();
  ev.accuracy = static_cast<double>(ev.correct) / static_cast<double>(ev.total);
  return ev;
}

// Model text format: "C D", tab-separated class names, then C rows of
// D weights followed by the bias, 17 significant digits.
void write_model(std::ostream& out, const ClassifierModel<double>& m);
void write_model(const std::filesystem::path& path, const ClassifierModel<double>& m);
ClassifierModel<double> read_model(std::istream& in, const std::string& source = "<stream>");
ClassifierModel<double> read_model(const std::filesystem::path& path);

}  // namespace adfuse

#endif  // ADFUSE_CLASSIFIER_HPP
