#pragma once

// Binary logistic regression fit by maximum likelihood: full-batch gradient
// descent on the (weighted) mean cross-entropy, zero initialization.

#include <cstddef>
#include <span>
#include <vector>

#include "hitpredict/learners/config.hpp"
#include "hitpredict/learners/math.hpp"
#include "hitpredict/matrix.hpp"

namespace hitpredict {

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  double final_loss = 0.0;

  double margin(std::span<const double> x) const noexcept {
    double z = bias;
    for (std::size_t j = 0; j < weights.size(); ++j) z += weights[j] * x[j];
    return z;
  }
  double score(std::span<const double> x) const noexcept { return sigmoid(margin(x)); }

  friend bool operator==(const LogisticModel&, const LogisticModel&) = default;
};

struct LogisticGradient {
  std::vector<double> weights;
  double bias = 0.0;
};

// Mean cross-entropy, weighted by `sample_weight` when non-empty.
inline double lr_loss(const LogisticModel& m, const Matrix& x, std::span<const int> y,
                      std::span<const double> sample_weight = {}) {
  double total = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double w = sample_weight.empty() ? 1.0 : sample_weight[i];
    total += w * logit_loss(m.margin(x.row(i)), y[i]);
    wsum += w;
  }
  return total / wsum;
}

inline LogisticGradient lr_gradient(const LogisticModel& m, const Matrix& x,
                                    std::span<const int> y,
                                    std::span<const double> sample_weight = {}) {
  LogisticGradient g{std::vector<double>(x.cols(), 0.0), 0.0};
  double wsum = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double w = sample_weight.empty() ? 1.0 : sample_weight[i];
    const auto row = x.row(i);
    const double r = w * (sigmoid(m.margin(row)) - y[i]);
    for (std::size_t j = 0; j < row.size(); ++j) g.weights[j] += r * row[j];
    g.bias += r;
    wsum += w;
  }
  for (double& v : g.weights) v /= wsum;
  g.bias /= wsum;
  return g;
}

// Expects standardized features. `loss_trace`, when given, receives the loss
// before the first step and after every step.
inline LogisticModel train_lr(const Matrix& x, std::span<const int> y, const TrainConfig& config,
                              std::vector<double>* loss_trace = nullptr) {
  detail::require_binary_labels(x, y, /*need_both_classes=*/true, "train_lr");
  if (x.rows() < 2) throw TrainingError("train_lr: need at least 2 rows");
  config.validate();

  const auto weights = class_sample_weights(y, config.balanced_class_weight);
  LogisticModel m{std::vector<double>(x.cols(), 0.0), 0.0, 0.0};
  if (loss_trace) {
    loss_trace->clear();
    loss_trace->push_back(lr_loss(m, x, y, weights));
  }
  const double eta = config.lr.learning_rate;
  for (int it = 0; it < config.lr.iterations; ++it) {
    const LogisticGradient g = lr_gradient(m, x, y, weights);
    for (std::size_t j = 0; j < m.weights.size(); ++j) m.weights[j] -= eta * g.weights[j];
    m.bias -= eta * g.bias;
    if (loss_trace) loss_trace->push_back(lr_loss(m, x, y, weights));
  }
  m.final_loss = lr_loss(m, x, y, weights);
  return m;
}

}  // namespace hitpredict
