#pragma once

// Second-order (Newton) gradient boosting on the logistic loss.
//
//   margin_0   = log(p / (1 - p)), p = weighted base rate
//   g_i        = sigmoid(margin_i) - y_i,  h_i = sigmoid(margin_i)(1 - sigmoid(margin_i))
//   tree_t     = grow_newton_tree(g, h)     (leaf weight -G / (H + lambda))
//   margin_i  += eta * tree_t(x_i)
//
// Exact greedy split search on dense data; no row/column subsampling.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "hitpredict/learners/config.hpp"
#include "hitpredict/learners/math.hpp"
#include "hitpredict/learners/tree.hpp"

namespace hitpredict {

struct BoostedModel {
  double base_score = 0.0;  // initial log-odds
  double shrinkage = 0.3;
  std::vector<Tree> trees;  // raw leaf weights; shrinkage applied when scoring

  // Uses the first `rounds` trees (all by default).
  double margin(std::span<const double> x, std::size_t rounds = static_cast<std::size_t>(-1)) const noexcept {
    double sum = 0.0;
    const std::size_t n = std::min(rounds, trees.size());
    for (std::size_t t = 0; t < n; ++t) sum += trees[t].predict(x);
    return base_score + shrinkage * sum;
  }
  double score(std::span<const double> x) const noexcept { return sigmoid(margin(x)); }

  friend bool operator==(const BoostedModel&, const BoostedModel&) = default;
};

// `loss_trace`, when given, receives the weighted mean training log-loss
// before the first round and after every round.
inline BoostedModel train_gbt(const Matrix& x, std::span<const int> y, const TrainConfig& config,
                              std::vector<double>* loss_trace = nullptr) {
  detail::require_binary_labels(x, y, /*need_both_classes=*/true, "train_gbt");
  config.validate();
  const auto& bp = config.boost;
  const std::size_t n = x.rows();
  const auto w = class_sample_weights(y, config.balanced_class_weight);

  double wsum = 0.0, wpos = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    wsum += w[i];
    if (y[i] == 1) wpos += w[i];
  }
  const double base_rate = wpos / wsum;

  BoostedModel model;
  model.base_score = std::log(base_rate / (1.0 - base_rate));
  model.shrinkage = bp.learning_rate;

  std::vector<double> margin(n, model.base_score), grad(n), hess(n);
  auto record_loss = [&] {
    if (!loss_trace) return;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += w[i] * logit_loss(margin[i], y[i]);
    loss_trace->push_back(total / wsum);
  };
  if (loss_trace) loss_trace->clear();
  record_loss();

  const NewtonTreeOptions opt{bp.max_depth, bp.lambda, bp.gamma, bp.min_child_weight};
  for (int round = 0; round < bp.n_estimators; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margin[i]);
      grad[i] = w[i] * (p - y[i]);
      hess[i] = w[i] * std::max(p * (1.0 - p), 1e-16);
    }
    Tree tree = grow_newton_tree(x, grad, hess, opt);
    for (std::size_t i = 0; i < n; ++i) margin[i] += model.shrinkage * tree.predict(x.row(i));
    model.trees.push_back(std::move(tree));
    record_loss();
  }
  return model;
}

}  // namespace hitpredict
