#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <thread>
#include <vector>

#include "hitpredict/learners/config.hpp"
#include "hitpredict/learners/math.hpp"
#include "hitpredict/learners/tree.hpp"
#include "hitpredict/random.hpp"

namespace hitpredict {

// Single CART classifier; score is the leaf's class-1 fraction.
struct TreeModel {
  Tree tree;

  double score(std::span<const double> x) const noexcept { return tree.predict(x); }
  friend bool operator==(const TreeModel&, const TreeModel&) = default;
};

// Hard-vote forest: each tree votes 1 when its leaf probability is >= 0.5,
// score is the fraction of votes.
struct ForestModel {
  std::vector<Tree> trees;

  double score(std::span<const double> x) const noexcept {
    if (trees.empty()) return 0.0;
    std::size_t votes = 0;
    for (const auto& t : trees) votes += t.predict(x) >= 0.5 ? 1 : 0;
    return static_cast<double>(votes) / static_cast<double>(trees.size());
  }
  friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

inline TreeModel train_dt(const Matrix& x, std::span<const int> y, const TrainConfig& config) {
  detail::require_binary_labels(x, y, /*need_both_classes=*/false, "train_dt");
  config.validate();
  const auto w = class_sample_weights(y, config.balanced_class_weight);
  std::vector<std::size_t> rows(x.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  GiniTreeOptions opt{config.tree.max_depth, config.tree.min_samples_split, 0};
  SplitMix64 rng(config.seed);
  return {grow_gini_tree(x, y, w, std::move(rows), opt, rng)};
}

inline int resolve_max_features(int requested, std::size_t n_features) {
  if (requested == 0) return static_cast<int>(n_features);
  if (requested < 0)
    return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_features))));
  return std::min(requested, static_cast<int>(n_features));
}

// Tree t uses the stream derive_seed(seed, t) for both its bootstrap draw and
// its feature subsampling, so the result does not depend on n_threads.
inline ForestModel train_rf(const Matrix& x, std::span<const int> y, const TrainConfig& config) {
  detail::require_binary_labels(x, y, /*need_both_classes=*/false, "train_rf");
  config.validate();
  const auto& fp = config.forest;
  const auto w = class_sample_weights(y, config.balanced_class_weight);
  const std::size_t n = x.rows();
  GiniTreeOptions opt{fp.max_depth, fp.min_samples_split,
                      resolve_max_features(fp.max_features, x.cols())};

  ForestModel model;
  model.trees.resize(static_cast<std::size_t>(fp.n_estimators));
  auto build = [&](std::size_t t) {
    SplitMix64 rng(derive_seed(config.seed, t));
    std::vector<std::size_t> rows(n);
    if (fp.bootstrap) {
      for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    model.trees[t] = grow_gini_tree(x, y, w, std::move(rows), opt, rng);
  };

  const std::size_t threads =
      std::min<std::size_t>(static_cast<std::size_t>(config.n_threads), model.trees.size());
  if (threads <= 1) {
    for (std::size_t t = 0; t < model.trees.size(); ++t) build(t);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < threads; ++k)
      pool.emplace_back([&, k] {
        for (std::size_t t = k; t < model.trees.size(); t += threads) build(t);
      });
  }
  return model;
}

}  // namespace hitpredict
