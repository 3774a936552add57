#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hitpredict/error.hpp"
#include "hitpredict/learners/model.hpp"
#include "hitpredict/metrics.hpp"
#include "hitpredict/random.hpp"

namespace hitpredict {

namespace detail {

inline void accumulate_gain(const Tree& t, std::vector<double>& out) {
  for (const auto& n : t.nodes)
    if (!n.is_leaf()) out[static_cast<std::size_t>(n.feature)] += n.gain;
}

inline void normalize(std::vector<double>& v) {
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  if (total > 0.0) {
    for (double& x : v) x /= total;
  } else {
    // No split anywhere: nothing distinguishes the features.
    std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(v.size()));
  }
}

}  // namespace detail

// Mean decrease in impurity. RF: weighted Gini decrease, normalized per tree
// and then averaged over trees. GBT: total split gain. Result sums to 1.
inline std::vector<double> impurity_importance(const TrainedModel& model) {
  const std::size_t d = model.n_features;
  std::vector<double> out(d, 0.0);
  if (const auto* rf = std::get_if<ForestModel>(&model.parameters)) {
    for (const auto& t : rf->trees) {
      std::vector<double> per_tree(d, 0.0);
      detail::accumulate_gain(t, per_tree);
      if (std::accumulate(per_tree.begin(), per_tree.end(), 0.0) <= 0.0) continue;
      detail::normalize(per_tree);
      for (std::size_t j = 0; j < d; ++j) out[j] += per_tree[j];
    }
  } else if (const auto* gbt = std::get_if<BoostedModel>(&model.parameters)) {
    for (const auto& t : gbt->trees) detail::accumulate_gain(t, out);
  } else {
    throw ValidationError("feature importance needs a tree ensemble (rf or xgb), got " +
                          std::string(variant_name(model.variant)));
  }
  detail::normalize(out);
  return out;
}

// Mean drop in weighted F1 when one column is shuffled, over `repeats`
// seeded permutations per feature. `x` is in the model's raw input space.
inline std::vector<double> permutation_importance(const TrainedModel& model, const Matrix& x,
                                                  std::span<const int> y, std::uint64_t seed,
                                                  int repeats = 5) {
  if (model.variant != Variant::RF && model.variant != Variant::GBT)
    throw ValidationError("feature importance needs a tree ensemble (rf or xgb), got " +
                          std::string(variant_name(model.variant)));
  if (x.rows() != y.size() || x.rows() == 0)
    throw ValidationError("permutation_importance: rows and labels must match and be non-empty");

  auto weighted_f1 = [&](const Matrix& m) {
    std::vector<int> pred(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) pred[i] = model.score_raw(m.row(i)) >= model.config.hit_decision_threshold;
    return weighted_metrics(confusion(y, pred)).weighted.f1;
  };
  const double base = weighted_f1(x);

  std::vector<double> out(x.cols(), 0.0);
  Matrix shuffled = x;
  std::vector<double> column(x.rows());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    SplitMix64 rng(derive_seed(seed, j));
    double drop = 0.0;
    for (int k = 0; k < repeats; ++k) {
      for (std::size_t i = 0; i < x.rows(); ++i) column[i] = x(i, j);
      rng.shuffle(column);
      for (std::size_t i = 0; i < x.rows(); ++i) shuffled(i, j) = column[i];
      drop += base - weighted_f1(shuffled);
    }
    for (std::size_t i = 0; i < x.rows(); ++i) shuffled(i, j) = x(i, j);
    out[j] = drop / repeats;
  }
  return out;
}

// Feature indices by decreasing importance; ties keep column order.
inline std::vector<std::size_t> importance_ranking(std::span<const double> importance) {
  std::vector<std::size_t> idx(importance.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return importance[a] > importance[b]; });
  return idx;
}

}  // namespace hitpredict
