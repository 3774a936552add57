#pragma once

// Binary decision trees shared by the single tree, the forest and the
// boosted ensemble. Rows with x[feature] <= threshold go left.
//
// Two growers live here:
//  * grow_gini_tree: CART classification, minimizes weighted Gini impurity.
//  * grow_newton_tree: regression on gradient/hessian statistics with the
//    regularized second-order gain used by Newton boosting.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "hitpredict/matrix.hpp"
#include "hitpredict/random.hpp"

namespace hitpredict {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf: class-1 probability (Gini) or weight (Newton)
  double cover = 0.0;  // sample weight (Gini) or hessian sum (Newton)
  double gain = 0.0;   // impurity decrease / split gain credited to `feature`

  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf_for(std::span<const double> x) const noexcept {
    std::size_t i = 0;
    while (!nodes[i].is_leaf())
      i = static_cast<std::size_t>(x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left
                                                                              : nodes[i].right);
    return nodes[i];
  }
  double predict(std::span<const double> x) const noexcept { return leaf_for(x).value; }

  std::size_t leaf_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
  }
  std::size_t depth() const noexcept { return depth_from(0); }

  friend bool operator==(const Tree&, const Tree&) = default;

 private:
  std::size_t depth_from(std::size_t i) const noexcept {
    if (nodes[i].is_leaf()) return 0;
    return 1 + std::max(depth_from(static_cast<std::size_t>(nodes[i].left)),
                        depth_from(static_cast<std::size_t>(nodes[i].right)));
  }
};

inline double gini(double w_pos, double w_total) noexcept {
  if (w_total <= 0.0) return 0.0;
  const double p = w_pos / w_total;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

namespace detail {

// Midpoint between consecutive distinct values; falls back to `lo` when the
// midpoint rounds up to `hi`, so `hi` still goes right.
inline double split_point(double lo, double hi) noexcept {
  const double mid = lo + (hi - lo) / 2.0;
  return mid < hi ? mid : lo;
}

inline void sort_by_feature(const Matrix& x, std::size_t feature, std::vector<std::size_t>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
    return x(a, feature) < x(b, feature);
  });
}

}  // namespace detail

struct GiniTreeOptions {
  int max_depth = 0;  // 0 = unlimited
  int min_samples_split = 2;
  int max_features = 0;  // candidate features per split, 0 = all
};

// `rows` may repeat indices (bootstrap). `weight` is per original row.
// Draws from `rng` only when max_features subsamples the columns.
inline Tree grow_gini_tree(const Matrix& x, std::span<const int> y, std::span<const double> weight,
                           std::vector<std::size_t> rows, const GiniTreeOptions& opt,
                           SplitMix64& rng) {
  const std::size_t d = x.cols();
  const std::size_t k =
      opt.max_features <= 0 ? d : std::min<std::size_t>(d, static_cast<std::size_t>(opt.max_features));
  Tree tree;

  struct Best {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
  };

  // Lowest weighted child impurity over candidate thresholds of `f`.
  auto scan = [&](std::size_t f, std::vector<std::size_t>& sorted, double w_total, double w_pos,
                  Best& best) {
    detail::sort_by_feature(x, f, sorted);
    double wl = 0.0, wl_pos = 0.0;
    bool any = false;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      const std::size_t r = sorted[i];
      wl += weight[r];
      wl_pos += y[r] == 1 ? weight[r] : 0.0;
      const double a = x(r, f), b = x(sorted[i + 1], f);
      if (!(a < b)) continue;
      any = true;
      const double wr = w_total - wl, wr_pos = w_pos - wl_pos;
      const double imp = (wl * gini(wl_pos, wl) + wr * gini(wr_pos, wr)) / w_total;
      // Ties within rounding go to the earlier feature / lower threshold.
      if (best.feature < 0 || imp < best.impurity - 1e-12) {
        best = {static_cast<int>(f), detail::split_point(a, b), imp};
      }
    }
    return any;
  };

  auto grow = [&](auto&& self, std::vector<std::size_t> node_rows, int depth) -> int {
    double w_total = 0.0, w_pos = 0.0;
    for (std::size_t r : node_rows) {
      w_total += weight[r];
      if (y[r] == 1) w_pos += weight[r];
    }
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    {
      TreeNode& n = tree.nodes.back();
      n.value = w_total > 0.0 ? w_pos / w_total : 0.0;
      n.cover = w_total;
    }
    const double node_gini = gini(w_pos, w_total);
    const bool stop = node_gini <= 0.0 || (opt.max_depth > 0 && depth >= opt.max_depth) ||
                      node_rows.size() < static_cast<std::size_t>(opt.min_samples_split);
    if (stop) return id;

    Best best;
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::size_t> sorted = node_rows;
    if (k == d) {
      for (std::size_t f : order) scan(f, sorted, w_total, w_pos, best);
    } else {
      rng.shuffle(order);
      // Evaluate the first k drawn features in ascending index order; keep
      // drawing one at a time only while none of them admits a split.
      std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
      std::sort(chosen.begin(), chosen.end());
      bool found = false;
      for (std::size_t f : chosen) found = scan(f, sorted, w_total, w_pos, best) || found;
      for (std::size_t next = k; !found && next < d; ++next)
        found = scan(order[next], sorted, w_total, w_pos, best);
    }
    if (best.feature < 0) return id;  // all rows identical in every feature

    std::vector<std::size_t> left, right;
    for (std::size_t r : node_rows)
      (x(r, static_cast<std::size_t>(best.feature)) <= best.threshold ? left : right).push_back(r);
    std::vector<std::size_t>().swap(sorted);
    std::vector<std::size_t>().swap(node_rows);

    const int l = self(self, std::move(left), depth + 1);
    const int rgt = self(self, std::move(right), depth + 1);
    TreeNode& n = tree.nodes[static_cast<std::size_t>(id)];
    n.feature = best.feature;
    n.threshold = best.threshold;
    n.left = l;
    n.right = rgt;
    n.gain = w_total * (node_gini - best.impurity);
    return id;
  };

  if (rows.empty()) {
    tree.nodes.push_back({});
    return tree;
  }
  grow(grow, std::move(rows), 0);
  return tree;
}

struct NewtonTreeOptions {
  int max_depth = 6;  // 0 = unlimited
  double lambda = 1.0;
  double gamma = 0.0;
  double min_child_weight = 1.0;
};

// Leaf weight -G / (H + lambda).
inline double newton_leaf_weight(double g_sum, double h_sum, double lambda) noexcept {
  return -g_sum / (h_sum + lambda);
}

// 1/2 [G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)] - gamma
inline double newton_split_gain(double gl, double hl, double gr, double hr, double lambda,
                                double gamma) noexcept {
  const double g = gl + gr, h = hl + hr;
  return 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda)) - gamma;
}

// Exact greedy regression tree on per-row gradients/hessians. A split is
// kept only when its gain is strictly positive and both children carry at
// least min_child_weight hessian.
inline Tree grow_newton_tree(const Matrix& x, std::span<const double> grad,
                             std::span<const double> hess, const NewtonTreeOptions& opt) {
  const std::size_t d = x.cols();
  Tree tree;

  auto grow = [&](auto&& self, std::vector<std::size_t> node_rows, int depth) -> int {
    double g_sum = 0.0, h_sum = 0.0;
    for (std::size_t r : node_rows) {
      g_sum += grad[r];
      h_sum += hess[r];
    }
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes.back().value = newton_leaf_weight(g_sum, h_sum, opt.lambda);
    tree.nodes.back().cover = h_sum;
    if ((opt.max_depth > 0 && depth >= opt.max_depth) || node_rows.size() < 2) return id;

    int best_f = -1;
    double best_thr = 0.0, best_gain = 0.0;
    std::vector<std::size_t> sorted = node_rows;
    for (std::size_t f = 0; f < d; ++f) {
      detail::sort_by_feature(x, f, sorted);
      double gl = 0.0, hl = 0.0;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        const std::size_t r = sorted[i];
        gl += grad[r];
        hl += hess[r];
        const double a = x(r, f), b = x(sorted[i + 1], f);
        if (!(a < b)) continue;
        const double hr = h_sum - hl;
        if (hl < opt.min_child_weight || hr < opt.min_child_weight) continue;
        const double gain = newton_split_gain(gl, hl, g_sum - gl, hr, opt.lambda, opt.gamma);
        // gain > 0 to split at all; later candidates must beat the best by
        // more than rounding noise.
        if (best_f < 0 ? gain > 0.0 : gain > best_gain + 1e-12 * std::max(1.0, best_gain)) {
          best_gain = gain;
          best_f = static_cast<int>(f);
          best_thr = detail::split_point(a, b);
        }
      }
    }
    if (best_f < 0) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t r : node_rows)
      (x(r, static_cast<std::size_t>(best_f)) <= best_thr ? left : right).push_back(r);
    std::vector<std::size_t>().swap(sorted);
    std::vector<std::size_t>().swap(node_rows);

    const int l = self(self, std::move(left), depth + 1);
    const int rgt = self(self, std::move(right), depth + 1);
    TreeNode& n = tree.nodes[static_cast<std::size_t>(id)];
    n.feature = best_f;
    n.threshold = best_thr;
    n.left = l;
    n.right = rgt;
    n.gain = best_gain;
    return id;
  };

  std::vector<std::size_t> all(x.rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  grow(grow, std::move(all), 0);
  return tree;
}

}  // namespace hitpredict
