#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hitpredict/error.hpp"
#include "hitpredict/learners/config.hpp"
#include "hitpredict/learners/model.hpp"
#include "hitpredict/metrics.hpp"
#include "hitpredict/split.hpp"
#include "hitpredict/track.hpp"

namespace hitpredict {

// Parameter name -> candidate values. std::map keeps names sorted, which is
// the iteration order of the sweep.
using ParamGrid = std::map<std::string, std::vector<double>>;

struct GridCell {
  std::map<std::string, double> params;
  TrainConfig config;
  double score = 0.0;
};

struct GridSearchResult {
  TrainConfig best_config;
  std::map<std::string, double> best_params;
  double best_score = 0.0;
  std::vector<GridCell> all_cells;
};

// Cartesian product in lexicographic order: the first parameter name varies
// slowest, values in the order given.
inline std::vector<std::map<std::string, double>> expand_grid(const ParamGrid& grid) {
  if (grid.empty()) throw ValidationError("grid search: empty grid");
  for (const auto& [name, values] : grid)
    if (values.empty()) throw ValidationError("grid search: no values for '" + name + "'");
  std::vector<std::map<std::string, double>> cells{{}};
  for (const auto& [name, values] : grid) {
    std::vector<std::map<std::string, double>> next;
    next.reserve(cells.size() * values.size());
    for (const auto& partial : cells)
      for (double v : values) {
        auto cell = partial;
        cell[name] = v;
        next.push_back(std::move(cell));
      }
    cells = std::move(next);
  }
  return cells;
}

// Scores every cell by weighted F1 on a seeded 75/25 hold-out of (x, y).
// `x` holds raw features; LR/MLP cells standardize on the 75% part. The
// first cell reaching the maximum wins.
inline GridSearchResult grid_search(const TrainConfig& base, const ParamGrid& grid,
                                    const Matrix& x, std::span<const int> y, std::uint64_t seed) {
  const auto cells = expand_grid(grid);
  const auto counts = class_distribution(y);
  if (counts.negatives == 0 || counts.positives == 0)
    throw TrainingError("grid search: labels contain a single class");

  const SplitIndices holdout = split_two_way(x.rows(), seed, 0.25);
  const Matrix x_fit = x.select_rows(holdout.train);
  const Matrix x_eval = x.select_rows(holdout.test);
  const auto y_fit = select<int>(y, holdout.train);
  const auto y_eval = select<int>(y, holdout.test);

  GridSearchResult result;
  for (const auto& params : cells) {
    TrainConfig config = base;
    for (const auto& [name, value] : params) set_param(config, name, value);
    config.validate();
    const TrainedModel model = train_on_raw(x_fit, y_fit, config);
    std::vector<int> pred(x_eval.rows());
    for (std::size_t i = 0; i < x_eval.rows(); ++i)
      pred[i] = model.score_raw(x_eval.row(i)) >= config.hit_decision_threshold ? 1 : 0;
    const double score = weighted_metrics(confusion(y_eval, pred)).weighted.f1;
    if (result.all_cells.empty() || score > result.best_score) {
      result.best_score = score;
      result.best_config = config;
      result.best_params = params;
    }
    result.all_cells.push_back({params, config, score});
  }
  return result;
}

}  // namespace hitpredict
