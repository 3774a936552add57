#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hitpredict/error.hpp"
#include "hitpredict/learners/boosting.hpp"
#include "hitpredict/learners/config.hpp"
#include "hitpredict/learners/forest.hpp"
#include "hitpredict/learners/logistic.hpp"
#include "hitpredict/learners/mlp.hpp"
#include "hitpredict/standardize.hpp"

namespace hitpredict {

using ModelParameters =
    std::variant<LogisticModel, TreeModel, ForestModel, BoostedModel, MlpModel>;

// Any of the five classifiers behind one scoring interface. score() takes
// inputs in the space the model was trained in; evaluation code applies
// `standardization` first when it is set.
struct TrainedModel {
  Variant variant = Variant::LR;
  TrainConfig config;
  std::size_t n_features = 0;
  ModelParameters parameters;
  std::optional<StandardizationParams> standardization;

  double score(std::span<const double> x) const {
    if (x.size() != n_features)
      throw ValidationError("score: input has " + std::to_string(x.size()) +
                            " features, model expects " + std::to_string(n_features));
    for (double v : x)
      if (!std::isfinite(v)) throw ValidationError("score: non-finite input");
    return std::visit([&](const auto& m) { return m.score(x); }, parameters);
  }

  // 1 iff score >= threshold.
  int predict(std::span<const double> x, double threshold) const {
    return score(x) >= threshold ? 1 : 0;
  }
  int predict(std::span<const double> x) const {
    return predict(x, config.hit_decision_threshold);
  }

  // Applies the stored standardization (if any) before scoring.
  double score_raw(std::span<const double> raw) const {
    if (!standardization) return score(raw);
    std::vector<double> z(raw.begin(), raw.end());
    standardization->apply_in_place(z);
    return score(z);
  }

  friend bool operator==(const TrainedModel&, const TrainedModel&) = default;
};

// Trains config.variant on x (already standardized for LR/MLP).
inline TrainedModel train(const Matrix& x, std::span<const int> y, const TrainConfig& config) {
  TrainedModel m;
  m.variant = config.variant;
  m.config = config;
  m.n_features = x.cols();
  switch (config.variant) {
    case Variant::LR: m.parameters = train_lr(x, y, config); break;
    case Variant::DT: m.parameters = train_dt(x, y, config); break;
    case Variant::RF: m.parameters = train_rf(x, y, config); break;
    case Variant::GBT: m.parameters = train_gbt(x, y, config); break;
    case Variant::MLP: m.parameters = train_mlp(x, y, config); break;
  }
  return m;
}

inline bool needs_standardization(Variant v) noexcept {
  return v == Variant::LR || v == Variant::MLP;
}

// Fits standardization on x when the variant needs it, stores it in the
// model, and trains on the transformed rows. Takes raw features.
inline TrainedModel train_on_raw(const Matrix& raw, std::span<const int> y,
                                 const TrainConfig& config) {
  if (!needs_standardization(config.variant)) return train(raw, y, config);
  StandardizationParams params = standardize_fit(raw);
  TrainedModel m = train(standardize_apply(params, raw), y, config);
  m.standardization = std::move(params);
  return m;
}

}  // namespace hitpredict
