#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hitpredict/error.hpp"

namespace hitpredict {

enum class Variant { LR, DT, RF, GBT, MLP };

inline constexpr Variant kAllVariants[] = {Variant::LR, Variant::DT, Variant::RF,
                                           Variant::GBT, Variant::MLP};

// Short names used on the command line and in model files.
inline std::string_view variant_name(Variant v) noexcept {
  switch (v) {
    case Variant::LR: return "lr";
    case Variant::DT: return "dt";
    case Variant::RF: return "rf";
    case Variant::GBT: return "xgb";
    case Variant::MLP: return "nn";
  }
  return "?";
}

inline Variant parse_variant(std::string_view name) {
  for (Variant v : kAllVariants)
    if (variant_name(v) == name) return v;
  if (name == "gbt") return Variant::GBT;
  if (name == "mlp") return Variant::MLP;
  throw ValidationError("unknown model '" + std::string(name) +
                        "' (expected lr, dt, rf, xgb or nn)");
}

struct LogisticParams {
  double learning_rate = 0.1;
  int iterations = 1000;

  friend bool operator==(const LogisticParams&, const LogisticParams&) = default;
};

struct TreeParams {
  int max_depth = 0;  // 0 = unlimited
  int min_samples_split = 2;

  friend bool operator==(const TreeParams&, const TreeParams&) = default;
};

struct ForestParams {
  int n_estimators = 100;
  int max_features = -1;  // -1 = ceil(sqrt(d)), 0 = all
  bool bootstrap = true;
  int max_depth = 0;
  int min_samples_split = 2;

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

struct BoostParams {
  int n_estimators = 100;
  double learning_rate = 0.3;  // shrinkage eta
  double lambda = 1.0;
  double gamma = 0.0;
  int max_depth = 6;  // 0 = unlimited
  double min_child_weight = 1.0;

  friend bool operator==(const BoostParams&, const BoostParams&) = default;
};

struct MlpParams {
  int hidden1 = 16;
  int hidden2 = 8;
  int batch_size = 8;
  int epochs = 10;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool zero_output_init = false;

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

struct TrainConfig {
  Variant variant = Variant::LR;
  LogisticParams lr;
  TreeParams tree;
  ForestParams forest;
  BoostParams boost;
  MlpParams mlp;
  std::uint64_t seed = 0;
  double hit_decision_threshold = 0.5;
  bool balanced_class_weight = false;
  int n_threads = 1;  // RF only; trees are independent

  static TrainConfig defaults(Variant v) {
    TrainConfig c;
    c.variant = v;
    return c;
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;

  void validate() const {
    auto positive = [](std::string_view name, double v) {
      if (!(v > 0.0))
        throw ValidationError(std::string(name) + " must be > 0, got " + std::to_string(v));
    };
    auto at_least = [](std::string_view name, long v, long lo) {
      if (v < lo)
        throw ValidationError(std::string(name) + " must be >= " + std::to_string(lo) +
                              ", got " + std::to_string(v));
    };
    if (!(hit_decision_threshold > 0.0 && hit_decision_threshold < 1.0))
      throw ValidationError("hit_decision_threshold must lie in (0, 1)");
    at_least("n_threads", n_threads, 1);
    switch (variant) {
      case Variant::LR:
        positive("lr.learning_rate", lr.learning_rate);
        at_least("lr.iterations", lr.iterations, 1);
        break;
      case Variant::DT:
        at_least("tree.max_depth", tree.max_depth, 0);
        at_least("tree.min_samples_split", tree.min_samples_split, 2);
        break;
      case Variant::RF:
        at_least("forest.n_estimators", forest.n_estimators, 1);
        at_least("forest.max_features", forest.max_features, -1);
        at_least("forest.max_depth", forest.max_depth, 0);
        at_least("forest.min_samples_split", forest.min_samples_split, 2);
        break;
      case Variant::GBT:
        at_least("boost.n_estimators", boost.n_estimators, 0);
        positive("boost.learning_rate", boost.learning_rate);
        at_least("boost.max_depth", boost.max_depth, 0);
        if (boost.lambda < 0.0 || boost.gamma < 0.0 || boost.min_child_weight < 0.0)
          throw ValidationError("boost lambda, gamma and min_child_weight must be >= 0");
        break;
      case Variant::MLP:
        at_least("mlp.hidden1", mlp.hidden1, 1);
        at_least("mlp.hidden2", mlp.hidden2, 1);
        at_least("mlp.batch_size", mlp.batch_size, 1);
        at_least("mlp.epochs", mlp.epochs, 1);
        positive("mlp.learning_rate", mlp.learning_rate);
        positive("mlp.epsilon", mlp.epsilon);
        if (!(mlp.beta1 >= 0.0 && mlp.beta1 < 1.0 && mlp.beta2 >= 0.0 && mlp.beta2 < 1.0))
          throw ValidationError("Adam betas must lie in [0, 1)");
        break;
    }
  }
};

// Hyperparameter names accepted by set_param for each variant, in the order
// they are documented.
inline std::vector<std::string_view> param_names(Variant v) {
  switch (v) {
    case Variant::LR: return {"learning_rate", "iterations", "threshold"};
    case Variant::DT: return {"max_depth", "min_samples_split", "threshold"};
    case Variant::RF:
      return {"n_estimators", "max_features", "max_depth", "min_samples_split", "threshold"};
    case Variant::GBT:
      return {"n_estimators", "learning_rate", "lambda", "gamma",
              "max_depth",    "min_child_weight", "threshold"};
    case Variant::MLP:
      return {"hidden1", "hidden2", "batch_size", "epochs", "learning_rate", "threshold"};
  }
  return {};
}

namespace detail {

inline int as_count(std::string_view name, double value) {
  if (value != std::floor(value) || std::abs(value) > 1e9)
    throw ValidationError("parameter '" + std::string(name) + "' needs an integer, got " +
                          std::to_string(value));
  return static_cast<int>(value);
}

}  // namespace detail

// Sets one named hyperparameter of config.variant.
inline void set_param(TrainConfig& c, std::string_view name, double value) {
  using detail::as_count;
  if (name == "threshold") {
    c.hit_decision_threshold = value;
    return;
  }
  bool ok = true;
  switch (c.variant) {
    case Variant::LR:
      if (name == "learning_rate") c.lr.learning_rate = value;
      else if (name == "iterations") c.lr.iterations = as_count(name, value);
      else ok = false;
      break;
    case Variant::DT:
      if (name == "max_depth") c.tree.max_depth = as_count(name, value);
      else if (name == "min_samples_split") c.tree.min_samples_split = as_count(name, value);
      else ok = false;
      break;
    case Variant::RF:
      if (name == "n_estimators") c.forest.n_estimators = as_count(name, value);
      else if (name == "max_features") c.forest.max_features = as_count(name, value);
      else if (name == "max_depth") c.forest.max_depth = as_count(name, value);
      else if (name == "min_samples_split") c.forest.min_samples_split = as_count(name, value);
      else ok = false;
      break;
    case Variant::GBT:
      if (name == "n_estimators") c.boost.n_estimators = as_count(name, value);
      else if (name == "learning_rate") c.boost.learning_rate = value;
      else if (name == "lambda") c.boost.lambda = value;
      else if (name == "gamma") c.boost.gamma = value;
      else if (name == "max_depth") c.boost.max_depth = as_count(name, value);
      else if (name == "min_child_weight") c.boost.min_child_weight = value;
      else ok = false;
      break;
    case Variant::MLP:
      if (name == "hidden1") c.mlp.hidden1 = as_count(name, value);
      else if (name == "hidden2") c.mlp.hidden2 = as_count(name, value);
      else if (name == "batch_size") c.mlp.batch_size = as_count(name, value);
      else if (name == "epochs") c.mlp.epochs = as_count(name, value);
      else if (name == "learning_rate") c.mlp.learning_rate = value;
      else ok = false;
      break;
  }
  if (!ok)
    throw ValidationError("unknown parameter '" + std::string(name) + "' for model " +
                          std::string(variant_name(c.variant)));
}

inline double get_param(const TrainConfig& c, std::string_view name) {
  if (name == "threshold") return c.hit_decision_threshold;
  switch (c.variant) {
    case Variant::LR:
      if (name == "learning_rate") return c.lr.learning_rate;
      if (name == "iterations") return c.lr.iterations;
      break;
    case Variant::DT:
      if (name == "max_depth") return c.tree.max_depth;
      if (name == "min_samples_split") return c.tree.min_samples_split;
      break;
    case Variant::RF:
      if (name == "n_estimators") return c.forest.n_estimators;
      if (name == "max_features") return c.forest.max_features;
      if (name == "max_depth") return c.forest.max_depth;
      if (name == "min_samples_split") return c.forest.min_samples_split;
      break;
    case Variant::GBT:
      if (name == "n_estimators") return c.boost.n_estimators;
      if (name == "learning_rate") return c.boost.learning_rate;
      if (name == "lambda") return c.boost.lambda;
      if (name == "gamma") return c.boost.gamma;
      if (name == "max_depth") return c.boost.max_depth;
      if (name == "min_child_weight") return c.boost.min_child_weight;
      break;
    case Variant::MLP:
      if (name == "hidden1") return c.mlp.hidden1;
      if (name == "hidden2") return c.mlp.hidden2;
      if (name == "batch_size") return c.mlp.batch_size;
      if (name == "epochs") return c.mlp.epochs;
      if (name == "learning_rate") return c.mlp.learning_rate;
      break;
  }
  throw ValidationError("unknown parameter '" + std::string(name) + "' for model " +
                        std::string(variant_name(c.variant)));
}

// Per-row weights: all ones, or n / (2 n_c) for row of class c when balanced.
inline std::vector<double> class_sample_weights(std::span<const int> labels, bool balanced) {
  std::vector<double> w(labels.size(), 1.0);
  if (!balanced) return w;
  double n1 = 0.0;
  for (int y : labels) n1 += y;
  const double n = static_cast<double>(labels.size());
  const double n0 = n - n1;
  if (n0 == 0.0 || n1 == 0.0) return w;
  for (std::size_t i = 0; i < labels.size(); ++i)
    w[i] = labels[i] == 1 ? n / (2.0 * n1) : n / (2.0 * n0);
  return w;
}

}  // namespace hitpredict
