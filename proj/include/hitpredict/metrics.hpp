#pragma once

// Imbalance-aware evaluation of binary classifiers.
//
// Confusion matrices use rows = actual, columns = predicted:
//
//                 pred 0   pred 1
//   actual 0        tn       fp
//   actual 1        fn       tp
//
// Per-class precision/recall/F1 treat 0/0 as 0. "Weighted" rows average the
// two per-class values with weights equal to each class's actual support, so
// weighted recall always equals accuracy.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hitpredict/error.hpp"

namespace hitpredict {

struct ConfusionMatrix {
  std::int64_t tn = 0, fp = 0, fn = 0, tp = 0;

  std::int64_t total() const noexcept { return tn + fp + fn + tp; }
  std::int64_t actual_negatives() const noexcept { return tn + fp; }
  std::int64_t actual_positives() const noexcept { return fn + tp; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size())
    throw ValidationError("confusion: " + std::to_string(y_true.size()) + " labels vs " +
                          std::to_string(y_pred.size()) + " predictions");
  if (y_true.empty()) throw ValidationError("confusion: no samples");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], p = y_pred[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1))
      throw ValidationError("confusion: non-binary entry at index " + std::to_string(i));
    if (t == 0) (p == 0 ? cm.tn : cm.fp)++;
    else (p == 0 ? cm.fn : cm.tp)++;
  }
  return cm;
}

enum class Averaging { Class0, Class1, Weighted };

inline const char* averaging_name(Averaging a) noexcept {
  switch (a) {
    case Averaging::Class0: return "class_0";
    case Averaging::Class1: return "class_1";
    case Averaging::Weighted: return "weighted";
  }
  return "?";
}

struct MetricsRow {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  Averaging averaging = Averaging::Weighted;
};

struct ClassificationMetrics {
  MetricsRow class0{.averaging = Averaging::Class0};
  MetricsRow class1{.averaging = Averaging::Class1};
  MetricsRow weighted{.averaging = Averaging::Weighted};
  // Human-readable notes for every 0/0 cell that was set to 0.
  std::vector<std::string> degenerate;
};

namespace detail {

inline double ratio(std::int64_t num, std::int64_t den, const char* what,
                    std::vector<std::string>& notes) {
  if (den == 0) {
    notes.emplace_back(what);
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

inline double harmonic(double p, double r) noexcept {
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

}  // namespace detail

inline ClassificationMetrics weighted_metrics(const ConfusionMatrix& cm) {
  if (cm.tn < 0 || cm.fp < 0 || cm.fn < 0 || cm.tp < 0)
    throw ValidationError("confusion matrix has a negative count");
  const std::int64_t n = cm.total();
  if (n == 0) throw ValidationError("confusion matrix is empty");

  ClassificationMetrics m;
  auto& notes = m.degenerate;
  const double accuracy = static_cast<double>(cm.tn + cm.tp) / static_cast<double>(n);

  // class 0: "positive" is the negative class
  m.class0.accuracy = accuracy;
  m.class0.precision = detail::ratio(cm.tn, cm.tn + cm.fn, "class_0 precision (no predicted 0)", notes);
  m.class0.recall = detail::ratio(cm.tn, cm.tn + cm.fp, "class_0 recall (no actual 0)", notes);
  m.class0.f1 = detail::harmonic(m.class0.precision, m.class0.recall);

  m.class1.accuracy = accuracy;
  m.class1.precision = detail::ratio(cm.tp, cm.tp + cm.fp, "class_1 precision (no predicted 1)", notes);
  m.class1.recall = detail::ratio(cm.tp, cm.tp + cm.fn, "class_1 recall (no actual 1)", notes);
  m.class1.f1 = detail::harmonic(m.class1.precision, m.class1.recall);

  const double s0 = static_cast<double>(cm.actual_negatives());
  const double s1 = static_cast<double>(cm.actual_positives());
  const double total = static_cast<double>(n);
  auto weigh = [&](double a, double b) { return (s0 * a + s1 * b) / total; };
  m.weighted.accuracy = accuracy;
  m.weighted.precision = weigh(m.class0.precision, m.class1.precision);
  m.weighted.recall = weigh(m.class0.recall, m.class1.recall);
  m.weighted.f1 = weigh(m.class0.f1, m.class1.f1);
  return m;
}

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct RocCurve {
  std::vector<RocPoint> points;  // (0,0) ... (1,1)
  std::vector<double> thresholds;  // score at which each point after the first is reached
  double auc = 0.0;
};

// Thresholds at every distinct score, descending; tied scores form one step.
// The trapezoid area is accumulated in integer units (2 * P * N) so it equals
// the Mann-Whitney statistic exactly.
inline RocCurve roc(std::span<const int> y_true, std::span<const double> scores) {
  if (y_true.size() != scores.size())
    throw ValidationError("roc: " + std::to_string(y_true.size()) + " labels vs " +
                          std::to_string(scores.size()) + " scores");
  std::int64_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] != 0 && y_true[i] != 1)
      throw ValidationError("roc: non-binary label at index " + std::to_string(i));
    if (std::isnan(scores[i])) throw ValidationError("roc: NaN score at index " + std::to_string(i));
    (y_true[i] == 1 ? pos : neg)++;
  }
  if (pos == 0 || neg == 0)
    throw ValidationError("roc: labels must contain both classes");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  std::int64_t tp = 0, fp = 0;
  __int128 twice_area = 0;  // sum of fp_step * (tp_before + tp_after)
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    const std::int64_t tp_before = tp, fp_before = fp;
    for (; i < order.size() && scores[order[i]] == s; ++i) (y_true[order[i]] == 1 ? tp : fp)++;
    twice_area += static_cast<__int128>(fp - fp_before) * (tp_before + tp);
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                            static_cast<double>(tp) / static_cast<double>(pos)});
    curve.thresholds.push_back(s);
  }
  curve.auc = static_cast<double>(twice_area) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
  return curve;
}

}  // namespace hitpredict
