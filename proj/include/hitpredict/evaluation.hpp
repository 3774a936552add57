#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hitpredict/csv.hpp"
#include "hitpredict/learners/model.hpp"
#include "hitpredict/metrics.hpp"
#include "hitpredict/track.hpp"

namespace hitpredict {

struct FeatureImportance {
  std::vector<std::string> names;
  std::vector<double> values;  // sums to 1
};

struct EvaluationReport {
  std::string model;      // variant name, or a free label
  std::string partition;  // test / validation / train / confusion
  double threshold = 0.5;
  ConfusionMatrix confusion;
  ClassificationMetrics metrics;
  std::optional<RocCurve> roc;  // absent when the rows hold one class only
  std::optional<FeatureImportance> importance;
};

inline EvaluationReport report_from_confusion(const ConfusionMatrix& cm, std::string model = {},
                                              std::string partition = "confusion") {
  EvaluationReport r;
  r.model = std::move(model);
  r.partition = std::move(partition);
  r.confusion = cm;
  r.metrics = weighted_metrics(cm);
  return r;
}

// Scores raw feature rows (standardization stored in the model is applied),
// predicts with `threshold`, and aggregates confusion, metrics and ROC.
inline EvaluationReport evaluate(const TrainedModel& model, const Matrix& rows,
                                 std::span<const int> labels, double threshold) {
  if (rows.rows() != labels.size())
    throw ValidationError("evaluate: " + std::to_string(rows.rows()) + " rows vs " +
                          std::to_string(labels.size()) + " labels");
  std::vector<double> scores(rows.rows());
  std::vector<int> pred(rows.rows());
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    scores[i] = model.score_raw(rows.row(i));
    pred[i] = scores[i] >= threshold ? 1 : 0;
  }
  EvaluationReport r = report_from_confusion(confusion(labels, pred),
                                             std::string(variant_name(model.variant)), "");
  r.threshold = threshold;
  const auto counts = class_distribution(labels);
  if (counts.negatives > 0 && counts.positives > 0)
    r.roc = roc(labels, scores);
  else
    r.metrics.degenerate.emplace_back("roc undefined (single-class rows)");
  return r;
}

inline double round6(double v) { return std::round(v * 1e6) / 1e6; }

inline nlohmann::ordered_json metrics_row_to_json(const MetricsRow& m) {
  return {{"accuracy", round6(m.accuracy)},
          {"precision", round6(m.precision)},
          {"recall", round6(m.recall)},
          {"f1", round6(m.f1)}};
}

inline nlohmann::ordered_json report_to_json(const EvaluationReport& r) {
  nlohmann::ordered_json j;
  j["format"] = "hitpredict-report";
  j["version"] = 1;
  j["model"] = r.model;
  j["partition"] = r.partition;
  j["threshold"] = r.threshold;
  j["n"] = r.confusion.total();
  j["confusion"] = {{"tn", r.confusion.tn},
                    {"fp", r.confusion.fp},
                    {"fn", r.confusion.fn},
                    {"tp", r.confusion.tp},
                    {"orientation", "rows=actual,cols=predicted"}};
  j["metrics"] = {{averaging_name(Averaging::Class0), metrics_row_to_json(r.metrics.class0)},
                  {averaging_name(Averaging::Class1), metrics_row_to_json(r.metrics.class1)},
                  {averaging_name(Averaging::Weighted), metrics_row_to_json(r.metrics.weighted)}};
  j["degenerate"] = r.metrics.degenerate;
  if (r.roc) {
    nlohmann::ordered_json points = nlohmann::ordered_json::array();
    for (const auto& p : r.roc->points) points.push_back({round6(p.fpr), round6(p.tpr)});
    j["roc"] = {{"auc", round6(r.roc->auc)}, {"points", std::move(points)}};
  } else {
    j["roc"] = nullptr;
  }
  if (r.importance) {
    nlohmann::ordered_json imp = nlohmann::ordered_json::object();
    for (std::size_t k = 0; k < r.importance->names.size(); ++k)
      imp[r.importance->names[k]] = round6(r.importance->values[k]);
    j["feature_importance"] = std::move(imp);
  }
  return j;
}

// Two columns, header "fpr,tpr", full precision.
inline std::string roc_to_csv(const RocCurve& curve) {
  std::ostringstream out;
  out << "fpr,tpr\n";
  for (const auto& p : curve.points)
    out << csv::format_double(p.fpr) << ',' << csv::format_double(p.tpr) << '\n';
  return out.str();
}

}  // namespace hitpredict
