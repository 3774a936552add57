#pragma once

// Versioned JSON model documents:
//
//   { "format": "hitpredict-model", "version": 1, "variant": "rf",
//     "n_features": 13, "config": {...}, "standardization": {...} | null,
//     "parameters": {...} }
//
// Trees are nested objects: {"feature", "threshold", "gain", "cover",
// "left": {...}, "right": {...}} for splits and {"leaf": value, "cover"} for
// leaves. Doubles are written with round-trip precision, so a reloaded model
// scores bit-identically.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "hitpredict/csv.hpp"
#include "hitpredict/error.hpp"
#include "hitpredict/learners/model.hpp"

namespace hitpredict {

inline constexpr std::string_view kModelFormat = "hitpredict-model";
inline constexpr int kModelFormatVersion = 1;

using json = nlohmann::json;

inline json config_to_json(const TrainConfig& c) {
  return {
      {"variant", variant_name(c.variant)},
      {"seed", c.seed},
      {"hit_decision_threshold", c.hit_decision_threshold},
      {"balanced_class_weight", c.balanced_class_weight},
      {"n_threads", c.n_threads},
      {"lr", {{"learning_rate", c.lr.learning_rate}, {"iterations", c.lr.iterations}}},
      {"tree", {{"max_depth", c.tree.max_depth}, {"min_samples_split", c.tree.min_samples_split}}},
      {"forest",
       {{"n_estimators", c.forest.n_estimators},
        {"max_features", c.forest.max_features},
        {"bootstrap", c.forest.bootstrap},
        {"max_depth", c.forest.max_depth},
        {"min_samples_split", c.forest.min_samples_split}}},
      {"boost",
       {{"n_estimators", c.boost.n_estimators},
        {"learning_rate", c.boost.learning_rate},
        {"lambda", c.boost.lambda},
        {"gamma", c.boost.gamma},
        {"max_depth", c.boost.max_depth},
        {"min_child_weight", c.boost.min_child_weight}}},
      {"mlp",
       {{"hidden1", c.mlp.hidden1},
        {"hidden2", c.mlp.hidden2},
        {"batch_size", c.mlp.batch_size},
        {"epochs", c.mlp.epochs},
        {"learning_rate", c.mlp.learning_rate},
        {"beta1", c.mlp.beta1},
        {"beta2", c.mlp.beta2},
        {"epsilon", c.mlp.epsilon},
        {"zero_output_init", c.mlp.zero_output_init}}},
  };
}

inline TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.variant = parse_variant(j.at("variant").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  c.hit_decision_threshold = j.at("hit_decision_threshold").get<double>();
  c.balanced_class_weight = j.at("balanced_class_weight").get<bool>();
  c.n_threads = j.at("n_threads").get<int>();
  const auto& lr = j.at("lr");
  c.lr.learning_rate = lr.at("learning_rate").get<double>();
  c.lr.iterations = lr.at("iterations").get<int>();
  const auto& tree = j.at("tree");
  c.tree.max_depth = tree.at("max_depth").get<int>();
  c.tree.min_samples_split = tree.at("min_samples_split").get<int>();
  const auto& f = j.at("forest");
  c.forest.n_estimators = f.at("n_estimators").get<int>();
  c.forest.max_features = f.at("max_features").get<int>();
  c.forest.bootstrap = f.at("bootstrap").get<bool>();
  c.forest.max_depth = f.at("max_depth").get<int>();
  c.forest.min_samples_split = f.at("min_samples_split").get<int>();
  const auto& b = j.at("boost");
  c.boost.n_estimators = b.at("n_estimators").get<int>();
  c.boost.learning_rate = b.at("learning_rate").get<double>();
  c.boost.lambda = b.at("lambda").get<double>();
  c.boost.gamma = b.at("gamma").get<double>();
  c.boost.max_depth = b.at("max_depth").get<int>();
  c.boost.min_child_weight = b.at("min_child_weight").get<double>();
  const auto& m = j.at("mlp");
  c.mlp.hidden1 = m.at("hidden1").get<int>();
  c.mlp.hidden2 = m.at("hidden2").get<int>();
  c.mlp.batch_size = m.at("batch_size").get<int>();
  c.mlp.epochs = m.at("epochs").get<int>();
  c.mlp.learning_rate = m.at("learning_rate").get<double>();
  c.mlp.beta1 = m.at("beta1").get<double>();
  c.mlp.beta2 = m.at("beta2").get<double>();
  c.mlp.epsilon = m.at("epsilon").get<double>();
  c.mlp.zero_output_init = m.at("zero_output_init").get<bool>();
  return c;
}

namespace detail {

inline json tree_node_to_json(const Tree& t, std::size_t i) {
  const TreeNode& n = t.nodes[i];
  if (n.is_leaf()) return {{"leaf", n.value}, {"cover", n.cover}};
  return {{"feature", n.feature},
          {"threshold", n.threshold},
          {"gain", n.gain},
          {"cover", n.cover},
          {"value", n.value},
          {"left", tree_node_to_json(t, static_cast<std::size_t>(n.left))},
          {"right", tree_node_to_json(t, static_cast<std::size_t>(n.right))}};
}

// Rebuilds nodes in the same pre-order the growers emit.
inline int tree_node_from_json(const json& j, Tree& t, std::size_t n_features) {
  const int id = static_cast<int>(t.nodes.size());
  t.nodes.push_back({});
  if (j.contains("leaf")) {
    t.nodes.back().value = j.at("leaf").get<double>();
    t.nodes.back().cover = j.value("cover", 0.0);
    return id;
  }
  const int feature = j.at("feature").get<int>();
  if (feature < 0 || static_cast<std::size_t>(feature) >= n_features)
    throw SchemaError("tree node feature index " + std::to_string(feature) + " out of range");
  const int left = tree_node_from_json(j.at("left"), t, n_features);
  const int right = tree_node_from_json(j.at("right"), t, n_features);
  TreeNode& n = t.nodes[static_cast<std::size_t>(id)];
  n.feature = feature;
  n.threshold = j.at("threshold").get<double>();
  n.gain = j.value("gain", 0.0);
  n.cover = j.value("cover", 0.0);
  n.value = j.value("value", 0.0);
  n.left = left;
  n.right = right;
  return id;
}

inline json tree_to_json(const Tree& t) {
  return t.nodes.empty() ? json(nullptr) : tree_node_to_json(t, 0);
}

inline Tree tree_from_json(const json& j, std::size_t n_features) {
  Tree t;
  tree_node_from_json(j, t, n_features);
  return t;
}

struct ParametersToJson {
  json operator()(const LogisticModel& m) const {
    return {{"weights", m.weights}, {"bias", m.bias}, {"final_loss", m.final_loss}};
  }
  json operator()(const TreeModel& m) const { return {{"tree", tree_to_json(m.tree)}}; }
  json operator()(const ForestModel& m) const {
    json trees = json::array();
    for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
    return {{"vote_rule", "leaf_probability>=0.5"}, {"trees", std::move(trees)}};
  }
  json operator()(const BoostedModel& m) const {
    json trees = json::array();
    for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
    return {{"base_score", m.base_score}, {"shrinkage", m.shrinkage}, {"trees", std::move(trees)}};
  }
  json operator()(const MlpModel& m) const {
    json layers = json::array();
    for (const auto& l : m.layers)
      layers.push_back({{"inputs", l.inputs},
                        {"outputs", l.outputs},
                        {"weights", l.weights},
                        {"bias", l.bias},
                        {"activation", &l == &m.layers.back() ? "sigmoid" : "relu"}});
    return {{"layers", std::move(layers)}};
  }
};

inline ModelParameters parameters_from_json(Variant v, const json& j, std::size_t n_features) {
  switch (v) {
    case Variant::LR: {
      LogisticModel m;
      m.weights = j.at("weights").get<std::vector<double>>();
      m.bias = j.at("bias").get<double>();
      m.final_loss = j.value("final_loss", 0.0);
      if (m.weights.size() != n_features) throw SchemaError("LR weight count mismatch");
      return m;
    }
    case Variant::DT:
      return TreeModel{tree_from_json(j.at("tree"), n_features)};
    case Variant::RF: {
      ForestModel m;
      for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t, n_features));
      return m;
    }
    case Variant::GBT: {
      BoostedModel m;
      m.base_score = j.at("base_score").get<double>();
      m.shrinkage = j.at("shrinkage").get<double>();
      for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t, n_features));
      return m;
    }
    case Variant::MLP: {
      MlpModel m;
      std::size_t expected_inputs = n_features;
      for (const auto& lj : j.at("layers")) {
        DenseLayer l;
        l.inputs = lj.at("inputs").get<std::size_t>();
        l.outputs = lj.at("outputs").get<std::size_t>();
        l.weights = lj.at("weights").get<std::vector<double>>();
        l.bias = lj.at("bias").get<std::vector<double>>();
        if (l.inputs != expected_inputs || l.weights.size() != l.inputs * l.outputs ||
            l.bias.size() != l.outputs)
          throw SchemaError("MLP layer shape mismatch");
        expected_inputs = l.outputs;
        m.layers.push_back(std::move(l));
      }
      if (m.layers.empty() || expected_inputs != 1) throw SchemaError("MLP must end in one output");
      return m;
    }
  }
  throw SchemaError("unknown variant");
}

}  // namespace detail

inline json standardization_to_json(const StandardizationParams& p) {
  return {{"mean", p.mean}, {"sd", p.sd}};
}

inline StandardizationParams standardization_from_json(const json& j) {
  StandardizationParams p{j.at("mean").get<std::vector<double>>(),
                          j.at("sd").get<std::vector<double>>()};
  if (p.mean.size() != p.sd.size()) throw SchemaError("standardization mean/sd length mismatch");
  for (double s : p.sd)
    if (!(s > 0.0)) throw SchemaError("standardization sd must be > 0");
  return p;
}

inline json model_to_json(const TrainedModel& m) {
  return {{"format", kModelFormat},
          {"version", kModelFormatVersion},
          {"variant", variant_name(m.variant)},
          {"n_features", m.n_features},
          {"config", config_to_json(m.config)},
          {"standardization",
           m.standardization ? standardization_to_json(*m.standardization) : json(nullptr)},
          {"parameters", std::visit(detail::ParametersToJson{}, m.parameters)}};
}

inline TrainedModel model_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormat)
      throw SchemaError("not a hitpredict model document");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw SchemaError("unsupported model format version " + std::to_string(version));
    TrainedModel m;
    m.variant = parse_variant(j.at("variant").get<std::string>());
    m.n_features = j.at("n_features").get<std::size_t>();
    m.config = config_from_json(j.at("config"));
    if (const auto& s = j.at("standardization"); !s.is_null()) {
      m.standardization = standardization_from_json(s);
      if (m.standardization->size() != m.n_features)
        throw SchemaError("standardization width does not match n_features");
    }
    m.parameters = detail::parameters_from_json(m.variant, j.at("parameters"), m.n_features);
    return m;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed model document: ") + e.what());
  }
}

inline std::string format_model(const TrainedModel& m) { return model_to_json(m).dump(1) + "\n"; }

inline void save_model(const TrainedModel& m, const std::filesystem::path& path) {
  csv::write_file_atomic(path, format_model(m));
}

inline TrainedModel load_model(const std::filesystem::path& path) {
  const std::string text = csv::read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

}  // namespace hitpredict
