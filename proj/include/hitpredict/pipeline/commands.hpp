#pragma once

// The command implementations behind the CLI. Each returns a process exit
// code and writes outputs only after every step succeeded:
//
//   0 success
//   1 unexpected internal error
//   2 configuration, usage, schema or I/O error
//   3 transport exhaustion (network retries used up)
//   4 training data with a single class

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hitpredict/csv.hpp"
#include "hitpredict/error.hpp"
#include "hitpredict/evaluation.hpp"
#include "hitpredict/ingest/http.hpp"
#include "hitpredict/ingest/spotify_client.hpp"
#include "hitpredict/learners/grid_search.hpp"
#include "hitpredict/learners/importance.hpp"
#include "hitpredict/learners/model.hpp"
#include "hitpredict/learners/model_io.hpp"
#include "hitpredict/pipeline/synth.hpp"
#include "hitpredict/records_io.hpp"
#include "hitpredict/split.hpp"
#include "hitpredict/standardize.hpp"
#include "hitpredict/track.hpp"

namespace hitpredict::pipeline {

inline constexpr std::string_view kToolVersion = "1.0.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitTransport = 3,
  kExitSingleClass = 4,
};

inline constexpr const char* kClientIdEnv = "SPOTIFY_CLIENT_ID";
inline constexpr const char* kClientSecretEnv = "SPOTIFY_CLIENT_SECRET";

using ojson = nlohmann::ordered_json;

// 64-bit FNV-1a of the file contents, hex. Identifies inputs in manifests; not
// a cryptographic digest.
inline std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

inline std::string now_utc() { return ingest::format_utc(std::chrono::system_clock::now()); }

// Runs `body`, mapping library exceptions onto exit codes and printing the
// message to `err`.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const TrainingError& e) {
    err << "error: " << e.what() << '\n';
    return kExitSingleClass;
  } catch (const TransportError& e) {
    err << "error: " << e.what() << '\n';
    return kExitTransport;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

// ---------------------------------------------------------------- ingest

struct IngestOptions {
  std::filesystem::path playlists_file;
  std::filesystem::path out;
  std::optional<std::filesystem::path> fixtures_dir;  // offline replay
  std::optional<ingest::YearRange> year_filter;
  std::optional<std::string> api_base;
  std::optional<std::string> accounts_base;
  std::size_t max_in_flight = 1;
  // Creates the network transport in online mode. Never called offline.
  std::function<std::unique_ptr<ingest::HttpTransport>()> network;
  // Environment lookup, replaceable in tests.
  std::function<std::optional<std::string>(const char*)> getenv = [](const char* name) {
    const char* v = std::getenv(name);
    return v ? std::optional<std::string>(v) : std::nullopt;
  };
};

// One playlist per line: id, then optional whitespace and a description.
// Blank lines and lines starting with '#' are ignored.
inline std::vector<ingest::PlaylistRef> parse_playlists(std::string_view text) {
  std::vector<ingest::PlaylistRef> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    const auto end = line.find_first_of(" \t\r", start);
    ingest::PlaylistRef p;
    p.playlist_id = line.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (end != std::string::npos) {
      const auto d = line.find_first_not_of(" \t", end);
      if (d != std::string::npos) {
        p.description = line.substr(d);
        while (!p.description.empty() && p.description.back() == '\r') p.description.pop_back();
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

inline int cmd_ingest(const IngestOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto playlists = parse_playlists(csv::read_file(opt.playlists_file));
    if (playlists.empty()) throw ValidationError("no playlists in '" + opt.playlists_file.string() + "'");

    ingest::ClientOptions copt;
    copt.max_in_flight = opt.max_in_flight;
    if (opt.api_base) copt.api_base = *opt.api_base;
    if (opt.accounts_base) copt.accounts_base = *opt.accounts_base;

    auto id = opt.getenv(kClientIdEnv);
    auto secret = opt.getenv(kClientSecretEnv);
    std::unique_ptr<ingest::HttpTransport> transport;
    std::unique_ptr<ingest::Clock> clock;
    if (opt.fixtures_dir) {
      transport = std::make_unique<ingest::FixtureTransport>(
          ingest::FixtureTransport::from_file(*opt.fixtures_dir / "transcript.json"));
      clock = std::make_unique<ingest::VirtualClock>();
      if (!id || id->empty()) id = "fixture-client";
      if (!secret || secret->empty()) secret = "fixture-secret";
    } else {
      if (!id || !secret || id->empty() || secret->empty())
        throw ValidationError(std::string("missing credentials: set ") + kClientIdEnv + " and " +
                              kClientSecretEnv + " (or pass --offline-fixtures)");
      if (!opt.network) throw ValidationError("no network transport available in this build");
      transport = opt.network();
      clock = std::make_unique<ingest::SystemClock>();
    }

    ingest::SpotifyClient client({*id, *secret}, *transport, *clock, copt);
    const auto built = client.build_dataset(playlists, opt.year_filter);
    write_record_table(opt.out, built.records);

    const auto& s = built.summary;
    out << "playlists: " << s.playlists << "\n"
        << "playlist items: " << s.playlist_items << "\n"
        << "unique tracks: " << s.unique_ids << "\n"
        << "dropped: " << s.dropped() << " (missing popularity " << s.missing_popularity
        << ", missing audio features " << s.missing_features << ", invalid " << s.invalid << ")\n"
        << "duplicates removed: " << s.duplicates_removed << "\n"
        << "year filtered: " << s.year_filtered << "\n"
        << "records written: " << s.records << " -> " << opt.out.string() << "\n";
    if (!s.snapshot_utc.empty()) out << "popularity snapshot: " << s.snapshot_utc << "\n";
    return kExitOk;
  });
}

// ---------------------------------------------------------------- label

struct LabelOptions {
  std::filesystem::path in;
  std::filesystem::path out;
  int threshold = kDefaultHitThreshold;
};

inline int cmd_label(const LabelOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RecordTable table = read_record_table(opt.in);
    if (table.records.empty()) throw SchemaError("'" + opt.in.string() + "' contains no records");
    Labels hits;
    hits.reserve(table.records.size());
    for (const auto& r : table.records) hits.push_back(label_hit(r.popularity, opt.threshold));
    write_record_table(opt.out, table.records, &hits);
    const auto c = class_distribution(hits);
    out << c.negatives << " non hits, " << c.positives << " hits (threshold > " << opt.threshold
        << ")\n";
    return kExitOk;
  });
}

// ---------------------------------------------------------------- train

enum class SplitMode { ThreeWay, TwoWay };

inline std::string_view split_mode_name(SplitMode m) {
  return m == SplitMode::ThreeWay ? "three-way" : "nn-two-way";
}

inline SplitMode parse_split_mode(std::string_view s) {
  if (s == "three-way") return SplitMode::ThreeWay;
  if (s == "nn-two-way" || s == "two-way") return SplitMode::TwoWay;
  throw ValidationError("unknown split '" + std::string(s) + "' (expected three-way or nn-two-way)");
}

struct SplitSpec {
  SplitMode mode = SplitMode::ThreeWay;
  std::uint64_t seed = 0;
  bool stratified = false;
};

inline SplitIndices make_split(const SplitSpec& s, std::span<const int> labels) {
  if (s.mode == SplitMode::ThreeWay)
    return s.stratified ? split_stratified(labels, s.seed) : split(labels.size(), s.seed);
  return s.stratified ? split_two_way_stratified(labels, s.seed)
                      : split_two_way(labels.size(), s.seed);
}

inline ojson split_spec_to_json(const SplitSpec& s) {
  return {{"mode", split_mode_name(s.mode)}, {"seed", s.seed}, {"stratified", s.stratified}};
}

inline SplitSpec split_spec_from_json(const nlohmann::json& j) {
  return {parse_split_mode(j.at("mode").get<std::string>()), j.at("seed").get<std::uint64_t>(),
          j.value("stratified", false)};
}

struct TrainOptions {
  std::filesystem::path in;
  std::filesystem::path out;
  std::optional<std::filesystem::path> manifest;  // default: <out stem>.manifest.json
  std::optional<std::filesystem::path> export_indices;
  TrainConfig config;
  std::optional<SplitMode> split;  // default: nn-two-way for nn, else three-way
  bool stratify = false;
  std::string command_line;
};

inline std::filesystem::path default_manifest_path(const std::filesystem::path& model_path) {
  auto p = model_path;
  p.replace_extension(".manifest.json");
  return p;
}

inline ojson indices_json(const SplitIndices& s) {
  return {{"seed", s.seed}, {"train", s.train}, {"validation", s.validation}, {"test", s.test}};
}

inline int cmd_train(const TrainOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const std::string started = now_utc();
    opt.config.validate();
    const std::string raw = csv::read_file(opt.in);
    const LabeledDataset data = load_labeled_dataset(opt.in);
    if (data.size() == 0) throw SchemaError("'" + opt.in.string() + "' contains no records");
    const auto counts = class_distribution(data.labels);
    if (counts.negatives == 0 || counts.positives == 0)
      throw TrainingError("'" + opt.in.string() + "' contains a single class");

    SplitSpec spec;
    spec.mode = opt.split.value_or(opt.config.variant == Variant::MLP ? SplitMode::TwoWay
                                                                      : SplitMode::ThreeWay);
    spec.seed = opt.config.seed;
    spec.stratified = opt.stratify;
    const SplitIndices parts = make_split(spec, data.labels);

    const Matrix x_train = data.features.select_rows(parts.train);
    const auto y_train = select<int>(data.labels, parts.train);
    const TrainedModel model = train_on_raw(x_train, y_train, opt.config);

    const std::string digest = fnv1a64_hex(raw);
    auto doc = model_to_json(model);
    doc["training"] = {{"split", split_spec_to_json(spec)},
                       {"n_rows", data.size()},
                       {"data_digest", "fnv1a64:" + digest}};

    const auto manifest_path = opt.manifest.value_or(default_manifest_path(opt.out));
    ojson manifest;
    manifest["tool"] = "hitpredict";
    manifest["tool_version"] = kToolVersion;
    manifest["command"] = opt.command_line.empty() ? "train" : opt.command_line;
    manifest["config"] = config_to_json(opt.config);
    manifest["split"] = split_spec_to_json(spec);
    manifest["split"]["n_rows"] = data.size();
    manifest["split"]["train"] = parts.train.size();
    manifest["split"]["validation"] = parts.validation.size();
    manifest["split"]["test"] = parts.test.size();
    manifest["class_counts"] = {{"non_hits", counts.negatives}, {"hits", counts.positives}};
    manifest["inputs"] = ojson::array({{{"path", opt.in.string()},
                                        {"digest", "fnv1a64:" + digest},
                                        {"rows", data.size()}}});
    manifest["outputs"] = {{"model", opt.out.string()}, {"manifest", manifest_path.string()}};
    if (opt.export_indices) manifest["outputs"]["indices"] = opt.export_indices->string();
    manifest["started_utc"] = started;
    manifest["finished_utc"] = now_utc();

    csv::write_file_atomic(opt.out, doc.dump(1) + "\n");
    csv::write_file_atomic(manifest_path, manifest.dump(2) + "\n");
    if (opt.export_indices) csv::write_file_atomic(*opt.export_indices, indices_json(parts).dump(1) + "\n");

    out << "trained " << variant_name(model.variant) << " on " << parts.train.size()
        << " rows (split " << split_mode_name(spec.mode) << ": train " << parts.train.size()
        << ", validation " << parts.validation.size() << ", test " << parts.test.size() << ")\n"
        << "model -> " << opt.out.string() << "\nmanifest -> " << manifest_path.string() << "\n";
    return kExitOk;
  });
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOptions {
  std::optional<std::filesystem::path> model;
  std::optional<std::filesystem::path> in;
  std::optional<std::filesystem::path> manifest;   // overrides the split stored in the model
  std::optional<std::filesystem::path> confusion;  // evaluate a stored matrix instead
  std::string partition = "validation";            // test | validation | train | all
  std::filesystem::path out;
  std::optional<std::filesystem::path> roc_csv;
  std::optional<double> threshold;  // default: the model's decision threshold
  bool importance = true;           // rf/xgb only
};

inline ConfusionMatrix confusion_from_json(const nlohmann::json& j) {
  auto count = [&](const char* k) {
    const auto v = j.at(k).get<std::int64_t>();
    if (v < 0) throw ValidationError(std::string("confusion count '") + k + "' is negative");
    return v;
  };
  return {count("tn"), count("fp"), count("fn"), count("tp")};
}

// Rows of `partition` under the split recorded for the model.
inline std::vector<std::size_t> partition_rows(const SplitIndices& parts, SplitMode mode,
                                               std::string_view partition, std::size_t n) {
  if (partition == "test") return parts.test;
  if (partition == "validation")
    return mode == SplitMode::TwoWay ? parts.test : parts.validation;  // the 30% hold-out
  if (partition == "train") return parts.train;
  if (partition == "all") {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }
  throw ValidationError("unknown partition '" + std::string(partition) +
                        "' (expected test, validation, train or all)");
}

inline int cmd_evaluate(const EvaluateOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    EvaluationReport report;
    if (opt.confusion) {
      const auto j = nlohmann::json::parse(csv::read_file(*opt.confusion));
      report = report_from_confusion(confusion_from_json(j.contains("confusion") ? j.at("confusion") : j),
                                     j.value("model", std::string("confusion")),
                                     j.value("partition", std::string("confusion")));
    } else {
      if (!opt.model || !opt.in) throw ValidationError("evaluate needs --model and --in (or --confusion)");
      const auto doc = nlohmann::json::parse(csv::read_file(*opt.model));
      const TrainedModel model = model_from_json(doc);
      const LabeledDataset data = load_labeled_dataset(*opt.in);

      nlohmann::json training;
      if (opt.manifest) {
        const auto m = nlohmann::json::parse(csv::read_file(*opt.manifest));
        training["split"] = m.at("split");
        training["n_rows"] = m.at("split").at("n_rows");
      } else if (doc.contains("training")) {
        training = doc.at("training");
      } else {
        throw ValidationError("model has no recorded split; pass --manifest");
      }
      const SplitSpec spec = split_spec_from_json(training.at("split"));
      const auto n_rows = training.at("n_rows").get<std::size_t>();
      if (n_rows != data.size())
        throw SchemaError("model was trained on " + std::to_string(n_rows) + " rows, '" +
                          opt.in->string() + "' has " + std::to_string(data.size()));
      if (model.n_features != data.features.cols())
        throw SchemaError("model expects " + std::to_string(model.n_features) + " features");

      const SplitIndices parts = make_split(spec, data.labels);
      const auto rows = partition_rows(parts, spec.mode, opt.partition, data.size());
      const Matrix x = data.features.select_rows(rows);
      const auto y = select<int>(data.labels, rows);
      report = evaluate(model, x, y, opt.threshold.value_or(model.config.hit_decision_threshold));
      report.partition = opt.partition;

      if (opt.importance && (model.variant == Variant::RF || model.variant == Variant::GBT)) {
        FeatureImportance fi;
        for (auto name : kFeatureNames) fi.names.emplace_back(name);
        fi.values = impurity_importance(model);
        report.importance = std::move(fi);
      }
    }

    csv::write_file_atomic(opt.out, report_to_json(report).dump(2) + "\n");
    if (opt.roc_csv) {
      if (!report.roc) throw ValidationError("no ROC curve available for this evaluation");
      csv::write_file_atomic(*opt.roc_csv, roc_to_csv(*report.roc));
    }
    const auto& w = report.metrics.weighted;
    out << std::fixed << std::setprecision(4) << report.model << " [" << report.partition
        << "] n=" << report.confusion.total() << " accuracy " << w.accuracy << " precision "
        << w.precision << " recall " << w.recall << " f1 " << w.f1;
    if (report.roc) out << " auc " << report.roc->auc;
    out << '\n';
    return kExitOk;
  });
}

// ---------------------------------------------------------------- gridsearch

struct GridSearchOptions {
  std::filesystem::path in;
  std::filesystem::path grid;
  std::filesystem::path out;
  TrainConfig base;
  std::optional<SplitMode> split;
  std::uint64_t seed = 0;
};

inline ParamGrid parse_grid(const nlohmann::json& j) {
  if (!j.is_object() || j.empty()) throw ValidationError("grid file must be a non-empty JSON object");
  ParamGrid g;
  for (const auto& [name, values] : j.items()) {
    if (!values.is_array() || values.empty())
      throw ValidationError("grid parameter '" + name + "' needs a non-empty array");
    for (const auto& v : values) {
      if (!v.is_number()) throw ValidationError("grid parameter '" + name + "' has a non-number");
      g[name].push_back(v.get<double>());
    }
  }
  return g;
}

inline ojson params_json(const std::map<std::string, double>& params) {
  ojson j = ojson::object();
  for (const auto& [k, v] : params) j[k] = v;
  return j;
}

// Sweeps the training partition of the model's usual split; each cell is
// scored on a seeded 75/25 hold-out inside it.
inline int cmd_gridsearch(const GridSearchOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ParamGrid grid = parse_grid(nlohmann::json::parse(csv::read_file(opt.grid)));
    for (const auto& [name, values] : grid)
      for (double v : values) {
        TrainConfig probe = opt.base;
        set_param(probe, name, v);
      }
    const LabeledDataset data = load_labeled_dataset(opt.in);
    const auto counts = class_distribution(data.labels);
    if (counts.negatives == 0 || counts.positives == 0)
      throw TrainingError("'" + opt.in.string() + "' contains a single class");

    SplitSpec spec;
    spec.mode = opt.split.value_or(opt.base.variant == Variant::MLP ? SplitMode::TwoWay
                                                                    : SplitMode::ThreeWay);
    spec.seed = opt.seed;
    const SplitIndices parts = make_split(spec, data.labels);
    const Matrix x = data.features.select_rows(parts.train);
    const auto y = select<int>(data.labels, parts.train);

    TrainConfig base = opt.base;
    base.seed = opt.seed;
    const GridSearchResult result = grid_search(base, grid, x, y, opt.seed);

    ojson j;
    j["format"] = "hitpredict-gridsearch";
    j["version"] = 1;
    j["model"] = variant_name(base.variant);
    j["seed"] = opt.seed;
    j["split"] = split_spec_to_json(spec);
    j["scoring"] = "weighted_f1 on 25% hold-out of the training partition";
    j["best_params"] = params_json(result.best_params);
    j["best_score"] = result.best_score;
    j["best_config"] = config_to_json(result.best_config);
    ojson cells = ojson::array();
    for (const auto& c : result.all_cells)
      cells.push_back({{"params", params_json(c.params)}, {"score", c.score}});
    j["cells"] = std::move(cells);
    csv::write_file_atomic(opt.out, j.dump(2) + "\n");

    out << "evaluated " << result.all_cells.size() << " cells; best weighted F1 "
        << result.best_score << " with " << params_json(result.best_params).dump() << '\n';
    return kExitOk;
  });
}

// ---------------------------------------------------------------- synth

struct SynthCommandOptions {
  SynthOptions synth;
  std::filesystem::path out;
};

inline int cmd_synth(const SynthCommandOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const SynthDataset ds = synthesize(opt.synth);
    write_record_table(opt.out, ds.records, &ds.labels);
    const auto c = class_distribution(ds.labels);
    out << "wrote " << ds.records.size() << " rows (" << c.negatives << " non hits, "
        << c.positives << " hits) -> " << opt.out.string() << '\n';
    return kExitOk;
  });
}

// ---------------------------------------------------------------- report

struct ReportOptions {
  std::vector<std::filesystem::path> reports;
  std::filesystem::path out;  // .csv for CSV, anything else Markdown
};

struct ReportRow {
  std::string model;
  double accuracy = 0, precision = 0, recall = 0, f1 = 0;
  std::map<std::string, double> importance;
};

inline ReportRow read_report_row(const std::filesystem::path& path) {
  const auto j = nlohmann::json::parse(csv::read_file(path));
  auto need = [&](const nlohmann::json& obj, const char* key, const std::string& where) -> const nlohmann::json& {
    if (!obj.is_object() || !obj.contains(key))
      throw SchemaError("report '" + path.string() + "' is missing field '" + where + key + "'");
    return obj.at(key);
  };
  ReportRow row;
  row.model = j.value("model", path.stem().string());
  const auto& w = need(need(j, "metrics", ""), "weighted", "metrics.");
  row.accuracy = need(w, "accuracy", "metrics.weighted.").get<double>();
  row.precision = need(w, "precision", "metrics.weighted.").get<double>();
  row.recall = need(w, "recall", "metrics.weighted.").get<double>();
  row.f1 = need(w, "f1", "metrics.weighted.").get<double>();
  if (j.contains("feature_importance"))
    for (const auto& [k, v] : j.at("feature_importance").items()) row.importance[k] = v.get<double>();
  return row;
}

inline std::string format_report(const std::vector<ReportRow>& rows, bool as_csv) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  std::vector<const ReportRow*> with_importance;
  for (const auto& r : rows)
    if (!r.importance.empty()) with_importance.push_back(&r);

  if (as_csv) {
    out << "model,accuracy,precision,recall,f1\n";
    for (const auto& r : rows)
      out << csv::escape(r.model) << ',' << r.accuracy << ',' << r.precision << ',' << r.recall
          << ',' << r.f1 << '\n';
    if (!with_importance.empty()) {
      out << "\nfeature";
      for (const auto* r : with_importance) out << ',' << csv::escape(r->model);
      out << '\n' << std::setprecision(6);
      for (auto name : kFeatureNames) {
        out << name;
        for (const auto* r : with_importance) {
          const auto it = r->importance.find(std::string(name));
          out << ',' << (it == r->importance.end() ? 0.0 : it->second);
        }
        out << '\n';
      }
    }
    return out.str();
  }

  out << "| Model | Accuracy | Precision | Recall | F1 score |\n"
      << "|---|---|---|---|---|\n";
  for (const auto& r : rows)
    out << "| " << r.model << " | " << r.accuracy << " | " << r.precision << " | " << r.recall
        << " | " << r.f1 << " |\n";
  if (!with_importance.empty()) {
    out << "\n| Feature |";
    for (const auto* r : with_importance) out << ' ' << r->model << " |";
    out << "\n|---|";
    for (std::size_t k = 0; k < with_importance.size(); ++k) out << "---|";
    out << '\n' << std::setprecision(4);
    for (auto name : kFeatureNames) {
      out << "| " << name << " |";
      for (const auto* r : with_importance) {
        const auto it = r->importance.find(std::string(name));
        out << ' ' << (it == r->importance.end() ? 0.0 : it->second) << " |";
      }
      out << '\n';
    }
  }
  return out.str();
}

inline int cmd_report(const ReportOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opt.reports.empty()) throw ValidationError("report needs at least one --reports file");
    std::vector<ReportRow> rows;
    for (const auto& p : opt.reports) rows.push_back(read_report_row(p));
    const bool as_csv = opt.out.extension() == ".csv";
    const std::string text = format_report(rows, as_csv);
    csv::write_file_atomic(opt.out, text);
    out << "combined " << rows.size() << " reports -> " << opt.out.string() << '\n';
    return kExitOk;
  });
}

}  // namespace hitpredict::pipeline
