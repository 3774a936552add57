// hitpredict: ingest -> label -> train -> evaluate -> report.

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hitpredict/hitpredict.hpp"
#include "hitpredict/ingest/httplib_transport.hpp"

namespace hp = hitpredict;
namespace pl = hitpredict::pipeline;

namespace {

// Every hyperparameter name any model accepts, as --flag-name.
const std::vector<std::string>& all_param_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (auto v : hp::kAllVariants)
      for (auto n : hp::param_names(v))
        if (std::find(out.begin(), out.end(), n) == out.end()) out.emplace_back(n);
    return out;
  }();
  return names;
}

std::string flag_for(std::string name) {
  std::replace(name.begin(), name.end(), '_', '-');
  return "--" + name;
}

struct HyperFlags {
  std::map<std::string, double> values;
  std::vector<std::string> assignments;  // --set name=value

  void attach(CLI::App* cmd) {
    for (const auto& name : all_param_names()) {
      if (name == "threshold") continue;  // --decision-threshold below
      cmd->add_option_function<double>(
          flag_for(name), [this, name](double v) { values[name] = v; },
          "hyperparameter " + name);
    }
    cmd->add_option_function<double>(
        "--decision-threshold", [this](double v) { values["threshold"] = v; },
        "score at or above which a track is predicted a hit (default 0.5)");
    cmd->add_option("--set", assignments, "name=value hyperparameter assignment (repeatable)");
  }

  void apply(hp::TrainConfig& c) const {
    for (const auto& [k, v] : values) hp::set_param(c, k, v);
    for (const auto& a : assignments) {
      const auto eq = a.find('=');
      if (eq == std::string::npos) throw hp::ValidationError("--set expects name=value, got '" + a + "'");
      hp::set_param(c, a.substr(0, eq), hp::csv::parse_double(a.substr(eq + 1), "--set", 0));
    }
  }
};

std::string joined_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predict hit songs from Spotify audio features"};
  app.set_config("--config", "", "TOML/INI file mirroring the command-line flags");
  app.set_version_flag("--version", std::string(pl::kToolVersion));
  app.require_subcommand(1);

  int code = pl::kExitOk;

  // ingest
  pl::IngestOptions ingest;
  std::string fixtures, year_range;
  auto* c_ingest = app.add_subcommand("ingest", "fetch playlist tracks into a records file");
  c_ingest->add_option("--playlists", ingest.playlists_file, "one playlist id per line")->required();
  c_ingest->add_option("--out", ingest.out, "records file (.csv or .jsonl)")->required();
  c_ingest->add_option("--offline-fixtures", fixtures, "replay a recorded transcript; no network");
  c_ingest->add_option("--years", year_range, "keep release years FROM-TO, e.g. 2010-2020");
  c_ingest->add_option("--max-in-flight", ingest.max_in_flight, "concurrent batch requests")
      ->check(CLI::Range(1, 16));
  c_ingest->callback([&] {
    if (!fixtures.empty()) ingest.fixtures_dir = fixtures;
    if (!year_range.empty()) {
      const auto dash = year_range.find('-');
      if (dash == std::string::npos) throw CLI::ValidationError("--years", "expected FROM-TO");
      ingest.year_filter = hp::ingest::YearRange{std::stoi(year_range.substr(0, dash)),
                                                 std::stoi(year_range.substr(dash + 1))};
    }
    ingest.network = [] { return std::make_unique<hp::ingest::HttplibTransport>(); };
    code = pl::cmd_ingest(ingest, std::cout, std::cerr);
  });

  // label
  pl::LabelOptions label;
  auto* c_label = app.add_subcommand("label", "append the hit column");
  c_label->add_option("--in", label.in, "records file")->required();
  c_label->add_option("--out", label.out, "labeled file")->required();
  c_label->add_option("--threshold", label.threshold, "popularity above this is a hit")
      ->capture_default_str();
  c_label->callback([&] { code = pl::cmd_label(label, std::cout, std::cerr); });

  // train
  pl::TrainOptions train;
  std::string train_model, train_split, manifest, indices;
  std::uint64_t train_seed = 0;
  HyperFlags train_flags;
  auto* c_train = app.add_subcommand("train", "train one model on the training partition");
  c_train->add_option("--in", train.in, "labeled file")->required();
  c_train->add_option("--model", train_model, "lr | dt | rf | xgb | nn")->required();
  c_train->add_option("--seed", train_seed, "split and learner seed")->capture_default_str();
  c_train->add_option("--split", train_split, "three-way | nn-two-way (default: nn-two-way for nn)");
  c_train->add_flag("--stratify", train.stratify, "stratify the split by class");
  c_train->add_flag("--balanced", train.config.balanced_class_weight, "weight classes inversely to support");
  c_train->add_option("--threads", train.config.n_threads, "random forest worker threads");
  c_train->add_option("--out", train.out, "model file")->required();
  c_train->add_option("--manifest", manifest, "run manifest (default: <out>.manifest.json)");
  c_train->add_option("--export-indices", indices, "also write the split indices");
  train_flags.attach(c_train);
  c_train->callback([&] {
    code = pl::guarded(std::cerr, [&] {
      const int threads = train.config.n_threads;
      const bool balanced = train.config.balanced_class_weight;
      train.config = hp::TrainConfig::defaults(hp::parse_variant(train_model));
      train.config.n_threads = threads;
      train.config.balanced_class_weight = balanced;
      train.config.seed = train_seed;
      train_flags.apply(train.config);
      if (!train_split.empty()) train.split = pl::parse_split_mode(train_split);
      if (!manifest.empty()) train.manifest = manifest;
      if (!indices.empty()) train.export_indices = indices;
      train.command_line = joined_args(argc, argv);
      return pl::cmd_train(train, std::cout, std::cerr);
    });
  });

  // evaluate
  pl::EvaluateOptions eval;
  std::string eval_model, eval_in, eval_manifest, eval_confusion, roc_csv;
  double eval_threshold = -1;
  auto* c_eval = app.add_subcommand("evaluate", "score a model on one partition");
  c_eval->add_option("--model", eval_model, "model file");
  c_eval->add_option("--in", eval_in, "labeled file the model was trained from");
  c_eval->add_option("--manifest", eval_manifest, "take the split from this manifest");
  c_eval->add_option("--confusion", eval_confusion, "evaluate a stored confusion matrix (JSON)");
  c_eval->add_option("--partition", eval.partition, "test | validation | train | all")
      ->capture_default_str();
  c_eval->add_option("--out", eval.out, "report file")->required();
  c_eval->add_option("--roc-csv", roc_csv, "also write ROC points as fpr,tpr CSV");
  c_eval->add_option("--decision-threshold", eval_threshold, "override the model's threshold");
  c_eval->callback([&] {
    if (!eval_model.empty()) eval.model = eval_model;
    if (!eval_in.empty()) eval.in = eval_in;
    if (!eval_manifest.empty()) eval.manifest = eval_manifest;
    if (!eval_confusion.empty()) eval.confusion = eval_confusion;
    if (!roc_csv.empty()) eval.roc_csv = roc_csv;
    if (eval_threshold >= 0) eval.threshold = eval_threshold;
    code = pl::cmd_evaluate(eval, std::cout, std::cerr);
  });

  // gridsearch
  pl::GridSearchOptions grid;
  std::string grid_model, grid_split;
  HyperFlags grid_flags;
  auto* c_grid = app.add_subcommand("gridsearch", "sweep a hyperparameter grid");
  c_grid->add_option("--model", grid_model, "lr | dt | rf | xgb | nn")->required();
  c_grid->add_option("--grid", grid.grid, "JSON object of name -> [values]")->required();
  c_grid->add_option("--in", grid.in, "labeled file")->required();
  c_grid->add_option("--seed", grid.seed, "seed")->capture_default_str();
  c_grid->add_option("--split", grid_split, "three-way | nn-two-way");
  c_grid->add_option("--out", grid.out, "result file")->required();
  grid_flags.attach(c_grid);
  c_grid->callback([&] {
    code = pl::guarded(std::cerr, [&] {
      grid.base = hp::TrainConfig::defaults(hp::parse_variant(grid_model));
      grid_flags.apply(grid.base);
      if (!grid_split.empty()) grid.split = pl::parse_split_mode(grid_split);
      return pl::cmd_gridsearch(grid, std::cout, std::cerr);
    });
  });

  // synth
  pl::SynthCommandOptions synth;
  auto* c_synth = app.add_subcommand("synth", "generate a labeled dataset (2063 rows, 237 hits by default)");
  c_synth->add_option("--n", synth.synth.n, "rows")->capture_default_str();
  c_synth->add_option("--hits", synth.synth.hits, "rows labeled hit")->capture_default_str();
  c_synth->add_option("--seed", synth.synth.seed, "seed")->capture_default_str();
  c_synth->add_option("--threshold", synth.synth.threshold, "hit popularity threshold")
      ->capture_default_str();
  c_synth->add_option("--out", synth.out, "labeled file")->required();
  c_synth->callback([&] { code = pl::cmd_synth(synth, std::cout, std::cerr); });

  // report
  pl::ReportOptions report;
  auto* c_report = app.add_subcommand("report", "combine evaluation reports into one table");
  c_report->add_option("--reports", report.reports, "report files")->required();
  c_report->add_option("--out", report.out, "summary (.md or .csv)")->required();
  c_report->callback([&] { code = pl::cmd_report(report, std::cout, std::cerr); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? pl::kExitOk : pl::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return pl::kExitInternal;
  }
  return code;
}
