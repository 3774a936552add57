#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "hitpredict/hitpredict.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace hp = hitpredict;
namespace pl = hitpredict::pipeline;
namespace fs = std::filesystem;
using testutil::TempDir;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI with stdout and stderr captured together.
Run cli(const std::string& args, const std::string& env = "") {
  Run r;
  const std::string cmd = env + " '" HITPREDICT_CLI "' " + args + " 2>&1";
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(hp::csv::read_file(p)); }

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

const fs::path kSource = HITPREDICT_SOURCE_DIR;

// Full-size synthetic data, shared by the slower tests.
const fs::path& synth_file() {
  static TempDir dir;
  static const fs::path path = [] {
    const auto p = dir / "synth.csv";
    pl::SynthCommandOptions o;
    o.synth.seed = 7;
    o.out = p;
    std::ostringstream out, err;
    if (pl::cmd_synth(o, out, err) != 0) throw std::runtime_error(err.str());
    return p;
  }();
  return path;
}

}  // namespace

TEST(Synth, DefaultShape) {
  const auto table = hp::read_record_table(synth_file());
  ASSERT_EQ(table.records.size(), 2063u);
  ASSERT_TRUE(table.hits.has_value());
  int hits = 0, lo = 100, hi = -1;
  double sum = 0;
  for (std::size_t i = 0; i < table.records.size(); ++i) {
    const auto& r = table.records[i];
    EXPECT_NO_THROW(hp::validate(r));
    EXPECT_EQ((*table.hits)[i], hp::label_hit(r.popularity));
    hits += (*table.hits)[i];
    lo = std::min(lo, r.popularity);
    hi = std::max(hi, r.popularity);
    sum += r.popularity;
  }
  EXPECT_EQ(hits, 237);
  EXPECT_EQ(lo, 0);
  EXPECT_EQ(hi, 82);
  EXPECT_NEAR(sum / 2063, 25.0, 2.0);
}

TEST(Synth, SmallCliRun) {
  TempDir d;
  const auto r = cli("synth --n 10 --hits 5 --seed 3 --out " + q(d / "s.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto ds = hp::load_labeled_dataset(d / "s.csv");
  const auto c = hp::class_distribution(ds.labels);
  EXPECT_EQ(c.positives, 5u);
  EXPECT_EQ(c.negatives, 5u);
  EXPECT_EQ(cli("synth --n 10 --hits 10 --out " + q(d / "x.csv")).code, 2);
  EXPECT_FALSE(fs::exists(d / "x.csv"));
}

TEST(Label, CountsAndThreshold) {
  TempDir d;
  // Strip the hit column by round-tripping through plain records.
  hp::save_records(hp::load_records(synth_file()), d / "raw.csv");
  const auto r = cli("label --in " + q(d / "raw.csv") + " --out " + q(d / "l.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("1826 non hits, 237 hits"), std::string::npos) << r.out;

  auto hits_at = [&](int t) {
    const auto out = d / ("t" + std::to_string(t) + ".csv");
    EXPECT_EQ(cli("label --threshold " + std::to_string(t) + " --in " + q(d / "raw.csv") + " --out " + q(out)).code, 0);
    return hp::class_distribution(hp::load_labeled_dataset(out).labels).positives;
  };
  EXPECT_GT(hits_at(25), hits_at(47));
}

TEST(Label, EmptyInputFails) {
  TempDir d;
  hp::csv::write_file_atomic(d / "empty.csv", "");
  const auto r = cli("label --in " + q(d / "empty.csv") + " --out " + q(d / "o.csv"));
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(fs::exists(d / "o.csv"));
}

TEST(Train, ManifestSplitSizes) {
  TempDir d;
  auto r = cli("train --model rf --seed 1 --in " + q(synth_file()) + " --out " + q(d / "rf.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  auto m = read_json(d / "rf.manifest.json");
  EXPECT_EQ(m["split"]["train"], 1237);
  EXPECT_EQ(m["split"]["validation"], 413);
  EXPECT_EQ(m["split"]["test"], 413);
  EXPECT_EQ(m["split"]["n_rows"], 2063);
  EXPECT_EQ(m["class_counts"]["hits"], 237);
  for (const char* k : {"tool", "tool_version", "command", "config", "inputs", "outputs", "started_utc", "finished_utc"})
    EXPECT_TRUE(m.contains(k)) << k;

  r = cli("train --model nn --seed 1 --in " + q(synth_file()) + " --out " + q(d / "nn.json") +
          " --export-indices " + q(d / "idx.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  m = read_json(d / "nn.manifest.json");
  EXPECT_EQ(m["split"]["mode"], "nn-two-way");
  EXPECT_EQ(m["split"]["test"], 619);
  EXPECT_EQ(m["split"]["train"], 1444);
  const auto idx = read_json(d / "idx.json");
  EXPECT_EQ(idx["test"].size(), 619u);
}

TEST(Train, DeterministicModelFiles) {
  TempDir d;
  for (const char* model : {"lr", "dt", "rf", "xgb", "nn"}) {
    for (const char* f : {"a.json", "b.json"}) {
      const auto r = cli(std::string("train --model ") + model + " --seed 4 --in " + q(synth_file()) + " --out " + q(d / f));
      ASSERT_EQ(r.code, 0) << model << r.out;
    }
    EXPECT_EQ(hp::csv::read_file(d / "a.json"), hp::csv::read_file(d / "b.json")) << model;
  }
}

TEST(Train, SingleClassExitsFour) {
  TempDir d;
  std::vector<hp::TrackRecord> rs;
  for (int i = 0; i < 20; ++i) rs.push_back(testutil::record("t" + std::to_string(i), "T" + std::to_string(i), "A", 10));
  hp::Labels y(rs.size(), 0);
  hp::write_record_table(d / "one.csv", rs, &y);
  const auto r = cli("train --model lr --in " + q(d / "one.csv") + " --out " + q(d / "m.json"));
  EXPECT_EQ(r.code, 4) << r.out;
  EXPECT_NE(r.out.find("single class"), std::string::npos);
  EXPECT_FALSE(fs::exists(d / "m.json"));
  EXPECT_FALSE(fs::exists(d / "m.manifest.json"));
}

TEST(Train, BadConfigExitsTwo) {
  TempDir d;
  EXPECT_EQ(cli("train --model svm --in " + q(synth_file()) + " --out " + q(d / "m.json")).code, 2);
  EXPECT_EQ(cli("train --model rf --n-estimators 0 --in " + q(synth_file()) + " --out " + q(d / "m.json")).code, 2);
  EXPECT_EQ(cli("train --model rf --set bogus=1 --in " + q(synth_file()) + " --out " + q(d / "m.json")).code, 2);
  EXPECT_FALSE(fs::exists(d / "m.json"));
}

TEST(Evaluate, SeparableDataFitsTrainPartition) {
  TempDir d;
  std::vector<hp::TrackRecord> rs;
  hp::Labels y;
  hp::SplitMix64 rng(9);
  for (int i = 0; i < 200; ++i) {
    auto r = testutil::record("t" + std::to_string(i), "T" + std::to_string(i), "A", 0);
    r.danceability = rng.uniform01();
    r.energy = rng.uniform01();
    y.push_back(r.danceability > 0.7 ? 1 : 0);
    r.popularity = y.back() ? 60 : 10;
    rs.push_back(r);
  }
  hp::write_record_table(d / "sep.csv", rs, &y);
  ASSERT_EQ(cli("train --model dt --in " + q(d / "sep.csv") + " --out " + q(d / "dt.json")).code, 0);
  const auto r = cli("evaluate --partition train --model " + q(d / "dt.json") + " --in " + q(d / "sep.csv") +
                     " --out " + q(d / "rep.json") + " --roc-csv " + q(d / "roc.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto rep = read_json(d / "rep.json");
  EXPECT_DOUBLE_EQ(rep["metrics"]["weighted"]["accuracy"].get<double>(), 1.0);
  EXPECT_EQ(rep["n"], 120);  // 60% of 200
  EXPECT_TRUE(fs::exists(d / "roc.csv"));
}

TEST(Evaluate, GoldenConfusionFiles) {
  TempDir d;
  for (const char* m : {"lr", "dt", "rf", "xgb", "nn"}) {
    const auto g = kSource / "fixtures" / "golden" / (std::string(m) + ".json");
    const auto out = d / (std::string(m) + ".json");
    const auto r = cli("evaluate --confusion " + q(g) + " --out " + q(out));
    ASSERT_EQ(r.code, 0) << r.out;
    const auto gold = read_json(g)["confusion"];
    const auto o = oracle::weighted_from_counts(gold["tn"], gold["fp"], gold["fn"], gold["tp"]);
    const auto w = read_json(out)["metrics"]["weighted"];
    EXPECT_NEAR(w["accuracy"].get<double>(), o.accuracy, 1e-6) << m;
    EXPECT_NEAR(w["precision"].get<double>(), o.precision, 1e-6) << m;
    EXPECT_NEAR(w["recall"].get<double>(), o.recall, 1e-6) << m;
    EXPECT_NEAR(w["f1"].get<double>(), o.f1, 1e-6) << m;
  }
}

TEST(Evaluate, ModelImportanceAndValidationPartition) {
  TempDir d;
  ASSERT_EQ(cli("train --model xgb --seed 2 --in " + q(synth_file()) + " --out " + q(d / "x.json")).code, 0);
  const auto r = cli("evaluate --model " + q(d / "x.json") + " --in " + q(synth_file()) + " --out " + q(d / "r.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto rep = read_json(d / "r.json");
  EXPECT_EQ(rep["n"], 413);
  double total = 0;
  for (const auto& [k, v] : rep["feature_importance"].items()) total += v.get<double>();
  EXPECT_NEAR(total, 1.0, 1e-9);
  // A different file than the one trained on is rejected.
  TempDir d2;
  ASSERT_EQ(cli("synth --n 50 --hits 5 --out " + q(d2 / "small.csv")).code, 0);
  EXPECT_EQ(cli("evaluate --model " + q(d / "x.json") + " --in " + q(d2 / "small.csv") + " --out " + q(d2 / "r.json")).code, 2);
  EXPECT_FALSE(fs::exists(d2 / "r.json"));
}

TEST(GridSearch, CellsAndDeterminism) {
  TempDir d;
  hp::csv::write_file_atomic(d / "g1.json", R"({"max_depth": [3]})");
  auto r = cli("gridsearch --model dt --grid " + q(d / "g1.json") + " --in " + q(synth_file()) + " --out " + q(d / "o1.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  auto j = read_json(d / "o1.json");
  EXPECT_EQ(j["cells"].size(), 1u);
  EXPECT_EQ(j["best_params"]["max_depth"], 3.0);

  hp::csv::write_file_atomic(d / "g2.json", R"({"max_depth": [2, 4], "min_samples_split": [2, 10]})");
  for (const char* f : {"a.json", "b.json"})
    ASSERT_EQ(cli("gridsearch --model dt --seed 3 --grid " + q(d / "g2.json") + " --in " + q(synth_file()) + " --out " + q(d / f)).code, 0);
  j = read_json(d / "a.json");
  EXPECT_EQ(j["cells"].size(), 4u);
  double best = -1;
  for (const auto& c : j["cells"]) best = std::max(best, c["score"].get<double>());
  EXPECT_DOUBLE_EQ(j["best_score"].get<double>(), best);
  EXPECT_EQ(hp::csv::read_file(d / "a.json"), hp::csv::read_file(d / "b.json"));

  hp::csv::write_file_atomic(d / "bad.json", R"({"no_such_param": [1]})");
  EXPECT_EQ(cli("gridsearch --model dt --grid " + q(d / "bad.json") + " --in " + q(synth_file()) + " --out " + q(d / "bad_out.json")).code, 2);
  EXPECT_FALSE(fs::exists(d / "bad_out.json"));
}

TEST(Report, CombinesGoldenReports) {
  TempDir d;
  std::string args;
  for (const char* m : {"lr", "dt", "rf", "xgb", "nn"}) {
    const auto out = d / (std::string(m) + ".json");
    ASSERT_EQ(cli("evaluate --confusion " + q(kSource / "fixtures" / "golden" / (std::string(m) + ".json")) + " --out " + q(out)).code, 0);
    args += " " + q(out);
  }
  ASSERT_EQ(cli("report --reports" + args + " --out " + q(d / "t.md")).code, 0);
  const auto md = hp::csv::read_file(d / "t.md");
  EXPECT_NE(md.find("| lr | 0.90 | 0.84 | 0.90 | 0.85 |"), std::string::npos) << md;
  EXPECT_NE(md.find("| xgb | 0.90 | 0.88 | 0.90 | 0.86 |"), std::string::npos) << md;
  ASSERT_EQ(cli("report --reports" + args + " --out " + q(d / "t.csv")).code, 0);
  const auto rows = hp::csv::parse(hp::csv::read_file(d / "t.csv"));
  EXPECT_EQ(rows.size(), 6u);
}

TEST(Report, MissingFieldNamed) {
  TempDir d;
  hp::csv::write_file_atomic(d / "r.json", R"({"model":"lr","metrics":{"weighted":{"accuracy":1,"precision":1,"recall":1}}})");
  const auto r = cli("report --reports " + q(d / "r.json") + " --out " + q(d / "t.md"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("metrics.weighted.f1"), std::string::npos) << r.out;
  EXPECT_FALSE(fs::exists(d / "t.md"));
}

TEST(Ingest, OfflineFixtureRun) {
  TempDir d;
  const auto fx = kSource / "fixtures" / "spotify" / "sample";
  const auto r = cli("ingest --playlists " + q(fx / "playlists.txt") + " --offline-fixtures " + q(fx) + " --out " + q(d / "t.csv"),
                     "env -u SPOTIFY_CLIENT_ID -u SPOTIFY_CLIENT_SECRET");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto recs = hp::load_records(d / "t.csv");
  EXPECT_EQ(recs.size(), 137u);
  for (const auto& rec : recs) EXPECT_NO_THROW(hp::validate(rec));
}

TEST(Ingest, MissingCredentialsOnline) {
  TempDir d;
  const auto fx = kSource / "fixtures" / "spotify" / "sample";
  const auto r = cli("ingest --playlists " + q(fx / "playlists.txt") + " --out " + q(d / "t.csv"),
                     "env -u SPOTIFY_CLIENT_ID -u SPOTIFY_CLIENT_SECRET");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("SPOTIFY_CLIENT_ID"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("SPOTIFY_CLIENT_SECRET"), std::string::npos) << r.out;
  EXPECT_FALSE(fs::exists(d / "t.csv"));
}

TEST(Cli, VersionAndUsage) {
  const auto v = cli("--version");
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find("1.0.0"), std::string::npos);
  EXPECT_EQ(cli("train").code, 2);
  EXPECT_EQ(cli("no-such-command").code, 2);
}

TEST(Commands, ParsePlaylists) {
  const auto p = pl::parse_playlists("# comment\n\n  abc  \nxyz name here\n");
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0].playlist_id, "abc");
  EXPECT_EQ(p[1].playlist_id, "xyz");
}

TEST(Commands, SplitSpecRoundTrip) {
  pl::SplitSpec s{pl::SplitMode::TwoWay, 99, true};
  const auto back = pl::split_spec_from_json(nlohmann::json::parse(pl::split_spec_to_json(s).dump()));
  EXPECT_EQ(back.mode, s.mode);
  EXPECT_EQ(back.seed, 99u);
  EXPECT_TRUE(back.stratified);
  EXPECT_THROW(pl::parse_split_mode("four-way"), hp::ValidationError);
}

TEST(Commands, Fnv1aKnownVectors) {
  EXPECT_EQ(pl::fnv1a64_hex(""), "cbf29ce484222325");
  EXPECT_EQ(pl::fnv1a64_hex("a"), "af63dc4c8601ec8c");
}
