#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "hitpredict/csv.hpp"
#include "hitpredict/random.hpp"
#include "hitpredict/records_io.hpp"
#include "hitpredict/split.hpp"
#include "hitpredict/standardize.hpp"
#include "hitpredict/track.hpp"
#include "test_util.hpp"

namespace hp = hitpredict;
using testutil::record;

// ---- PRNG

TEST(SplitMix64, MatchesReferenceSequence) {
  // Reference outputs of the published SplitMix64 for seed 0.
  hp::SplitMix64 rng(0);
  EXPECT_EQ(rng.next(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(rng.next(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(rng.next(), 0x06c45d188009454fULL);
}

TEST(SplitMix64, UniformAndBelowStayInRange) {
  hp::SplitMix64 rng(99);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const double u = rng.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const auto k = rng.below(7);
    ASSERT_LT(k, 7u);
    ++hist[k];
  }
  for (int c : hist) EXPECT_NEAR(c, 10000, 500);
}

TEST(SplitMix64, NormalMomentsAreClose) {
  hp::SplitMix64 rng(5);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal(3.0, 2.0);
    s += z;
    s2 += z * z;
  }
  const double mean = s / n;
  EXPECT_NEAR(mean, 3.0, 0.03);
  EXPECT_NEAR(std::sqrt(s2 / n - mean * mean), 2.0, 0.03);
}

TEST(SplitMix64, DerivedSeedsDiffer) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 100; ++s) seen.insert(hp::derive_seed(42, s));
  EXPECT_EQ(seen.size(), 100u);
  EXPECT_EQ(hp::derive_seed(42, 3), hp::derive_seed(42, 3));
}

// ---- labeling

TEST(LabelHit, StrictThreshold) {
  EXPECT_EQ(hp::label_hit(82, 47), 1);
  EXPECT_EQ(hp::label_hit(47, 47), 0);
  EXPECT_EQ(hp::label_hit(48, 47), 1);
  EXPECT_EQ(hp::label_hit(0, 47), 0);
  EXPECT_EQ(hp::label_hit(47), 0);
  EXPECT_EQ(hp::label_hit(100), 1);
}

TEST(LabelHit, RejectsOutOfRangeNamingTheValue) {
  try {
    hp::label_hit(101);
    FAIL() << "expected ValidationError";
  } catch (const hp::ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("101"), std::string::npos);
  }
  EXPECT_THROW(hp::label_hit(-1), hp::ValidationError);
}

TEST(LabelHitProperty, MonotoneInPopularity) {
  for (int t = 0; t <= 100; ++t)
    for (int p = 1; p <= 100; ++p) ASSERT_LE(hp::label_hit(p - 1, t), hp::label_hit(p, t));
}

// ---- validation

TEST(TrackRecord, ValidateEnforcesBounds) {
  auto ok = record("a", "t", "x", 50);
  EXPECT_NO_THROW(hp::validate(ok));
  auto bad = ok;
  bad.popularity = 101;
  EXPECT_THROW(hp::validate(bad), hp::ValidationError);
  bad = ok;
  bad.mode = 2;
  EXPECT_THROW(hp::validate(bad), hp::ValidationError);
  bad = ok;
  bad.key = 12;
  EXPECT_THROW(hp::validate(bad), hp::ValidationError);
  bad = ok;
  bad.key = -2;
  EXPECT_THROW(hp::validate(bad), hp::ValidationError);
  bad = ok;
  bad.danceability = 1.0000001;
  EXPECT_THROW(hp::validate(bad), hp::ValidationError);
  bad = ok;
  bad.valence = -0.01;
  EXPECT_THROW(hp::validate(bad), hp::ValidationError);
  bad = ok;
  bad.tempo = 0.0;
  EXPECT_THROW(hp::validate(bad), hp::ValidationError);
  bad = ok;
  bad.duration_ms = 0;
  EXPECT_THROW(hp::validate(bad), hp::ValidationError);
  bad = ok;
  bad.time_signature = -1;
  EXPECT_THROW(hp::validate(bad), hp::ValidationError);
  bad = ok;
  bad.release_year = 1899;
  EXPECT_THROW(hp::validate(bad), hp::ValidationError);
  bad = ok;
  bad.release_year.reset();
  EXPECT_NO_THROW(hp::validate(bad));
  bad = ok;
  bad.energy = 0.0;
  bad.acousticness = 1.0;
  EXPECT_NO_THROW(hp::validate(bad));  // inclusive bounds
}

TEST(TrackRecord, FeatureOrderIsFixed) {
  auto r = record("a", "t", "x", 50);
  const auto f = r.features();
  ASSERT_EQ(f.size(), 13u);
  EXPECT_EQ(hp::kFeatureNames[0], "danceability");
  EXPECT_EQ(hp::kFeatureNames[12], "time_signature");
  EXPECT_DOUBLE_EQ(f[0], r.danceability);
  EXPECT_DOUBLE_EQ(f[3], r.loudness);
  EXPECT_DOUBLE_EQ(f[10], r.tempo);
  EXPECT_DOUBLE_EQ(f[11], static_cast<double>(r.duration_ms));
  EXPECT_DOUBLE_EQ(f[12], static_cast<double>(r.time_signature));
}

// ---- deduplication

TEST(Deduplicate, SameIdKeepsFirst) {
  std::vector<hp::TrackRecord> in = {record("id1", "Song", "A", 10), record("id1", "Other", "B", 90)};
  const auto out = hp::deduplicate(in);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].title, "Song");
}

TEST(Deduplicate, SameTitleArtistKeepsMostPopular) {
  std::vector<hp::TrackRecord> in = {record("a", "Love  Nwantiti", "CKay", 30),
                                     record("b", "x", "y", 40),
                                     record("c", "love nwantiti ", " CKAY", 55)};
  const auto out = hp::deduplicate(in);
  ASSERT_EQ(out.size(), 2u);
  // Survivors keep their original relative order.
  EXPECT_EQ(out[0].track_id, "b");
  EXPECT_EQ(out[1].track_id, "c");
}

TEST(Deduplicate, EqualPopularityKeepsEarliest) {
  std::vector<hp::TrackRecord> in = {record("a", "S", "A", 40), record("b", "s", "a", 40)};
  const auto out = hp::deduplicate(in);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].track_id, "a");
}

TEST(Deduplicate, UniqueInputIsIdentity) {
  std::vector<hp::TrackRecord> in;
  for (int i = 0; i < 2063; ++i)
    in.push_back(record("id" + std::to_string(i), "Song " + std::to_string(i), "Artist", i % 101));
  EXPECT_EQ(hp::deduplicate(in), in);
}

namespace {

std::string oracle_key(const std::string& s) {
  std::string out;
  bool space = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

// Brute force: survivors of the id pass, then per (title, artist) group the
// member with max popularity (earliest on ties); output in input order.
std::vector<hp::TrackRecord> oracle_dedupe(const std::vector<hp::TrackRecord>& in) {
  std::vector<hp::TrackRecord> by_id;
  std::set<std::string> ids;
  for (const auto& r : in)
    if (ids.insert(r.track_id).second) by_id.push_back(r);
  std::vector<hp::TrackRecord> out;
  for (std::size_t i = 0; i < by_id.size(); ++i) {
    const auto key = oracle_key(by_id[i].title) + '\x1f' + oracle_key(by_id[i].artist);
    bool keep = true;
    for (std::size_t j = 0; j < by_id.size() && keep; ++j) {
      if (j == i) continue;
      if (oracle_key(by_id[j].title) + '\x1f' + oracle_key(by_id[j].artist) != key) continue;
      if (by_id[j].popularity > by_id[i].popularity ||
          (by_id[j].popularity == by_id[i].popularity && j < i))
        keep = false;
    }
    if (keep) out.push_back(by_id[i]);
  }
  return out;
}

std::vector<hp::TrackRecord> random_records(hp::SplitMix64& rng, std::size_t n) {
  static const char* titles[] = {"Ye", "ye", " Ye ", "Essence", "ESSENCE", "Calm Down", "calm  down", "Soso"};
  static const char* artists[] = {"Burna Boy", "burna boy", "Wizkid", "Rema", "Omah Lay"};
  std::vector<hp::TrackRecord> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(record("id" + std::to_string(rng.below(n)), titles[rng.below(8)],
                         artists[rng.below(5)], static_cast<int>(rng.below(101))));
  return out;
}

}  // namespace

TEST(DeduplicateProperty, MatchesBruteForceOracleAndIsIdempotent) {
  hp::SplitMix64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const auto in = random_records(rng, 1 + rng.below(40));
    const auto once = hp::deduplicate(in);
    ASSERT_EQ(once, oracle_dedupe(in)) << "trial " << trial;
    ASSERT_EQ(hp::deduplicate(once), once) << "trial " << trial;
    std::set<std::string> ids;
    for (const auto& r : once) ASSERT_TRUE(ids.insert(r.track_id).second);
  }
}

// ---- splits

namespace {

// Integer forms of the rounding rule: floor(0.2 N + 0.5) and
// floor(0.25 M + 0.5).
std::size_t oracle_test_size(std::size_t n) { return (2 * n + 5) / 10; }
std::size_t oracle_val_size(std::size_t rest) { return (rest + 2) / 4; }

void expect_partition(const hp::SplitIndices& s, std::size_t n) {
  std::vector<std::size_t> all;
  all.insert(all.end(), s.train.begin(), s.train.end());
  all.insert(all.end(), s.validation.begin(), s.validation.end());
  all.insert(all.end(), s.test.begin(), s.test.end());
  ASSERT_EQ(all.size(), n);
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(all[i], i);
}

}  // namespace

TEST(Split, ReferenceScaleSizes) {
  const auto s = hp::split(2063, 1);
  EXPECT_EQ(s.test.size(), 413u);
  EXPECT_EQ(s.validation.size(), 413u);
  EXPECT_EQ(s.train.size(), 1237u);
  EXPECT_EQ(369u + 2 + 41 + 1, s.validation.size());
}

TEST(Split, HundredRows) {
  const auto s = hp::split(100, 3);
  EXPECT_EQ(s.test.size(), 20u);
  EXPECT_EQ(s.validation.size(), 20u);
  EXPECT_EQ(s.train.size(), 60u);
}

TEST(Split, SeedDeterminism) {
  EXPECT_EQ(hp::split(10, 7), hp::split(10, 7));
  EXPECT_NE(hp::split(1000, 7), hp::split(1000, 8));
  EXPECT_EQ(hp::split(10, 7).seed, 7u);
}

TEST(Split, RejectsTooFewRows) {
  EXPECT_THROW(hp::split(4, 0), hp::ValidationError);
  EXPECT_NO_THROW(hp::split(5, 0));
}

TEST(SplitTwoWay, Sizes) {
  EXPECT_EQ(hp::split_two_way(2063, 0).test.size(), 619u);
  EXPECT_EQ(542u + 6 + 65 + 6, hp::split_two_way(2063, 0).test.size());
  const auto half = hp::split_two_way(10, 0, 0.5);
  EXPECT_EQ(half.test.size(), 5u);
  EXPECT_EQ(half.train.size(), 5u);
  EXPECT_TRUE(half.validation.empty());
  EXPECT_EQ(hp::split_two_way(2063, 0, 0.20).test.size(), 413u);
}

TEST(SplitTwoWay, RejectsBadFraction) {
  EXPECT_THROW(hp::split_two_way(10, 0, 0.0), hp::ValidationError);
  EXPECT_THROW(hp::split_two_way(10, 0, 1.0), hp::ValidationError);
  EXPECT_THROW(hp::split_two_way(10, 0, -0.3), hp::ValidationError);
  EXPECT_THROW(hp::split_two_way(10, 0, std::nan("")), hp::ValidationError);
}

TEST(SplitProperty, SweepFiveToFiveThousand) {
  for (std::size_t n = 5; n <= 5000; ++n) {
    const std::uint64_t seed = n * 2654435761u;
    const auto s = hp::split(n, seed);
    const std::size_t n_test = oracle_test_size(n);
    ASSERT_EQ(s.test.size(), n_test) << n;
    ASSERT_EQ(s.validation.size(), oracle_val_size(n - n_test)) << n;
    ASSERT_EQ(s.train.size(), n - n_test - oracle_val_size(n - n_test)) << n;
    ASSERT_FALSE(s.train.empty());
    ASSERT_FALSE(s.validation.empty());
    ASSERT_FALSE(s.test.empty());
    expect_partition(s, n);
    if (n % 97 == 0) {
      ASSERT_EQ(s, hp::split(n, seed));
    }

    const auto t = hp::split_two_way(n, seed);
    ASSERT_EQ(t.test.size(), (3 * n + 5) / 10) << n;
    ASSERT_TRUE(t.validation.empty());
    expect_partition(t, n);
  }
}

TEST(SplitStratified, PreservesClassRatioPerPartition) {
  std::vector<int> y(2063, 0);
  for (int i = 0; i < 237; ++i) y[i * 8] = 1;
  const auto s = hp::split_stratified(y, 11);
  expect_partition(s, y.size());
  auto hits = [&](const std::vector<std::size_t>& idx) {
    return std::count_if(idx.begin(), idx.end(), [&](std::size_t i) { return y[i] == 1; });
  };
  // Per class: 237 hits -> test rhu(47.4)=47, val rhu(47.5)=48.
  EXPECT_EQ(hits(s.test), 47);
  EXPECT_EQ(hits(s.validation), 48);
  EXPECT_EQ(hits(s.train), 237 - 47 - 48);
  EXPECT_EQ(s, hp::split_stratified(y, 11));
  const auto t = hp::split_two_way_stratified(y, 11);
  expect_partition(t, y.size());
  EXPECT_EQ(hits(t.test), 71);  // rhu(0.3 * 237) = 71
}

// ---- class distribution

TEST(ClassDistribution, Counts) {
  const auto c0 = hp::class_distribution(std::vector<int>{});
  EXPECT_EQ(c0.negatives, 0u);
  EXPECT_EQ(c0.positives, 0u);
  const auto c1 = hp::class_distribution(std::vector<int>(5, 1));
  EXPECT_EQ(c1.negatives, 0u);
  EXPECT_EQ(c1.positives, 5u);
  std::vector<int> full(1826, 0);
  full.resize(2063, 1);
  const auto c2 = hp::class_distribution(full);
  EXPECT_EQ(c2.negatives, 1826u);
  EXPECT_EQ(c2.positives, 237u);
  EXPECT_THROW(hp::class_distribution(std::vector<int>{0, 2}), hp::ValidationError);
}

// ---- standardization

TEST(Standardize, HandValues) {
  hp::Matrix x(2, 13, 0.0);
  x(0, 0) = 1;
  x(1, 0) = 3;
  for (int c = 1; c < 13; ++c) x(0, c) = x(1, c) = 5;
  const auto p = hp::standardize_fit(x);
  EXPECT_DOUBLE_EQ(p.mean[0], 2.0);
  EXPECT_DOUBLE_EQ(p.sd[0], 1.0);
  EXPECT_DOUBLE_EQ(p.mean[1], 5.0);
  EXPECT_DOUBLE_EQ(p.sd[1], 1.0);  // degenerate column stored as 1
  const auto z = hp::standardize_apply(p, x);
  EXPECT_DOUBLE_EQ(z(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(z(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(z(0, 1), 0.0);
}

TEST(Standardize, MeanMapsToZeroAndKnownParams) {
  hp::StandardizationParams p;
  p.mean.assign(13, 2.0);
  p.sd.assign(13, 1.0);
  std::vector<double> v(13, 3.0);
  p.apply_in_place(v);
  for (double e : v) EXPECT_DOUBLE_EQ(e, 1.0);
  std::vector<double> m(13, 2.0);
  p.apply_in_place(m);
  for (double e : m) EXPECT_DOUBLE_EQ(e, 0.0);
}

TEST(Standardize, Errors) {
  EXPECT_THROW(hp::standardize_fit(hp::Matrix(1, 13, 0.0)), hp::ValidationError);
  const auto p = hp::standardize_fit(hp::Matrix(3, 13, 1.0));
  EXPECT_THROW(hp::standardize_apply(p, hp::Matrix(2, 12, 0.0)), hp::SchemaError);
}

TEST(StandardizeProperty, RoundTripAndOrdering) {
  hp::SplitMix64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.below(200);
    hp::Matrix x(n, 13, 0.0);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < 13; ++c) x(r, c) = rng.normal(c * 10.0, 1.0 + c) * (c == 11 ? 1e4 : 1);
    const auto p = hp::standardize_fit(x);
    const auto z = hp::standardize_apply(p, x);
    for (std::size_t c = 0; c < 13; ++c) {
      double s = 0, s2 = 0;
      for (std::size_t r = 0; r < n; ++r) s += z(r, c);
      const double mean = s / n;
      for (std::size_t r = 0; r < n; ++r) s2 += (z(r, c) - mean) * (z(r, c) - mean);
      ASSERT_LT(std::abs(mean), 1e-9);
      ASSERT_NEAR(std::sqrt(s2 / n), 1.0, 1e-9);
      for (std::size_t r = 1; r < n; ++r)
        ASSERT_EQ(x(r, c) < x(r - 1, c), z(r, c) < z(r - 1, c));
      // Re-fitting on the standardized rows is the fixed point (0, 1).
    }
    const auto again = hp::standardize_fit(z);
    for (std::size_t c = 0; c < 13; ++c) ASSERT_LT(std::abs(again.mean[c]), 1e-9);
  }
}

// ---- CSV and record files

TEST(Csv, QuotedFieldsAndLineNumbers) {
  const auto rows = hp::csv::parse("a,b\n\"x, y\",\"say \"\"hi\"\"\"\n\n\"multi\nline\",z\n");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].fields[0], "x, y");
  EXPECT_EQ(rows[1].fields[1], "say \"hi\"");
  EXPECT_EQ(rows[2].fields[0], "multi\nline");
  EXPECT_EQ(rows[2].line, 4u);
  EXPECT_THROW(hp::csv::parse("a,\"b\n"), hp::SchemaError);
  EXPECT_EQ(hp::csv::escape("a,b"), "\"a,b\"");
  EXPECT_EQ(hp::csv::escape("plain"), "plain");
}

TEST(Csv, DoubleRoundTripIsExact) {
  hp::SplitMix64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal(0, 1e3) * std::pow(10.0, static_cast<double>(rng.below(20)) - 10);
    ASSERT_EQ(hp::csv::parse_double(hp::csv::format_double(v), "v", 1), v);
  }
  EXPECT_THROW(hp::csv::parse_double("1.5x", "tempo", 7), hp::SchemaError);
  EXPECT_THROW(hp::csv::parse_int("2.5", "key", 7), hp::SchemaError);
}

TEST(RecordsIo, CsvAndJsonlRoundTrip) {
  testutil::TempDir dir;
  std::vector<hp::TrackRecord> recs = {record("a", "Title, with comma", "Artist \"Q\"", 12),
                                       record("b", "Ye", "Burna Boy", 80)};
  recs[1].release_year.reset();
  recs[1].danceability = 0.1 + 0.2;  // not exactly representable in short decimal
  const hp::Labels hits = {0, 1};
  for (const char* name : {"r.csv", "r.jsonl"}) {
    hp::write_record_table(dir / name, recs, &hits);
    const auto t = hp::read_record_table(dir / name);
    EXPECT_EQ(t.records, recs) << name;
    ASSERT_TRUE(t.hits.has_value());
    EXPECT_EQ(*t.hits, hits);
    hp::save_records(recs, dir / (std::string("plain-") + name));
    EXPECT_EQ(hp::load_records(dir / (std::string("plain-") + name)), recs);
  }
  const auto csv_text = hp::csv::read_file(dir / "plain-r.csv");
  EXPECT_EQ(csv_text.substr(0, csv_text.find('\n')),
            "track_id,title,artist,release_year,popularity,danceability,energy,key,loudness,mode,"
            "speechiness,acousticness,instrumentalness,liveness,valence,tempo,duration_ms,"
            "time_signature");
  const auto ds = hp::load_labeled_dataset(dir / "r.csv");
  EXPECT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.features.cols(), 13u);
  EXPECT_EQ(ds.labels, hits);
  EXPECT_THROW(hp::load_labeled_dataset(dir / "plain-r.csv"), hp::SchemaError);
}

TEST(RecordsIo, SchemaErrorsCarryLineNumbers) {
  const std::string header =
      "track_id,title,artist,release_year,popularity,danceability,energy,key,loudness,mode,"
      "speechiness,acousticness,instrumentalness,liveness,valence,tempo,duration_ms,time_signature\n";
  const std::string good = "a,t,x,2020,50,0.5,0.5,1,-5,1,0.1,0.1,0,0.1,0.5,120,200000,4\n";
  EXPECT_NO_THROW(hp::parse_record_csv(header + good));
  try {
    hp::parse_record_csv(header + good + "b,t,x,2020,101,0.5,0.5,1,-5,1,0.1,0.1,0,0.1,0.5,120,200000,4\n");
    FAIL();
  } catch (const hp::SchemaError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  try {
    hp::parse_record_csv(header + "b,t,x,2020,50,abc,0.5,1,-5,1,0.1,0.1,0,0.1,0.5,120,200000,4\n");
    FAIL();
  } catch (const hp::SchemaError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("danceability"), std::string::npos);
  }
  try {
    hp::parse_record_csv("track_id,title\n");
    FAIL();
  } catch (const hp::SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("artist"), std::string::npos);
  }
  EXPECT_THROW(hp::parse_record_csv(header + "a,t,x,2020,50\n"), hp::SchemaError);
  EXPECT_THROW(hp::parse_record_jsonl("{\"track_id\": 1}\n"), hp::SchemaError);
}

TEST(LabeledDataset, FromRecords) {
  std::vector<hp::TrackRecord> recs = {record("a", "t", "x", 47), record("b", "t2", "x", 48)};
  const auto ds = hp::LabeledDataset::from_records(recs, 47, "unit");
  EXPECT_EQ(ds.labels, (hp::Labels{0, 1}));
  EXPECT_EQ(ds.features.rows(), 2u);
  EXPECT_EQ(ds.schema_version, hp::kSchemaVersion);
  EXPECT_EQ(ds.source, "unit");
  EXPECT_DOUBLE_EQ(ds.features(1, 10), 110.0);
}
