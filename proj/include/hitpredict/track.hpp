#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hitpredict/error.hpp"
#include "hitpredict/matrix.hpp"

namespace hitpredict {

inline constexpr std::size_t kNumFeatures = 13;
inline constexpr int kDefaultHitThreshold = 47;
inline constexpr int kSchemaVersion = 1;

// Fixed column order of every feature vector.
inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "danceability", "energy",   "key",      "loudness",         "mode",
    "speechiness",  "acousticness", "instrumentalness", "liveness", "valence",
    "tempo",        "duration_ms",  "time_signature"};

using FeatureVector = std::array<double, kNumFeatures>;

struct TrackRecord {
  std::string track_id;
  std::string title;
  std::string artist;
  std::optional<int> release_year;  // nullopt = unknown
  int popularity = 0;

  double danceability = 0.0;
  double energy = 0.0;
  int key = -1;
  double loudness = 0.0;
  int mode = 0;
  double speechiness = 0.0;
  double acousticness = 0.0;
  double instrumentalness = 0.0;
  double liveness = 0.0;
  double valence = 0.0;
  double tempo = 120.0;
  std::int64_t duration_ms = 1;
  int time_signature = 4;

  FeatureVector features() const noexcept {
    return {danceability, energy,   static_cast<double>(key), loudness,
            static_cast<double>(mode), speechiness, acousticness, instrumentalness,
            liveness,     valence,  tempo, static_cast<double>(duration_ms),
            static_cast<double>(time_signature)};
  }

  friend bool operator==(const TrackRecord&, const TrackRecord&) = default;
};

namespace detail {

inline void check_unit(std::string_view name, double v, const std::string& id) {
  if (!(v >= 0.0 && v <= 1.0))
    throw ValidationError("track '" + id + "': " + std::string(name) + " = " +
                          std::to_string(v) + " outside [0, 1]");
}

}  // namespace detail

inline void validate_popularity(int popularity) {
  if (popularity < 0 || popularity > 100)
    throw ValidationError("popularity " + std::to_string(popularity) +
                          " outside [0, 100]");
}

// Throws ValidationError describing the first violated bound.
inline void validate(const TrackRecord& r) {
  if (r.track_id.empty()) throw ValidationError("empty track_id");
  const std::string& id = r.track_id;
  try {
    validate_popularity(r.popularity);
  } catch (const ValidationError& e) {
    throw ValidationError("track '" + id + "': " + e.what());
  }
  if (r.release_year && *r.release_year < 1900)
    throw ValidationError("track '" + id + "': release_year " +
                          std::to_string(*r.release_year) + " before 1900");
  detail::check_unit("danceability", r.danceability, id);
  detail::check_unit("energy", r.energy, id);
  detail::check_unit("speechiness", r.speechiness, id);
  detail::check_unit("acousticness", r.acousticness, id);
  detail::check_unit("instrumentalness", r.instrumentalness, id);
  detail::check_unit("liveness", r.liveness, id);
  detail::check_unit("valence", r.valence, id);
  if (r.key < -1 || r.key > 11)
    throw ValidationError("track '" + id + "': key " + std::to_string(r.key) +
                          " outside [-1, 11]");
  if (r.mode != 0 && r.mode != 1)
    throw ValidationError("track '" + id + "': mode " + std::to_string(r.mode) +
                          " not in {0, 1}");
  if (!std::isfinite(r.loudness))
    throw ValidationError("track '" + id + "': loudness is not finite");
  if (!(r.tempo > 0.0) || !std::isfinite(r.tempo))
    throw ValidationError("track '" + id + "': tempo must be > 0");
  if (r.duration_ms <= 0)
    throw ValidationError("track '" + id + "': duration_ms must be > 0");
  if (r.time_signature < 0)
    throw ValidationError("track '" + id + "': time_signature must be >= 0");
}

// 1 iff popularity > threshold.
inline int label_hit(int popularity, int threshold = kDefaultHitThreshold) {
  validate_popularity(popularity);
  return popularity > threshold ? 1 : 0;
}

// Case-folded, whitespace-collapsed, trimmed.
inline std::string normalize_key(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

// One record per track_id (first occurrence), then one per normalized
// (title, artist) pair: the highest popularity wins, earliest on ties.
// Survivors keep their original relative order.
inline std::vector<TrackRecord> deduplicate(std::span<const TrackRecord> records) {
  std::vector<std::size_t> by_id;
  {
    std::unordered_map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < records.size(); ++i)
      if (seen.emplace(records[i].track_id, i).second) by_id.push_back(i);
  }

  std::unordered_map<std::string, std::size_t> best;  // pair key -> index
  for (std::size_t i : by_id) {
    std::string key = normalize_key(records[i].title);
    key.push_back('\x1f');
    key += normalize_key(records[i].artist);
    auto [it, inserted] = best.emplace(std::move(key), i);
    if (!inserted && records[i].popularity > records[it->second].popularity)
      it->second = i;
  }

  std::vector<bool> keep(records.size(), false);
  for (const auto& [key, i] : best) keep[i] = true;
  std::vector<TrackRecord> out;
  out.reserve(best.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    if (keep[i]) out.push_back(records[i]);
  return out;
}

struct ClassCounts {
  std::size_t negatives = 0;
  std::size_t positives = 0;

  std::size_t total() const noexcept { return negatives + positives; }
  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

inline ClassCounts class_distribution(std::span<const int> labels) {
  ClassCounts c;
  for (int y : labels) {
    if (y == 0)
      ++c.negatives;
    else if (y == 1)
      ++c.positives;
    else
      throw ValidationError("label " + std::to_string(y) + " not in {0, 1}");
  }
  return c;
}

// Feature matrix + hit labels in the fixed column order.
struct LabeledDataset {
  Matrix features = Matrix(0, kNumFeatures);
  Labels labels;
  int schema_version = kSchemaVersion;
  std::string source;

  std::size_t size() const noexcept { return labels.size(); }

  static LabeledDataset from_records(std::span<const TrackRecord> records,
                                     int threshold = kDefaultHitThreshold,
                                     std::string source = {}) {
    LabeledDataset ds;
    ds.source = std::move(source);
    for (const auto& r : records) {
      const FeatureVector f = r.features();
      ds.features.append_row(f);
      ds.labels.push_back(label_hit(r.popularity, threshold));
    }
    return ds;
  }
};

}  // namespace hitpredict
