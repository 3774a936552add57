#pragma once

// Canonical track files: CSV with a fixed header, or JSON lines with the same
// field names. A trailing `hit` column/field marks a labeled file.

#include <array>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "hitpredict/csv.hpp"
#include "hitpredict/error.hpp"
#include "hitpredict/track.hpp"

namespace hitpredict {

inline constexpr std::array<std::string_view, 18> kRecordColumns = {
    "track_id",     "title",        "artist",           "release_year",
    "popularity",   "danceability", "energy",           "key",
    "loudness",     "mode",         "speechiness",      "acousticness",
    "instrumentalness", "liveness", "valence",          "tempo",
    "duration_ms",  "time_signature"};
inline constexpr std::string_view kHitColumn = "hit";

struct RecordTable {
  std::vector<TrackRecord> records;
  std::optional<Labels> hits;  // present iff the file carries a hit column
};

namespace detail {

inline bool is_jsonl(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return ext == ".jsonl" || ext == ".ndjson";
}

inline void check_header(const std::vector<std::string>& header, bool& has_hit) {
  for (std::size_t j = 0; j < kRecordColumns.size(); ++j) {
    const std::string_view want = kRecordColumns[j];
    if (j >= header.size() || header[j] != want) {
      bool present = false;
      for (const auto& h : header) present = present || h == want;
      if (!present)
        throw SchemaError("missing column '" + std::string(want) + "'", 1);
      throw SchemaError("column " + std::to_string(j + 1) + " should be '" +
                            std::string(want) + "', found '" +
                            (j < header.size() ? header[j] : std::string()) + "'",
                        1);
    }
  }
  has_hit = header.size() == kRecordColumns.size() + 1 &&
            header.back() == kHitColumn;
  if (header.size() > kRecordColumns.size() && !has_hit)
    throw SchemaError("unexpected column '" + header[kRecordColumns.size()] + "'", 1);
}

inline int to_int(std::int64_t v, std::string_view column, std::size_t line) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw SchemaError("column '" + std::string(column) + "' out of range", line);
  return static_cast<int>(v);
}

inline TrackRecord record_from_fields(const std::vector<std::string>& f, std::size_t line) {
  using csv::parse_double;
  using csv::parse_int;
  TrackRecord r;
  r.track_id = f[0];
  r.title = f[1];
  r.artist = f[2];
  if (!f[3].empty()) r.release_year = to_int(parse_int(f[3], "release_year", line), "release_year", line);
  r.popularity = to_int(parse_int(f[4], "popularity", line), "popularity", line);
  r.danceability = parse_double(f[5], "danceability", line);
  r.energy = parse_double(f[6], "energy", line);
  r.key = to_int(parse_int(f[7], "key", line), "key", line);
  r.loudness = parse_double(f[8], "loudness", line);
  r.mode = to_int(parse_int(f[9], "mode", line), "mode", line);
  r.speechiness = parse_double(f[10], "speechiness", line);
  r.acousticness = parse_double(f[11], "acousticness", line);
  r.instrumentalness = parse_double(f[12], "instrumentalness", line);
  r.liveness = parse_double(f[13], "liveness", line);
  r.valence = parse_double(f[14], "valence", line);
  r.tempo = parse_double(f[15], "tempo", line);
  r.duration_ms = parse_int(f[16], "duration_ms", line);
  r.time_signature = to_int(parse_int(f[17], "time_signature", line), "time_signature", line);
  return r;
}

inline void validate_at(const TrackRecord& r, std::size_t line) {
  try {
    validate(r);
  } catch (const ValidationError& e) {
    throw SchemaError(e.what(), line);
  }
}

inline int parse_hit(std::string_view s, std::size_t line) {
  if (s == "0") return 0;
  if (s == "1") return 1;
  throw SchemaError("column 'hit': '" + std::string(s) + "' is not 0 or 1", line);
}

template <typename T>
T json_get(const nlohmann::json& obj, std::string_view name, std::size_t line) {
  const auto it = obj.find(name);
  if (it == obj.end())
    throw SchemaError("missing field '" + std::string(name) + "'", line);
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw SchemaError("field '" + std::string(name) + "' has the wrong type", line);
  }
}

inline TrackRecord record_from_json(const nlohmann::json& j, std::size_t line) {
  if (!j.is_object()) throw SchemaError("expected a JSON object", line);
  TrackRecord r;
  r.track_id = json_get<std::string>(j, "track_id", line);
  r.title = json_get<std::string>(j, "title", line);
  r.artist = json_get<std::string>(j, "artist", line);
  const auto year = j.find("release_year");
  if (year == j.end()) throw SchemaError("missing field 'release_year'", line);
  if (!year->is_null()) r.release_year = json_get<int>(j, "release_year", line);
  r.popularity = json_get<int>(j, "popularity", line);
  r.danceability = json_get<double>(j, "danceability", line);
  r.energy = json_get<double>(j, "energy", line);
  r.key = json_get<int>(j, "key", line);
  r.loudness = json_get<double>(j, "loudness", line);
  r.mode = json_get<int>(j, "mode", line);
  r.speechiness = json_get<double>(j, "speechiness", line);
  r.acousticness = json_get<double>(j, "acousticness", line);
  r.instrumentalness = json_get<double>(j, "instrumentalness", line);
  r.liveness = json_get<double>(j, "liveness", line);
  r.valence = json_get<double>(j, "valence", line);
  r.tempo = json_get<double>(j, "tempo", line);
  r.duration_ms = json_get<std::int64_t>(j, "duration_ms", line);
  r.time_signature = json_get<int>(j, "time_signature", line);
  return r;
}

inline nlohmann::ordered_json record_to_json(const TrackRecord& r) {
  nlohmann::ordered_json j;
  j["track_id"] = r.track_id;
  j["title"] = r.title;
  j["artist"] = r.artist;
  j["release_year"] = r.release_year ? nlohmann::ordered_json(*r.release_year)
                                     : nlohmann::ordered_json(nullptr);
  j["popularity"] = r.popularity;
  j["danceability"] = r.danceability;
  j["energy"] = r.energy;
  j["key"] = r.key;
  j["loudness"] = r.loudness;
  j["mode"] = r.mode;
  j["speechiness"] = r.speechiness;
  j["acousticness"] = r.acousticness;
  j["instrumentalness"] = r.instrumentalness;
  j["liveness"] = r.liveness;
  j["valence"] = r.valence;
  j["tempo"] = r.tempo;
  j["duration_ms"] = r.duration_ms;
  j["time_signature"] = r.time_signature;
  return j;
}

}  // namespace detail

inline RecordTable parse_record_csv(std::string_view text) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw SchemaError("empty file: no header row");
  bool has_hit = false;
  detail::check_header(rows.front().fields, has_hit);
  const std::size_t width = kRecordColumns.size() + (has_hit ? 1 : 0);

  RecordTable table;
  if (has_hit) table.hits.emplace();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.fields.size() != width)
      throw SchemaError("expected " + std::to_string(width) + " fields, found " +
                            std::to_string(row.fields.size()),
                        row.line);
    TrackRecord r = detail::record_from_fields(row.fields, row.line);
    detail::validate_at(r, row.line);
    table.records.push_back(std::move(r));
    if (has_hit) table.hits->push_back(detail::parse_hit(row.fields.back(), row.line));
  }
  return table;
}

inline RecordTable parse_record_jsonl(std::string_view text) {
  RecordTable table;
  std::size_t line_no = 0, pos = 0;
  std::optional<bool> has_hit;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    TrackRecord r = detail::record_from_json(j, line_no);
    detail::validate_at(r, line_no);
    const bool row_hit = j.is_object() && j.contains(kHitColumn);
    if (!has_hit) {
      has_hit = row_hit;
      if (row_hit) table.hits.emplace();
    } else if (*has_hit != row_hit) {
      throw SchemaError("'hit' field present on some rows only", line_no);
    }
    if (row_hit) {
      const int h = detail::json_get<int>(j, kHitColumn, line_no);
      if (h != 0 && h != 1) throw SchemaError("field 'hit' is not 0 or 1", line_no);
      table.hits->push_back(h);
    }
    table.records.push_back(std::move(r));
  }
  return table;
}

inline std::string format_record_csv(std::span<const TrackRecord> records,
                                     const Labels* hits = nullptr) {
  if (hits && hits->size() != records.size())
    throw SchemaError("hit labels and records differ in length");
  std::ostringstream out;
  for (std::size_t j = 0; j < kRecordColumns.size(); ++j)
    out << (j ? "," : "") << kRecordColumns[j];
  if (hits) out << ',' << kHitColumn;
  out << '\n';
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    using csv::format_double;
    out << csv::escape(r.track_id) << ',' << csv::escape(r.title) << ','
        << csv::escape(r.artist) << ','
        << (r.release_year ? std::to_string(*r.release_year) : std::string()) << ','
        << r.popularity << ',' << format_double(r.danceability) << ','
        << format_double(r.energy) << ',' << r.key << ',' << format_double(r.loudness)
        << ',' << r.mode << ',' << format_double(r.speechiness) << ','
        << format_double(r.acousticness) << ',' << format_double(r.instrumentalness)
        << ',' << format_double(r.liveness) << ',' << format_double(r.valence) << ','
        << format_double(r.tempo) << ',' << r.duration_ms << ',' << r.time_signature;
    if (hits) out << ',' << (*hits)[i];
    out << '\n';
  }
  return out.str();
}

inline std::string format_record_jsonl(std::span<const TrackRecord> records,
                                       const Labels* hits = nullptr) {
  if (hits && hits->size() != records.size())
    throw SchemaError("hit labels and records differ in length");
  std::string out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto j = detail::record_to_json(records[i]);
    if (hits) j[std::string(kHitColumn)] = (*hits)[i];
    out += j.dump();
    out += '\n';
  }
  return out;
}

// Format chosen by extension: .jsonl / .ndjson are JSON lines, anything else CSV.
inline RecordTable read_record_table(const std::filesystem::path& path) {
  const std::string text = csv::read_file(path);
  return detail::is_jsonl(path) ? parse_record_jsonl(text) : parse_record_csv(text);
}

inline void write_record_table(const std::filesystem::path& path,
                               std::span<const TrackRecord> records,
                               const Labels* hits = nullptr) {
  csv::write_file_atomic(path, detail::is_jsonl(path) ? format_record_jsonl(records, hits)
                                                      : format_record_csv(records, hits));
}

inline void save_records(std::span<const TrackRecord> records,
                         const std::filesystem::path& path) {
  write_record_table(path, records);
}

inline std::vector<TrackRecord> load_records(const std::filesystem::path& path) {
  return read_record_table(path).records;
}

// Requires the hit column; features come out in the fixed column order.
inline LabeledDataset load_labeled_dataset(const std::filesystem::path& path) {
  RecordTable t = read_record_table(path);
  if (!t.hits) throw SchemaError("missing column 'hit' in '" + path.string() + "'");
  LabeledDataset ds;
  ds.source = path.string();
  for (const auto& r : t.records) ds.features.append_row(r.features());
  ds.labels = std::move(*t.hits);
  return ds;
}

}  // namespace hitpredict
