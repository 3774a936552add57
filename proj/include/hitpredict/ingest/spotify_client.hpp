#pragma once

// Client-credentials Spotify Web API client: playlist crawling, batched
// track/audio-feature lookups, and assembly of canonical TrackRecords.
//
// Retry policy (applies to every request):
//   * 429: wait Retry-After seconds (backoff delay when the header is absent)
//   * 5xx or no response: wait min(base * 2^(attempt-1), cap)
//   * 401 on an API call: drop the cached token and re-authenticate
//   * give up with TransportError after max_attempts attempts in total

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <ctime>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hitpredict/error.hpp"
#include "hitpredict/ingest/http.hpp"
#include "hitpredict/track.hpp"

namespace hitpredict::ingest {

inline constexpr std::size_t kAudioFeaturesBatch = 100;
inline constexpr std::size_t kTracksBatch = 50;
inline constexpr std::size_t kPlaylistPage = 100;
inline constexpr auto kTokenRefreshMargin = std::chrono::seconds{30};

struct ApiCredentials {
  std::string client_id;
  std::string client_secret;

  void validate() const {
    if (client_id.empty() || client_secret.empty())
      throw CredentialError("client id and client secret must both be non-empty");
  }
};

struct AccessToken {
  std::string token;
  Clock::time_point expires_at;

  bool valid_at(Clock::time_point now) const noexcept {
    return !token.empty() && now + kTokenRefreshMargin < expires_at;
  }
};

struct PlaylistRef {
  std::string playlist_id;
  std::string description;
};

struct ClientOptions {
  std::string api_base = "https://api.spotify.com";
  std::string accounts_base = "https://accounts.spotify.com";
  int max_attempts = 5;
  std::chrono::milliseconds backoff_base{1000};
  std::chrono::milliseconds backoff_cap{32000};
  std::size_t max_in_flight = 1;  // concurrent batch requests
};

struct AudioFeatures {
  double danceability = 0, energy = 0;
  int key = -1;
  double loudness = 0;
  int mode = 0;
  double speechiness = 0, acousticness = 0, instrumentalness = 0, liveness = 0, valence = 0;
  double tempo = 0;
  std::int64_t duration_ms = 0;
  int time_signature = 0;
};

struct TrackInfo {
  int popularity = 0;
  std::string title;
  std::string artist;
  std::optional<int> release_year;
};

template <typename T>
struct BatchResult {
  std::map<std::string, T> found;
  std::vector<std::string> skipped;  // ids the API returned as null
  std::vector<std::pair<std::string, std::string>> invalid;  // id, reason (lenient mode)
};

struct YearRange {
  std::optional<int> from;  // inclusive
  std::optional<int> to;    // inclusive

  bool contains(const std::optional<int>& year) const noexcept {
    if (!year) return false;
    return (!from || *year >= *from) && (!to || *year <= *to);
  }
};

struct IngestSummary {
  std::size_t playlists = 0;
  std::size_t playlist_items = 0;
  std::size_t unique_ids = 0;
  std::size_t missing_popularity = 0;
  std::size_t missing_features = 0;
  std::size_t invalid = 0;
  std::size_t duplicates_removed = 0;
  std::size_t year_filtered = 0;
  std::size_t records = 0;
  std::string snapshot_utc;  // when popularity was fetched

  std::size_t dropped() const noexcept { return missing_popularity + missing_features + invalid; }
};

struct DatasetBuild {
  std::vector<TrackRecord> records;
  IngestSummary summary;
};

// "YYYY", "YYYY-MM" or "YYYY-MM-DD" -> YYYY; anything else -> unknown.
inline std::optional<int> parse_release_year(std::string_view date) {
  if (date.size() < 4) return std::nullopt;
  int year = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (date[i] < '0' || date[i] > '9') return std::nullopt;
    year = year * 10 + (date[i] - '0');
  }
  if (date.size() > 4 && date[4] != '-') return std::nullopt;
  if (year < 1900) return std::nullopt;
  return year;
}

inline std::string format_utc(Clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace detail {

using nlohmann::json;

inline json parse_body(const HttpResponse& r, const std::string& context) {
  try {
    return json::parse(r.body);
  } catch (const json::parse_error& e) {
    throw ParseError(context + ": response is not valid JSON (" + e.what() + ")");
  }
}

template <typename T>
T field(const json& obj, const char* name) {
  const auto it = obj.find(name);
  if (it == obj.end() || it->is_null()) throw ParseError(std::string("missing field '") + name + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("field '") + name + "' has the wrong type");
  }
}

inline AudioFeatures audio_features_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("audio-features entry is not an object");
  AudioFeatures f;
  f.danceability = field<double>(j, "danceability");
  f.energy = field<double>(j, "energy");
  f.key = field<int>(j, "key");
  f.loudness = field<double>(j, "loudness");
  f.mode = field<int>(j, "mode");
  f.speechiness = field<double>(j, "speechiness");
  f.acousticness = field<double>(j, "acousticness");
  f.instrumentalness = field<double>(j, "instrumentalness");
  f.liveness = field<double>(j, "liveness");
  f.valence = field<double>(j, "valence");
  f.tempo = field<double>(j, "tempo");
  f.duration_ms = field<std::int64_t>(j, "duration_ms");
  f.time_signature = field<int>(j, "time_signature");
  return f;
}

inline TrackInfo track_info_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("track entry is not an object");
  TrackInfo t;
  t.popularity = field<int>(j, "popularity");
  t.title = field<std::string>(j, "name");
  std::string artists;
  if (const auto a = j.find("artists"); a != j.end() && a->is_array())
    for (const auto& artist : *a) {
      if (!artists.empty()) artists += ", ";
      artists += field<std::string>(artist, "name");
    }
  t.artist = std::move(artists);
  if (const auto album = j.find("album"); album != j.end() && album->is_object())
    if (const auto d = album->find("release_date"); d != album->end() && d->is_string())
      t.release_year = parse_release_year(d->get<std::string>());
  validate_popularity(t.popularity);
  return t;
}

}  // namespace detail

class SpotifyClient {
 public:
  SpotifyClient(ApiCredentials credentials, HttpTransport& transport, Clock& clock,
                ClientOptions options = {})
      : credentials_(std::move(credentials)),
        transport_(transport),
        clock_(clock),
        options_(std::move(options)) {
    credentials_.validate();
    if (options_.max_attempts < 1) throw ValidationError("max_attempts must be >= 1");
    if (options_.max_in_flight < 1) throw ValidationError("max_in_flight must be >= 1");
  }

  // Requests a fresh token regardless of the cache.
  AccessToken authenticate() {
    std::lock_guard lock(token_mu_);
    return refresh_locked();
  }

  // Cached token, refreshed when within 30 s of expiry. At most one refresh
  // runs at a time.
  AccessToken token() {
    std::lock_guard lock(token_mu_);
    if (token_ && token_->valid_at(clock_.now())) return *token_;
    return refresh_locked();
  }

  std::vector<std::string> fetch_playlist_tracks(const PlaylistRef& playlist) {
    if (playlist.playlist_id.empty()) throw ValidationError("empty playlist id");
    std::vector<std::string> ids;
    for (std::size_t offset = 0;;) {
      HttpRequest rq;
      rq.base_url = options_.api_base;
      rq.path = "/v1/playlists/" + HttpRequest::encode(playlist.playlist_id) + "/tracks";
      rq.query = {{"limit", std::to_string(kPlaylistPage)}, {"offset", std::to_string(offset)}};
      const HttpResponse r = api_call(rq);
      if (r.status == 404) throw UnknownPlaylistError("unknown playlist '" + playlist.playlist_id + "'");
      check_status(r, "playlist '" + playlist.playlist_id + "'");
      const auto page = detail::parse_body(r, "playlist '" + playlist.playlist_id + "'");
      const auto items = page.find("items");
      if (items == page.end() || !items->is_array())
        throw ParseError("playlist '" + playlist.playlist_id + "': page without 'items'");
      for (const auto& item : *items) {
        const auto t = item.find("track");
        if (t == item.end() || !t->is_object()) continue;
        if (t->value("is_local", false)) continue;
        const auto id = t->find("id");
        if (id == t->end() || !id->is_string()) continue;
        ids.push_back(id->get<std::string>());
      }
      const auto next = page.find("next");
      if (next == page.end() || next->is_null() || items->empty()) break;
      offset += kPlaylistPage;
    }
    return ids;
  }

  // Throws on any malformed entry, naming its id.
  BatchResult<AudioFeatures> fetch_audio_features(std::span<const std::string> ids) {
    auto result = fetch_audio_features_lenient(ids);
    if (!result.invalid.empty())
      throw ParseError("audio-features for '" + result.invalid.front().first +
                       "': " + result.invalid.front().second);
    return result;
  }

  // Throws ValidationError on out-of-range popularity and ParseError on
  // malformed entries.
  BatchResult<TrackInfo> fetch_track_popularity(std::span<const std::string> ids) {
    auto result = fetch_track_popularity_lenient(ids);
    if (!result.invalid.empty()) {
      const auto& [id, why] = result.invalid.front();
      if (why.starts_with("popularity"))
        throw ValidationError("track '" + id + "': " + why);
      throw ParseError("track '" + id + "': " + why);
    }
    return result;
  }

  // Per-entry failures are collected in `invalid` instead of thrown.
  BatchResult<AudioFeatures> fetch_audio_features_lenient(std::span<const std::string> ids) {
    return fetch_batched<AudioFeatures>(ids, kAudioFeaturesBatch, "/v1/audio-features",
                                        "audio_features", detail::audio_features_from_json);
  }

  BatchResult<TrackInfo> fetch_track_popularity_lenient(std::span<const std::string> ids) {
    return fetch_batched<TrackInfo>(ids, kTracksBatch, "/v1/tracks", "tracks",
                                    detail::track_info_from_json);
  }

  // playlists -> unique ids -> popularity -> audio features -> join ->
  // deduplicate -> optional release-year filter.
  DatasetBuild build_dataset(std::span<const PlaylistRef> playlists,
                             std::optional<YearRange> year_filter = std::nullopt) {
    if (playlists.empty()) throw ValidationError("build_dataset needs at least one playlist");
    DatasetBuild out;
    auto& s = out.summary;
    s.playlists = playlists.size();

    std::vector<std::string> ids;
    std::unordered_set<std::string> seen;
    for (const auto& p : playlists) {
      const auto tracks = fetch_playlist_tracks(p);
      s.playlist_items += tracks.size();
      for (const auto& id : tracks)
        if (seen.insert(id).second) ids.push_back(id);
    }
    s.unique_ids = ids.size();
    if (ids.empty()) return out;

    s.snapshot_utc = format_utc(clock_.now());
    const auto info = fetch_track_popularity_lenient(ids);
    const auto features = fetch_audio_features_lenient(ids);
    std::unordered_set<std::string> bad;
    for (const auto& [id, why] : info.invalid) bad.insert(id);
    for (const auto& [id, why] : features.invalid) bad.insert(id);

    std::vector<TrackRecord> joined;
    for (const auto& id : ids) {
      if (bad.contains(id)) {
        ++s.invalid;
        continue;
      }
      const auto ti = info.found.find(id);
      if (ti == info.found.end()) {
        ++s.missing_popularity;
        continue;
      }
      const auto fi = features.found.find(id);
      if (fi == features.found.end()) {
        ++s.missing_features;
        continue;
      }
      TrackRecord r = join(id, ti->second, fi->second);
      try {
        validate(r);
      } catch (const ValidationError&) {
        ++s.invalid;
        continue;
      }
      joined.push_back(std::move(r));
    }

    auto unique = deduplicate(joined);
    s.duplicates_removed = joined.size() - unique.size();
    if (year_filter) {
      const auto before = unique.size();
      std::erase_if(unique, [&](const TrackRecord& r) { return !year_filter->contains(r.release_year); });
      s.year_filtered = before - unique.size();
    }
    s.records = unique.size();
    out.records = std::move(unique);
    return out;
  }

  const ClientOptions& options() const noexcept { return options_; }

 private:
  static TrackRecord join(const std::string& id, const TrackInfo& t, const AudioFeatures& f) {
    TrackRecord r;
    r.track_id = id;
    r.title = t.title;
    r.artist = t.artist;
    r.release_year = t.release_year;
    r.popularity = t.popularity;
    r.danceability = f.danceability;
    r.energy = f.energy;
    r.key = f.key;
    r.loudness = f.loudness;
    r.mode = f.mode;
    r.speechiness = f.speechiness;
    r.acousticness = f.acousticness;
    r.instrumentalness = f.instrumentalness;
    r.liveness = f.liveness;
    r.valence = f.valence;
    r.tempo = f.tempo;
    r.duration_ms = f.duration_ms;
    r.time_signature = f.time_signature;
    return r;
  }

  static void check_status(const HttpResponse& r, const std::string& what) {
    if (r.status >= 200 && r.status < 300) return;
    throw TransportError(what + ": HTTP " + std::to_string(r.status));
  }

  std::chrono::milliseconds backoff(int attempt) const {
    auto d = options_.backoff_base;
    for (int i = 1; i < attempt && d < options_.backoff_cap; ++i) d *= 2;
    return std::min(d, options_.backoff_cap);
  }

  // Sends with the retry policy. 401 triggers one token refresh per attempt
  // when `authorized` is set.
  HttpResponse send_with_retry(HttpRequest rq, bool authorized) {
    std::string last_error;
    for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
      if (authorized) rq.headers["Authorization"] = "Bearer " + token().token;
      std::optional<HttpResponse> r;
      try {
        r = transport_.send(rq);
      } catch (const TransportError& e) {
        last_error = e.what();
      }
      if (r) {
        if (r->status == 429) {
          last_error = "HTTP 429";
          if (attempt == options_.max_attempts) break;
          clock_.sleep_for(retry_after(*r, attempt));
          continue;
        }
        if (r->status == 401 && authorized) {
          last_error = "HTTP 401";
          invalidate_token();
          continue;
        }
        if (r->status < 500) return *r;
        last_error = "HTTP " + std::to_string(r->status);
      }
      if (attempt < options_.max_attempts) clock_.sleep_for(backoff(attempt));
    }
    throw TransportError(rq.method + " " + rq.path + " failed: " + last_error, options_.max_attempts);
  }

  std::chrono::milliseconds retry_after(const HttpResponse& r, int attempt) const {
    if (const auto h = r.header("Retry-After")) {
      try {
        const long secs = std::stol(*h);
        if (secs >= 0) return std::chrono::seconds{secs};
      } catch (const std::exception&) {
      }
    }
    return backoff(attempt);
  }

  HttpResponse api_call(const HttpRequest& rq) { return send_with_retry(rq, /*authorized=*/true); }

  AccessToken refresh_locked() {
    HttpRequest rq;
    rq.method = "POST";
    rq.base_url = options_.accounts_base;
    rq.path = "/api/token";
    rq.content_type = "application/x-www-form-urlencoded";
    rq.body = "grant_type=client_credentials";
    rq.headers["Authorization"] =
        "Basic " + base64_encode(credentials_.client_id + ":" + credentials_.client_secret);
    const HttpResponse r = send_with_retry(rq, /*authorized=*/false);
    if (r.status >= 400 && r.status < 500)
      throw CredentialError("token request rejected with HTTP " + std::to_string(r.status));
    check_status(r, "token request");
    const auto body = detail::parse_body(r, "token response");
    AccessToken t;
    try {
      t.token = detail::field<std::string>(body, "access_token");
      const auto expires_in = detail::field<std::int64_t>(body, "expires_in");
      t.expires_at = clock_.now() + std::chrono::seconds{expires_in};
    } catch (const ParseError& e) {
      throw ParseError(std::string("token response: ") + e.what());
    }
    token_ = t;
    return t;
  }

  void invalidate_token() {
    std::lock_guard lock(token_mu_);
    token_.reset();
  }

  template <typename T, typename Parse>
  BatchResult<T> fetch_batched(std::span<const std::string> ids, std::size_t batch,
                               const char* path, const char* key, Parse parse) {
    if (ids.empty()) throw ValidationError(std::string(path) + ": empty id list");
    std::vector<std::span<const std::string>> chunks;
    for (std::size_t i = 0; i < ids.size(); i += batch)
      chunks.push_back(ids.subspan(i, std::min(batch, ids.size() - i)));

    auto run = [&](std::span<const std::string> chunk) {
      std::string joined;
      for (const auto& id : chunk) {
        if (!joined.empty()) joined += ',';
        joined += id;
      }
      HttpRequest rq;
      rq.base_url = options_.api_base;
      rq.path = path;
      rq.query = {{"ids", joined}};
      const HttpResponse r = api_call(rq);
      check_status(r, std::string(path) + " for '" + chunk.front() + "'");
      nlohmann::json body;
      try {
        body = nlohmann::json::parse(r.body);
      } catch (const nlohmann::json::parse_error&) {
        throw ParseError(std::string(path) + ": malformed JSON in batch starting at '" +
                         chunk.front() + "'");
      }
      const auto list = body.find(key);
      if (list == body.end() || !list->is_array() || list->size() != chunk.size())
        throw ParseError(std::string(path) + ": '" + key + "' array missing or of wrong length " +
                         "in batch starting at '" + chunk.front() + "'");
      BatchResult<T> part;
      for (std::size_t i = 0; i < chunk.size(); ++i) {
        const auto& entry = (*list)[i];
        if (entry.is_null()) {
          part.skipped.push_back(chunk[i]);
          continue;
        }
        try {
          part.found.emplace(chunk[i], parse(entry));
        } catch (const Error& e) {
          part.invalid.emplace_back(chunk[i], e.what());
        }
      }
      return part;
    };

    std::vector<BatchResult<T>> parts(chunks.size());
    if (options_.max_in_flight <= 1 || chunks.size() <= 1) {
      for (std::size_t c = 0; c < chunks.size(); ++c) parts[c] = run(chunks[c]);
    } else {
      for (std::size_t start = 0; start < chunks.size(); start += options_.max_in_flight) {
        const std::size_t end = std::min(chunks.size(), start + options_.max_in_flight);
        std::vector<std::future<BatchResult<T>>> inflight;
        for (std::size_t c = start; c < end; ++c)
          inflight.push_back(std::async(std::launch::async, run, chunks[c]));
        for (std::size_t c = start; c < end; ++c) parts[c] = inflight[c - start].get();
      }
    }

    BatchResult<T> out;
    for (auto& p : parts) {
      out.found.merge(p.found);
      out.skipped.insert(out.skipped.end(), p.skipped.begin(), p.skipped.end());
      out.invalid.insert(out.invalid.end(), p.invalid.begin(), p.invalid.end());
    }
    return out;
  }

  ApiCredentials credentials_;
  HttpTransport& transport_;
  Clock& clock_;
  ClientOptions options_;
  std::mutex token_mu_;
  std::optional<AccessToken> token_;
};

}  // namespace hitpredict::ingest
