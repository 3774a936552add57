#pragma once

// Transport and clock abstractions for the Spotify client. Nothing in this
// header touches the network: the real transport lives in
// httplib_transport.hpp, and FixtureTransport replays recorded transcripts.

#include <cctype>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hitpredict/csv.hpp"
#include "hitpredict/error.hpp"

namespace hitpredict::ingest {

struct HttpRequest {
  std::string method = "GET";
  std::string base_url;  // scheme://host[:port]
  std::string path;      // /v1/...
  std::vector<std::pair<std::string, std::string>> query;
  std::map<std::string, std::string> headers;
  std::string body;
  std::string content_type;

  // path?k=v&k=v with values percent-encoded except for ',' which the API
  // expects literally in id lists.
  std::string target() const {
    std::string t = path;
    for (std::size_t i = 0; i < query.size(); ++i) {
      t += i == 0 ? '?' : '&';
      t += encode(query[i].first);
      t += '=';
      t += encode(query[i].second);
    }
    return t;
  }

  static std::string encode(std::string_view s) {
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
      if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~' || c == ',') {
        out.push_back(static_cast<char>(c));
      } else {
        out.push_back('%');
        out.push_back(hex[c >> 4]);
        out.push_back(hex[c & 15]);
      }
    }
    return out;
  }
};

struct HttpResponse {
  int status = 0;
  std::map<std::string, std::string> headers;  // lower-case names
  std::string body;

  std::optional<std::string> header(std::string_view name) const {
    std::string key(name);
    for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const auto it = headers.find(key);
    if (it == headers.end()) return std::nullopt;
    return it->second;
  }
};

// Sends one request. Throws TransportError when no response was obtained
// (connection refused, timeout, ...); HTTP error statuses are returned.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse send(const HttpRequest& request) = 0;
};

class Clock {
 public:
  using time_point = std::chrono::system_clock::time_point;
  virtual ~Clock() = default;
  virtual time_point now() = 0;
  virtual void sleep_for(std::chrono::milliseconds d) = 0;
};

class SystemClock final : public Clock {
 public:
  time_point now() override { return std::chrono::system_clock::now(); }
  void sleep_for(std::chrono::milliseconds d) override { std::this_thread::sleep_for(d); }
};

// Time advances only through sleep_for / advance; every sleep is recorded.
class VirtualClock final : public Clock {
 public:
  explicit VirtualClock(time_point start = time_point{std::chrono::seconds{1'700'000'000}})
      : now_(start) {}

  time_point now() override {
    std::lock_guard lock(mu_);
    return now_;
  }
  void sleep_for(std::chrono::milliseconds d) override {
    std::lock_guard lock(mu_);
    sleeps_.push_back(d);
    now_ += d;
  }
  void advance(std::chrono::milliseconds d) {
    std::lock_guard lock(mu_);
    now_ += d;
  }
  std::vector<std::chrono::milliseconds> sleeps() const {
    std::lock_guard lock(mu_);
    return sleeps_;
  }

 private:
  mutable std::mutex mu_;
  time_point now_;
  std::vector<std::chrono::milliseconds> sleeps_;
};

// One recorded exchange. A request matches when method and target are equal
// and every header listed in `match_headers` has the given value.
struct Interaction {
  std::string method;
  std::string target;
  std::map<std::string, std::string> match_headers;
  bool repeat = false;  // stays available after being served
  HttpResponse response;
};

struct TranscriptEntry {
  HttpRequest request;
  int status = 0;
};

// Replays a transcript. Each non-repeating interaction is served once, in
// file order among interactions with the same request. Unmatched requests
// throw TransportError. Every request is logged for later assertions.
class FixtureTransport final : public HttpTransport {
 public:
  FixtureTransport() = default;
  explicit FixtureTransport(std::vector<Interaction> interactions)
      : interactions_(std::move(interactions)), used_(interactions_.size(), false) {}
  // Not safe while another thread is sending.
  FixtureTransport(FixtureTransport&& other) noexcept
      : interactions_(std::move(other.interactions_)),
        used_(std::move(other.used_)),
        log_(std::move(other.log_)) {}

  // {"interactions": [{"request": {"method", "target", "headers"?},
  //   "repeat"?: bool, "response": {"status", "headers"?, "body" (JSON) |
  //   "body_text" (string)}}]}
  static FixtureTransport from_json(const nlohmann::json& doc) {
    std::vector<Interaction> items;
    try {
      for (const auto& it : doc.at("interactions")) {
        Interaction x;
        const auto& rq = it.at("request");
        x.method = rq.value("method", "GET");
        x.target = rq.at("target").get<std::string>();
        if (rq.contains("headers"))
          x.match_headers = rq.at("headers").get<std::map<std::string, std::string>>();
        x.repeat = it.value("repeat", false);
        const auto& rs = it.at("response");
        x.response.status = rs.at("status").get<int>();
        if (rs.contains("headers"))
          for (const auto& [k, v] : rs.at("headers").items()) {
            std::string key = k;
            for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            x.response.headers[key] = v.is_string() ? v.get<std::string>() : v.dump();
          }
        if (rs.contains("body_text"))
          x.response.body = rs.at("body_text").get<std::string>();
        else if (rs.contains("body"))
          x.response.body = rs.at("body").dump();
        items.push_back(std::move(x));
      }
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(std::string("malformed fixture transcript: ") + e.what());
    }
    return FixtureTransport(std::move(items));
  }

  static FixtureTransport from_file(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(csv::read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError("fixture '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return from_json(doc);
  }

  HttpResponse send(const HttpRequest& request) override {
    std::lock_guard lock(mu_);
    const std::string target = request.target();
    for (std::size_t i = 0; i < interactions_.size(); ++i) {
      const Interaction& x = interactions_[i];
      if (used_[i] || x.method != request.method || x.target != target) continue;
      bool headers_ok = true;
      for (const auto& [k, v] : x.match_headers) {
        const auto h = request.headers.find(k);
        headers_ok = headers_ok && h != request.headers.end() && h->second == v;
      }
      if (!headers_ok) continue;
      if (!x.repeat) used_[i] = true;
      log_.push_back({request, x.response.status});
      return x.response;
    }
    log_.push_back({request, 0});
    throw TransportError("no recorded response for " + request.method + " " + target);
  }

  std::vector<TranscriptEntry> transcript() const {
    std::lock_guard lock(mu_);
    return log_;
  }

  std::size_t count(std::string_view method, std::string_view path_prefix) const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& e : log_)
      if (e.request.method == method && e.request.path.starts_with(path_prefix)) ++n;
    return n;
  }

 private:
  std::vector<Interaction> interactions_;
  std::vector<bool> used_;
  mutable std::mutex mu_;
  std::vector<TranscriptEntry> log_;
};

inline std::string base64_encode(std::string_view in) {
  static constexpr char table[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((in.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < in.size(); i += 3) {
    const unsigned v = (static_cast<unsigned char>(in[i]) << 16) |
                       (static_cast<unsigned char>(in[i + 1]) << 8) |
                       static_cast<unsigned char>(in[i + 2]);
    out += table[(v >> 18) & 63];
    out += table[(v >> 12) & 63];
    out += table[(v >> 6) & 63];
    out += table[v & 63];
  }
  if (const std::size_t rest = in.size() - i; rest > 0) {
    unsigned v = static_cast<unsigned char>(in[i]) << 16;
    if (rest == 2) v |= static_cast<unsigned char>(in[i + 1]) << 8;
    out += table[(v >> 18) & 63];
    out += table[(v >> 12) & 63];
    out += rest == 2 ? table[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

}  // namespace hitpredict::ingest
