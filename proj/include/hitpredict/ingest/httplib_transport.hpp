#pragma once

// Real network transport on cpp-httplib. HTTPS needs the including target to
// define CPPHTTPLIB_OPENSSL_SUPPORT and link OpenSSL.

#include <chrono>
#include <string>

#include "httplib.h"

#include "hitpredict/ingest/http.hpp"

namespace hitpredict::ingest {

class HttplibTransport final : public HttpTransport {
 public:
  explicit HttplibTransport(std::chrono::seconds timeout = std::chrono::seconds{30})
      : timeout_(timeout) {}

  HttpResponse send(const HttpRequest& request) override {
    // One client per request: httplib::Client is not safe for concurrent use.
    httplib::Client client(request.base_url);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) headers.emplace(k, v);

    httplib::Result res = request.method == "POST"
                              ? client.Post(request.target(), headers, request.body,
                                            request.content_type)
                              : client.Get(request.target(), headers);
    if (!res)
      throw TransportError(request.method + " " + request.base_url + request.path + ": " +
                           httplib::to_string(res.error()));
    HttpResponse out;
    out.status = res->status;
    out.body = res->body;
    for (const auto& [k, v] : res->headers) {
      std::string key = k;
      for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      out.headers[key] = v;
    }
    return out;
  }

 private:
  std::chrono::seconds timeout_;
};

}  // namespace hitpredict::ingest
