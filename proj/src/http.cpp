#include "endorhythm/http.hpp"

#include <httplib.h>

#include "endorhythm/error.hpp"

namespace endorhythm::http {

std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("URL must include a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, ""};
  std::string path = url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {url.substr(0, path_start), path};
}

Response post_json(const std::string& url, const std::string& body, const Headers& headers,
                   std::chrono::duration<double> timeout) {
  const auto [origin, path] = split_url(url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (origin.rfind("https://", 0) == 0)
    throw ConfigError("this build has no TLS support; cannot reach " + origin);
#endif
  httplib::Client client(origin);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
  const auto sec = static_cast<time_t>(micros.count() / 1000000);
  const auto usec = static_cast<time_t>(micros.count() % 1000000);
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);

  httplib::Headers hdrs;
  for (const auto& [k, v] : headers) hdrs.emplace(k, v);
  auto res = client.Post(path.empty() ? "/" : path, hdrs, body, "application/json");
  if (!res) {
    throw TransportError(0, "request to " + url + " failed: " + httplib::to_string(res.error()));
  }
  return {res->status, res->body};
}

}  // namespace endorhythm::http
