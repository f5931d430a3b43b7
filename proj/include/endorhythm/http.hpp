#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace endorhythm::http {

struct Response {
  int status = 0;
  std::string body;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

// POST a JSON body to an absolute http(s) URL. Returns whatever status the
// server sent; throws TransportError(0, ...) when no response arrives.
Response post_json(const std::string& url, const std::string& body, const Headers& headers,
                   std::chrono::duration<double> timeout);

// Splits "https://host:port/prefix" into origin and path prefix.
std::pair<std::string, std::string> split_url(const std::string& url);

}  // namespace endorhythm::http
