#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "endorhythm/gateway.hpp"

namespace endorhythm::cli {

struct ProviderEntry {
  llm::ProviderConfig config;
  std::string kind = "http";  // http | mock
  std::filesystem::path script;  // mock only
};

// INI config, path given by --config:
//
//   [general]
//   seed = 42
//   baseline = You are a helpful assistant.
//   resources = /path/to/lexicons
//   bands = bands.ini
//   contexts = contexts.txt
//   femaleness = lexicon          ; or an http(s) classifier URL
//
//   [provider.local]
//   kind = http                   ; or mock
//   base_url = http://localhost:8000/v1
//   model = llama-3-8b
//   api_key_env = LOCAL_API_KEY
//   max_concurrent = 4
//   requests_per_minute = 60
//   timeout_seconds = 60
//   max_retries = 3
//   backoff_base_seconds = 1
//   script = replies.tsv          ; mock only
//
// Relative paths are resolved against the config file's directory.
struct GlobalConfig {
  std::map<std::string, ProviderEntry> providers;
  std::optional<std::uint64_t> seed;
  std::string baseline;
  std::filesystem::path resources;
  std::filesystem::path bands;
  std::filesystem::path contexts;
  std::string femaleness = "lexicon";
};

GlobalConfig default_config();
GlobalConfig load_config(const std::filesystem::path& path);

std::shared_ptr<llm::Gateway> make_gateway(const ProviderEntry& entry);

// Exit codes: 0 success, 1 usage error, 2 runtime error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace endorhythm::cli
