#include "endorhythm/gateway.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "endorhythm/error.hpp"
#include "endorhythm/http.hpp"
#include "endorhythm/strings.hpp"

namespace endorhythm::llm {

using nlohmann::json;

void ProviderConfig::validate() const {
  if (max_concurrent < 1) throw ConfigError("provider " + name + ": max_concurrent must be >= 1");
  if (!(timeout_seconds > 0.0)) throw ConfigError("provider " + name + ": timeout must be > 0");
  if (max_retries < 0) throw ConfigError("provider " + name + ": max_retries must be >= 0");
  if (requests_per_minute < 0) throw ConfigError("provider " + name + ": requests_per_minute must be >= 0");
}

Seconds SteadyClock::now() {
  return std::chrono::duration_cast<Seconds>(std::chrono::steady_clock::now().time_since_epoch());
}

void SteadyClock::sleep_for(Seconds d) {
  if (d.count() > 0) std::this_thread::sleep_for(d);
}

Seconds VirtualClock::now() {
  std::lock_guard lock(mu_);
  return now_;
}

void VirtualClock::sleep_for(Seconds d) {
  std::lock_guard lock(mu_);
  sleeps_.push_back(d);
  if (d.count() > 0) now_ += d;
}

std::vector<Seconds> VirtualClock::sleeps() const {
  std::lock_guard lock(mu_);
  return sleeps_;
}

bool is_retryable_status(int status) { return status == 0 || status == 429 || status >= 500; }

HttpChatProvider::HttpChatProvider(ProviderConfig config) : config_(std::move(config)) {
  config_.validate();
  if (config_.base_url.empty()) throw ConfigError("provider " + config_.name + ": base_url is required");
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key)
      throw ConfigError("provider " + config_.name + ": environment variable " + config_.api_key_env +
                        " is not set");
    api_key_ = key;
  }
}

std::string HttpChatProvider::request_body(const ProviderConfig& config, const ChatRequest& req) {
  json body = {{"model", config.model},
               {"messages",
                json::array({{{"role", "system"}, {"content", req.system}},
                             {{"role", "user"}, {"content", req.user}}})},
               {"temperature", req.temperature}};
  if (req.seed) body["seed"] = *req.seed;
  return body.dump();
}

std::string HttpChatProvider::parse_response(const std::string& body) {
  try {
    const json j = json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw ProtocolError("message content is not a string");
    return content.get<std::string>();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed chat completion response: ") + e.what());
  }
}

std::string HttpChatProvider::complete(const ChatRequest& req) {
  http::Headers headers;
  if (!api_key_.empty()) headers.emplace_back("Authorization", "Bearer " + api_key_);
  std::string url = config_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  const auto res = http::post_json(url + "/chat/completions", request_body(config_, req), headers,
                                   Seconds(config_.timeout_seconds));
  if (res.status != 200) {
    throw TransportError(res.status, "provider " + config_.name + " returned HTTP " +
                                         std::to_string(res.status));
  }
  return parse_response(res.body);
}

MockRule MockRule::any(std::string response) {
  MockRule r;
  r.reply = [s = std::move(response)](const ChatRequest&) { return s; };
  return r;
}

MockRule MockRule::contains(std::string pattern, std::string response) {
  MockRule r = any(std::move(response));
  r.match = Match::Contains;
  r.pattern = std::move(pattern);
  return r;
}

MockRule MockRule::when(std::function<bool(const ChatRequest&)> pred, std::string response) {
  MockRule r = any(std::move(response));
  r.match = Match::Predicate;
  r.predicate = std::move(pred);
  return r;
}

MockRule MockRule::respond(std::function<std::string(const ChatRequest&)> fn) {
  MockRule r;
  r.reply = std::move(fn);
  return r;
}

MockRule MockRule::fail(int status) {
  MockRule r;
  r.fail_status = status;
  return r;
}

bool MockRule::matches(const ChatRequest& req) const {
  switch (match) {
    case Match::Any: return true;
    case Match::Contains:
      return req.system.find(pattern) != std::string::npos ||
             req.user.find(pattern) != std::string::npos;
    case Match::Predicate: return predicate && predicate(req);
  }
  return false;
}

MockProvider::MockProvider(std::vector<MockRule> script) : script_(std::move(script)) {
  remaining_.reserve(script_.size());
  for (const auto& r : script_) remaining_.push_back(r.uses == 0 ? -1 : r.uses);
}

std::string MockProvider::complete(const ChatRequest& req) {
  std::function<std::string(const ChatRequest&)> reply;
  int fail_status = -1;
  {
    std::lock_guard lock(mu_);
    requests_.push_back(req);
    std::size_t i = 0;
    for (; i < script_.size(); ++i) {
      if (remaining_[i] != 0 && script_[i].matches(req)) break;
    }
    if (i == script_.size()) throw ScriptExhaustedError("mock script has no rule left for this request");
    if (remaining_[i] > 0) --remaining_[i];
    reply = script_[i].reply;
    fail_status = script_[i].fail_status;
  }
  if (fail_status >= 0) throw TransportError(fail_status, "mock failure " + std::to_string(fail_status));
  return reply(req);
}

std::vector<ChatRequest> MockProvider::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::vector<MockRule> MockProvider::parse_script(std::istream& in) {
  std::vector<MockRule> rules;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (str::trim(line).empty() || line.front() == '#') continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      f.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (f.size() < 2 || f.size() > 3) throw ParseError(lineno, "expected match<TAB>outcome[<TAB>uses]");

    MockRule rule;
    const std::string& outcome = f[1];
    if (outcome.rfind("reply:", 0) == 0) {
      rule = MockRule::any(outcome.substr(6));
    } else if (outcome.rfind("fail:", 0) == 0) {
      auto status = str::to_int<int>(outcome.substr(5));
      if (!status) throw ParseError(lineno, "bad failure status");
      rule = MockRule::fail(*status);
    } else {
      throw ParseError(lineno, "outcome must start with reply: or fail:");
    }
    if (f[0].rfind("contains:", 0) == 0) {
      rule.match = MockRule::Match::Contains;
      rule.pattern = f[0].substr(9);
    } else if (f[0] != "*") {
      throw ParseError(lineno, "match must be * or contains:TEXT");
    }
    rule.uses = 0;
    if (f.size() == 3) {
      auto uses = str::to_int<int>(f[2]);
      if (!uses || *uses < 0) throw ParseError(lineno, "bad uses count");
      rule.uses = *uses;
    }
    rules.push_back(std::move(rule));
  }
  return rules;
}

std::vector<MockRule> MockProvider::load_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mock script " + path.string());
  return parse_script(in);
}

std::shared_ptr<MockProvider> make_mock(std::vector<MockRule> script) {
  return std::make_shared<MockProvider>(std::move(script));
}

Seconds backoff_delay(double base_seconds, int failed_attempt, double jitter_unit) {
  const double jitter = 0.2 * std::clamp(jitter_unit, -1.0, 1.0);
  return Seconds(base_seconds * std::pow(2.0, failed_attempt - 1) * (1.0 + jitter));
}

RateLimiter::RateLimiter(int requests_per_minute, std::shared_ptr<Clock> clock)
    : rpm_(requests_per_minute), clock_(std::move(clock)) {}

void RateLimiter::acquire() {
  if (rpm_ <= 0) return;
  const Seconds window(60.0);
  std::unique_lock lock(mu_);
  while (true) {
    const Seconds now = clock_->now();
    // Same expression as the wait below, so a finished sleep always expires the entry.
    while (!issued_.empty() && now >= issued_.front() + window) issued_.pop_front();
    if (static_cast<int>(issued_.size()) < rpm_) {
      issued_.push_back(now);
      return;
    }
    const Seconds wait = issued_.front() + window - now;
    lock.unlock();
    clock_->sleep_for(wait);
    lock.lock();
  }
}

void ConcurrencyGate::enter() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return in_flight_ < limit_; });
  ++in_flight_;
  peak_ = std::max(peak_, in_flight_);
}

void ConcurrencyGate::leave() {
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  cv_.notify_one();
}

int ConcurrencyGate::peak() const {
  std::lock_guard lock(mu_);
  return peak_;
}

Gateway::Gateway(ProviderConfig config, std::shared_ptr<ChatProvider> provider,
                 std::shared_ptr<Clock> clock)
    : config_(std::move(config)),
      provider_(std::move(provider)),
      clock_(std::move(clock)),
      limiter_(config_.requests_per_minute, clock_),
      gate_(config_.max_concurrent),
      rng_(Rng::mix({std::hash<std::string>{}(config_.name)})) {
  config_.validate();
}

std::shared_ptr<Gateway> Gateway::http(ProviderConfig config) {
  auto provider = std::make_shared<HttpChatProvider>(config);
  return std::make_shared<Gateway>(std::move(config), std::move(provider));
}

double Gateway::next_jitter() {
  std::lock_guard lock(rng_mu_);
  return 2.0 * rng_.uniform01() - 1.0;
}

Completion Gateway::chat(const std::string& system, const std::string& user, double temperature,
                         std::optional<std::uint64_t> seed) {
  const ChatRequest req{system, user, temperature, seed};
  const Seconds start = clock_->now();
  for (int attempt = 1;; ++attempt) {
    try {
      limiter_.acquire();
      gate_.enter();
      struct Leave {
        ConcurrencyGate& g;
        ~Leave() { g.leave(); }
      } leave{gate_};
      std::string text = provider_->complete(req);
      return {std::move(text), (clock_->now() - start).count(), attempt, config_.name, config_.model};
    } catch (const TransportError& e) {
      if (!is_retryable_status(e.status())) throw;
      if (attempt > config_.max_retries) {
        throw TransportError(e.status(), "provider " + config_.name + ": giving up after " +
                                             std::to_string(attempt) + " attempts: " + e.what());
      }
      clock_->sleep_for(backoff_delay(config_.backoff_base_seconds, attempt, next_jitter()));
    }
  }
}

}  // namespace endorhythm::llm
