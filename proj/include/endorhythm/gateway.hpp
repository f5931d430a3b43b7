#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "endorhythm/random.hpp"

namespace endorhythm::llm {

using Seconds = std::chrono::duration<double>;

inline constexpr double kElaborationTemperature = 0.7;
inline constexpr double kAnswerTemperature = 0.0;

struct ProviderConfig {
  std::string name;
  std::string base_url;
  std::string model;
  std::string api_key_env;  // empty for local endpoints
  int max_concurrent = 4;
  int requests_per_minute = 60;  // 0 disables throttling
  double timeout_seconds = 60.0;
  int max_retries = 3;
  double backoff_base_seconds = 1.0;

  void validate() const;
};

struct ChatRequest {
  std::string system;
  std::string user;
  double temperature = kAnswerTemperature;
  std::optional<std::uint64_t> seed;
};

struct Completion {
  std::string text;
  double latency_seconds = 0.0;
  int attempts = 1;
  std::string provider;
  std::string model;
};

// Time source shared by throttling and backoff, replaceable in tests.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Seconds now() = 0;
  virtual void sleep_for(Seconds d) = 0;
};

class SteadyClock : public Clock {
 public:
  Seconds now() override;
  void sleep_for(Seconds d) override;
};

// Sleeping advances virtual time instantly. Thread-safe.
class VirtualClock : public Clock {
 public:
  Seconds now() override;
  void sleep_for(Seconds d) override;
  std::vector<Seconds> sleeps() const;

 private:
  mutable std::mutex mu_;
  Seconds now_{0.0};
  std::vector<Seconds> sleeps_;
};

// One request attempt against a backend. Implementations throw
// TransportError for network failures and HTTP errors, ProtocolError for
// malformed bodies.
class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual std::string complete(const ChatRequest& req) = 0;
};

// Widely used chat-completion wire format:
// POST {base_url}/chat/completions {model, messages, temperature}.
class HttpChatProvider : public ChatProvider {
 public:
  explicit HttpChatProvider(ProviderConfig config);
  std::string complete(const ChatRequest& req) override;

  static std::string request_body(const ProviderConfig& config, const ChatRequest& req);
  // Reads choices[0].message.content; throws ProtocolError otherwise.
  static std::string parse_response(const std::string& body);

 private:
  ProviderConfig config_;
  std::string api_key_;
};

struct MockRule {
  enum class Match { Any, Contains, Predicate };

  Match match = Match::Any;
  std::string pattern;  // substring of system or user text
  std::function<bool(const ChatRequest&)> predicate;
  std::function<std::string(const ChatRequest&)> reply;
  int fail_status = -1;  // >= 0 makes the rule throw TransportError with this status
  int uses = 1;          // 0 = unlimited

  static MockRule any(std::string response);
  static MockRule contains(std::string pattern, std::string response);
  static MockRule when(std::function<bool(const ChatRequest&)> pred, std::string response);
  static MockRule respond(std::function<std::string(const ChatRequest&)> fn);
  // Status 0 simulates a connection failure.
  static MockRule fail(int status = 503);

  MockRule& times(int n) {
    uses = n;
    return *this;
  }
  MockRule& always() { return times(0); }
  bool matches(const ChatRequest& req) const;
};

// Scripted provider: each request consumes the first matching rule that has
// uses left. Every request is recorded.
class MockProvider : public ChatProvider {
 public:
  explicit MockProvider(std::vector<MockRule> script);
  std::string complete(const ChatRequest& req) override;
  std::vector<ChatRequest> requests() const;

  // Tab-separated script: `match<TAB>outcome[<TAB>uses]` where match is `*`
  // or `contains:TEXT`, outcome is `reply:TEXT` or `fail:STATUS`, and uses
  // defaults to unlimited.
  static std::vector<MockRule> parse_script(std::istream& in);
  static std::vector<MockRule> load_script(const std::filesystem::path& path);

 private:
  mutable std::mutex mu_;
  std::vector<MockRule> script_;
  std::vector<int> remaining_;
  std::vector<ChatRequest> requests_;
};

std::shared_ptr<MockProvider> make_mock(std::vector<MockRule> script);

// base * 2^(attempt-1) * (1 + jitter), jitter_unit in [-1, 1] scaled to +-20%.
Seconds backoff_delay(double base_seconds, int failed_attempt, double jitter_unit);

// Sliding 60-second window limiter.
class RateLimiter {
 public:
  RateLimiter(int requests_per_minute, std::shared_ptr<Clock> clock);
  void acquire();

 private:
  int rpm_;
  std::shared_ptr<Clock> clock_;
  std::mutex mu_;
  std::deque<Seconds> issued_;
};

class ConcurrencyGate {
 public:
  explicit ConcurrencyGate(int limit) : limit_(limit) {}
  void enter();
  void leave();
  int peak() const;

 private:
  int limit_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
  int peak_ = 0;
};

// Provider handle with retries, throttling and a concurrency cap. Safe to
// share between threads.
class Gateway {
 public:
  Gateway(ProviderConfig config, std::shared_ptr<ChatProvider> provider,
          std::shared_ptr<Clock> clock = std::make_shared<SteadyClock>());

  // Remote provider speaking the chat-completion wire format.
  static std::shared_ptr<Gateway> http(ProviderConfig config);

  Completion chat(const std::string& system, const std::string& user,
                  double temperature = kAnswerTemperature,
                  std::optional<std::uint64_t> seed = std::nullopt);

  const ProviderConfig& config() const { return config_; }
  int peak_in_flight() const { return gate_.peak(); }

 private:
  double next_jitter();

  ProviderConfig config_;
  std::shared_ptr<ChatProvider> provider_;
  std::shared_ptr<Clock> clock_;
  RateLimiter limiter_;
  ConcurrencyGate gate_;
  std::mutex rng_mu_;
  Rng rng_;
};

// True for statuses worth retrying: no response, 429 and 5xx.
bool is_retryable_status(int status);

}  // namespace endorhythm::llm
