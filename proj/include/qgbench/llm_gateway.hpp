#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qgbench/jsonl.hpp"

namespace qgbench::llm {

struct ModelSpec {
  std::string name;
  std::string endpoint_url;
  std::string api_key_env;  // empty: send no Authorization header
  double temperature = 0.0;
  int max_output_tokens = 1024;

  // Throws ConfigError on an empty name, negative temperature or
  // non-positive token budget.
  void validate() const;
};

ModelSpec model_from_json(const Json& j);
Json to_json(const ModelSpec& m);

struct ChatRequest {
  std::string model;  // ModelSpec::name
  std::string system;
  std::string user;
};

struct ChatResponse {
  std::string text;
  bool cached = false;
  std::int64_t latency_ms = 0;
  int attempts = 0;  // transport attempts; 0 on a cache hit
};

// Raw reply from a transport. status == 0 means the request never got an
// HTTP answer (connection refused, timeout).
struct HttpReply {
  int status = 0;
  std::string body;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpReply post(const ModelSpec& model, const Json& body) = 0;
};

// OpenAI-compatible chat-completions over HTTP(S). The bearer token is read
// from the model's api_key_env at call time.
class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(std::chrono::seconds timeout = std::chrono::seconds(120))
      : timeout_(timeout) {}
  HttpReply post(const ModelSpec& model, const Json& body) override;

 private:
  std::chrono::seconds timeout_;
};

// Scripted transport for offline runs. Script lines are
//   {"match": <substring of user>, "response": <text>}
// with optional "system" (substring of the system prompt), "status" (HTTP
// status to return, default 200) and "body" (raw body, bypassing the
// chat-completion envelope). Entries sharing (match, system) form a group;
// the first group in file order that matches a request answers it. Each
// distinct request walks its group in order and the last entry repeats, so
// replies do not depend on scheduling.
class MockTransport final : public Transport {
 public:
  struct Entry {
    std::string match;
    std::string system;
    std::string response;
    int status = 200;
    std::optional<std::string> body;
  };

  explicit MockTransport(std::vector<Entry> script);
  static std::shared_ptr<MockTransport> from_file(const std::filesystem::path& path);

  HttpReply post(const ModelSpec& model, const Json& body) override;
  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  struct Group {
    std::string match;
    std::string system;
    std::vector<Entry> entries;
  };
  std::vector<Group> groups_;
  std::mutex mu_;
  std::map<std::pair<std::size_t, std::string>, std::size_t> cursor_;
  std::atomic<std::size_t> calls_{0};
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;
  bool jitter = true;
};

// Content-addressed store: <dir>/<first 2 hex>/<key>.json holding the
// request, the response text and a timestamp.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {}
  std::filesystem::path path_for(const std::string& key) const;
  std::optional<std::string> load(const std::string& key) const;
  void store(const std::string& key, const ModelSpec& model,
             const ChatRequest& req, const std::string& text) const;

 private:
  std::filesystem::path dir_;
};

// SHA-256 (hex) over model name, temperature, token budget, system and user.
std::string cache_key(const ModelSpec& model, std::string_view system,
                      std::string_view user);

std::string sha256_hex(std::string_view data);

Json build_request_body(const ModelSpec& model, const ChatRequest& req);

// Pulls choices[0].message.content out of a response body; ProtocolError
// otherwise.
std::string extract_content(const std::string& body);

class Gateway {
 public:
  struct Stats {
    std::size_t transport_calls = 0;
    std::size_t cache_hits = 0;
    std::size_t retries = 0;
  };

  Gateway(std::vector<ModelSpec> models, std::shared_ptr<Transport> transport,
          std::optional<std::filesystem::path> cache_dir = std::nullopt,
          RetryPolicy retry = {}, std::size_t max_in_flight = 8);

  // Cache lookup, then the transport with retries on status 0, 408, 429 and
  // 5xx. Throws TransportError, ProtocolError or ConfigError.
  ChatResponse complete(const ChatRequest& req);

  std::string cache_key(const ChatRequest& req) const;
  const ModelSpec& model(const std::string& name) const;
  bool has_model(const std::string& name) const;

  Stats stats() const;
  void reset_stats();

  // Replaces the backoff sleep (tests run with a no-op).
  void set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper) {
    sleeper_ = std::move(sleeper);
  }

 private:
  std::chrono::milliseconds backoff(int attempt) const;

  std::map<std::string, ModelSpec> models_;
  std::shared_ptr<Transport> transport_;
  std::optional<ResponseCache> cache_;
  RetryPolicy retry_;
  std::function<void(std::chrono::milliseconds)> sleeper_;

  std::size_t max_in_flight_;
  std::size_t in_flight_ = 0;
  std::mutex slot_mu_;
  std::condition_variable slot_cv_;

  std::atomic<std::size_t> transport_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
  std::atomic<std::size_t> retries_{0};
};

}  // namespace qgbench::llm
