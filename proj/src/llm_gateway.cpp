#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "qgbench/llm_gateway.hpp"

#include <charconv>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <random>
#include <thread>

#include <httplib.h>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "qgbench/errors.hpp"

namespace qgbench::llm {
namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void append_field(std::string& out, std::string_view field) {
  out += std::to_string(field.size());
  out += ':';
  out += field;
  out += '\n';
}

bool retryable(int status) {
  return status == 0 || status == 408 || status == 429 || status >= 500;
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct UrlParts {
  std::string scheme_host_port;
  std::string path;
};

UrlParts split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw ConfigError("endpoint_url needs a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

void ModelSpec::validate() const {
  if (name.empty()) throw ConfigError("model name must be non-empty");
  if (!(temperature >= 0.0))
    throw ConfigError("model " + name + ": temperature must be >= 0");
  if (max_output_tokens <= 0)
    throw ConfigError("model " + name + ": max_output_tokens must be > 0");
}

ModelSpec model_from_json(const Json& j) {
  ModelSpec m;
  m.name = j.at("name").get<std::string>();
  m.endpoint_url = j.value("endpoint_url", std::string{});
  m.api_key_env = j.value("api_key_env", std::string{});
  m.temperature = j.value("temperature", 0.0);
  m.max_output_tokens = j.value("max_output_tokens", 1024);
  return m;
}

Json to_json(const ModelSpec& m) {
  return {{"name", m.name},
          {"endpoint_url", m.endpoint_url},
          {"api_key_env", m.api_key_env},
          {"temperature", m.temperature},
          {"max_output_tokens", m.max_output_tokens}};
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1)
    throw Error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::string cache_key(const ModelSpec& model, std::string_view system,
                      std::string_view user) {
  std::string material = "qgbench-chat-v1\n";
  append_field(material, model.name);
  append_field(material, format_double(model.temperature));
  append_field(material, std::to_string(model.max_output_tokens));
  append_field(material, system);
  append_field(material, user);
  return sha256_hex(material);
}

Json build_request_body(const ModelSpec& model, const ChatRequest& req) {
  Json messages = Json::array();
  if (!req.system.empty())
    messages.push_back({{"role", "system"}, {"content", req.system}});
  messages.push_back({{"role", "user"}, {"content", req.user}});
  return {{"model", model.name},
          {"messages", std::move(messages)},
          {"temperature", model.temperature},
          {"max_tokens", model.max_output_tokens}};
}

std::string extract_content(const std::string& body) {
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::parse_error&) {
    throw ProtocolError("response body is not JSON");
  }
  try {
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string())
      throw ProtocolError("choices[0].message.content is not a string");
    return content.get<std::string>();
  } catch (const Json::exception&) {
    throw ProtocolError("response lacks choices[0].message.content");
  }
}

HttpReply HttpTransport::post(const ModelSpec& model, const Json& body) {
  httplib::Headers headers;
  if (!model.api_key_env.empty()) {
    const char* key = std::getenv(model.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
      throw ConfigError("environment variable " + model.api_key_env +
                        " is not set (model " + model.name + ")");
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  auto url = split_url(model.endpoint_url);
  httplib::Client client(url.scheme_host_port);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  auto res = client.Post(url.path, headers, body.dump(), "application/json");
  if (!res) return {0, httplib::to_string(res.error())};
  return {res->status, res->body};
}

MockTransport::MockTransport(std::vector<Entry> script) {
  for (auto& e : script) {
    auto it = std::find_if(groups_.begin(), groups_.end(), [&](const Group& g) {
      return g.match == e.match && g.system == e.system;
    });
    if (it == groups_.end()) {
      groups_.push_back({e.match, e.system, {}});
      it = std::prev(groups_.end());
    }
    it->entries.push_back(std::move(e));
  }
}

std::shared_ptr<MockTransport> MockTransport::from_file(
    const std::filesystem::path& path) {
  std::vector<Entry> script;
  for (const auto& row : read_jsonl(path)) {
    const auto& j = row.value;
    if (!j.is_object() || !j.contains("match") || !j["match"].is_string())
      throw ConfigError(path.string() + ":" + std::to_string(row.line) +
                        ": mock entry needs a string \"match\"");
    Entry e;
    e.match = j["match"].get<std::string>();
    e.system = j.value("system", std::string{});
    e.response = j.value("response", std::string{});
    e.status = j.value("status", 200);
    if (j.contains("body")) e.body = j["body"].get<std::string>();
    script.push_back(std::move(e));
  }
  return std::make_shared<MockTransport>(std::move(script));
}

HttpReply MockTransport::post(const ModelSpec&, const Json& body) {
  calls_.fetch_add(1);
  std::string system;
  std::string user;
  for (const auto& m : body.at("messages")) {
    if (m.at("role") == "system") system = m.at("content").get<std::string>();
    if (m.at("role") == "user") user = m.at("content").get<std::string>();
  }
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    const auto& group = groups_[g];
    if (user.find(group.match) == std::string::npos ||
        system.find(group.system) == std::string::npos)
      continue;
    std::size_t index;
    {
      std::lock_guard lock(mu_);
      auto& cursor = cursor_[{g, body.dump()}];
      index = std::min(cursor, group.entries.size() - 1);
      ++cursor;
    }
    const Entry& e = group.entries[index];
    if (e.body) return {e.status, *e.body};
    if (e.status != 200) return {e.status, R"({"error":"scripted failure"})"};
    Json reply = {{"choices",
                   {{{"index", 0},
                     {"message",
                      {{"role", "assistant"}, {"content", e.response}}}}}}};
    return {200, reply.dump()};
  }
  throw TransportError("mock transport: no script entry matches request");
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
  return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<std::string> ResponseCache::load(const std::string& key) const {
  std::ifstream in(path_for(key), std::ios::binary);
  if (!in) return std::nullopt;
  try {
    Json j = Json::parse(in);
    return j.at("response").at("text").get<std::string>();
  } catch (const Json::exception&) {
    spdlog::warn("ignoring unreadable cache entry {}", path_for(key).string());
    return std::nullopt;
  }
}

void ResponseCache::store(const std::string& key, const ModelSpec& model,
                          const ChatRequest& req,
                          const std::string& text) const {
  Json entry = {{"key", key},
                {"request",
                 {{"model", model.name},
                  {"temperature", model.temperature},
                  {"max_output_tokens", model.max_output_tokens},
                  {"system", req.system},
                  {"user", req.user}}},
                {"response", {{"text", text}}},
                {"timestamp", utc_timestamp()}};
  write_text_atomic(path_for(key), entry.dump(2) + "\n");
}

Gateway::Gateway(std::vector<ModelSpec> models,
                 std::shared_ptr<Transport> transport,
                 std::optional<std::filesystem::path> cache_dir,
                 RetryPolicy retry, std::size_t max_in_flight)
    : transport_(std::move(transport)),
      retry_(retry),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }),
      max_in_flight_(std::max<std::size_t>(1, max_in_flight)) {
  for (auto& m : models) {
    m.validate();
    auto name = m.name;
    if (!models_.emplace(name, std::move(m)).second)
      throw ConfigError("duplicate model name " + name);
  }
  if (cache_dir) cache_.emplace(*cache_dir);
  if (retry_.max_attempts < 1) throw ConfigError("retry max_attempts must be >= 1");
}

const ModelSpec& Gateway::model(const std::string& name) const {
  auto it = models_.find(name);
  if (it == models_.end()) throw ConfigError("unknown model " + name);
  return it->second;
}

bool Gateway::has_model(const std::string& name) const {
  return models_.count(name) != 0;
}

std::string Gateway::cache_key(const ChatRequest& req) const {
  return llm::cache_key(model(req.model), req.system, req.user);
}

std::chrono::milliseconds Gateway::backoff(int attempt) const {
  double delay = static_cast<double>(retry_.base_delay.count());
  for (int i = 1; i < attempt; ++i) delay *= retry_.factor;
  if (retry_.jitter) {
    thread_local std::mt19937 rng{std::random_device{}()};
    delay *= std::uniform_real_distribution<double>(0.5, 1.5)(rng);
  }
  return std::chrono::milliseconds(static_cast<std::int64_t>(delay));
}

ChatResponse Gateway::complete(const ChatRequest& req) {
  if (req.user.empty()) throw ConfigError("chat request with empty user prompt");
  const ModelSpec& spec = model(req.model);
  const std::string key = llm::cache_key(spec, req.system, req.user);
  if (cache_) {
    if (auto hit = cache_->load(key)) {
      cache_hits_.fetch_add(1);
      return {*hit, true, 0, 0};
    }
  }
  if (!transport_) throw ConfigError("no transport configured and cache is cold");

  const Json body = build_request_body(spec, req);
  const auto started = std::chrono::steady_clock::now();
  std::string last_error;
  for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
    HttpReply reply;
    {
      std::unique_lock lock(slot_mu_);
      slot_cv_.wait(lock, [&] { return in_flight_ < max_in_flight_; });
      ++in_flight_;
    }
    try {
      transport_calls_.fetch_add(1);
      reply = transport_->post(spec, body);
    } catch (...) {
      {
        std::lock_guard lock(slot_mu_);
        --in_flight_;
      }
      slot_cv_.notify_one();
      throw;
    }
    {
      std::lock_guard lock(slot_mu_);
      --in_flight_;
    }
    slot_cv_.notify_one();

    if (reply.status >= 200 && reply.status < 300) {
      std::string text = extract_content(reply.body);
      if (cache_) cache_->store(key, spec, req, text);
      auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - started);
      return {std::move(text), false, elapsed.count(), attempt};
    }
    last_error = reply.status == 0 ? "network error: " + reply.body
                                   : "HTTP " + std::to_string(reply.status);
    if (!retryable(reply.status))
      throw TransportError(spec.name + ": " + last_error + ": " +
                           reply.body.substr(0, 300));
    if (attempt < retry_.max_attempts) {
      retries_.fetch_add(1);
      auto delay = backoff(attempt);
      spdlog::debug("{}: {} (attempt {}), retrying in {} ms", spec.name,
                    last_error, attempt, delay.count());
      sleeper_(delay);
    }
  }
  throw TransportError(spec.name + ": giving up after " +
                       std::to_string(retry_.max_attempts) +
                       " attempts: " + last_error);
}

Gateway::Stats Gateway::stats() const {
  return {transport_calls_.load(), cache_hits_.load(), retries_.load()};
}

void Gateway::reset_stats() {
  transport_calls_ = 0;
  cache_hits_ = 0;
  retries_ = 0;
}

}  // namespace qgbench::llm
