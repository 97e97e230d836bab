#include <gtest/gtest.h>

#include <cstdlib>
#include <set>
#include <thread>

#include "qgbench/errors.hpp"
#include "qgbench/llm_gateway.hpp"
#include "test_support.hpp"

using namespace qgbench;
using namespace qgbench::llm;

namespace {

ModelSpec spec(const std::string& name = "m", double temperature = 0.0) {
  ModelSpec m;
  m.name = name;
  m.endpoint_url = "http://localhost:1/v1";
  m.temperature = temperature;
  return m;
}

MockTransport::Entry reply(std::string match, std::string text, int status = 200) {
  return {std::move(match), "", std::move(text), status, std::nullopt};
}

RetryPolicy fast_retry(int attempts) {
  RetryPolicy r;
  r.max_attempts = attempts;
  r.base_delay = std::chrono::milliseconds(0);
  r.jitter = false;
  return r;
}

}  // namespace

TEST(Gateway, MockPassthrough) {
  auto mock = std::make_shared<MockTransport>(std::vector{reply("answer", "42")});
  Gateway gw({spec()}, mock);
  auto r = gw.complete({"m", "sys", "what is the answer?"});
  EXPECT_EQ(r.text, "42");
  EXPECT_FALSE(r.cached);
  EXPECT_EQ(r.attempts, 1);
  EXPECT_EQ(mock->calls(), 1u);
}

TEST(Gateway, SecondIdenticalRequestIsCached) {
  qgtest::TempDir dir;
  auto mock = std::make_shared<MockTransport>(std::vector{reply("", "hello")});
  Gateway gw({spec()}, mock, dir.path());
  auto first = gw.complete({"m", "s", "u"});
  auto second = gw.complete({"m", "s", "u"});
  EXPECT_FALSE(first.cached);
  EXPECT_TRUE(second.cached);
  EXPECT_EQ(second.text, first.text);
  EXPECT_EQ(second.attempts, 0);
  EXPECT_EQ(mock->calls(), 1u);
  EXPECT_EQ(gw.stats().cache_hits, 1u);

  // A fresh gateway over the same directory also hits.
  auto mock2 = std::make_shared<MockTransport>(std::vector{reply("", "other")});
  Gateway gw2({spec()}, mock2, dir.path());
  EXPECT_EQ(gw2.complete({"m", "s", "u"}).text, "hello");
  EXPECT_EQ(mock2->calls(), 0u);
}

TEST(Gateway, CacheLayout) {
  qgtest::TempDir dir;
  auto mock = std::make_shared<MockTransport>(std::vector{reply("", "x")});
  Gateway gw({spec()}, mock, dir.path());
  ChatRequest req{"m", "s", "u"};
  gw.complete(req);
  std::string key = gw.cache_key(req);
  auto file = dir.path() / key.substr(0, 2) / (key + ".json");
  ASSERT_TRUE(std::filesystem::exists(file));
  auto j = Json::parse(qgtest::read_file(file));
  EXPECT_EQ(j["response"]["text"], "x");
  EXPECT_EQ(j["request"]["user"], "u");
  EXPECT_TRUE(j.contains("timestamp"));
}

TEST(Gateway, FailTwiceThenSucceed) {
  auto mock = std::make_shared<MockTransport>(
      std::vector{reply("", "", 503), reply("", "", 429), reply("", "ok")});
  Gateway gw({spec()}, mock, std::nullopt, fast_retry(3));
  std::vector<std::chrono::milliseconds> sleeps;
  gw.set_sleeper([&](std::chrono::milliseconds d) { sleeps.push_back(d); });
  auto r = gw.complete({"m", "", "u"});
  EXPECT_EQ(r.text, "ok");
  EXPECT_EQ(r.attempts, 3);
  EXPECT_EQ(gw.stats().retries, 2u);
  EXPECT_EQ(mock->calls(), 3u);
  EXPECT_EQ(sleeps.size(), 2u);
}

TEST(Gateway, BackoffGrowsGeometrically) {
  auto mock = std::make_shared<MockTransport>(std::vector{reply("", "", 500)});
  RetryPolicy policy;
  policy.max_attempts = 4;
  policy.base_delay = std::chrono::milliseconds(100);
  policy.jitter = false;
  Gateway gw({spec()}, mock, std::nullopt, policy);
  std::vector<long> sleeps;
  gw.set_sleeper([&](std::chrono::milliseconds d) { sleeps.push_back(d.count()); });
  EXPECT_THROW(gw.complete({"m", "", "u"}), TransportError);
  EXPECT_EQ(sleeps, (std::vector<long>{100, 200, 400}));
  EXPECT_EQ(mock->calls(), 4u);
}

TEST(Gateway, NonRetryableStatusFailsFast) {
  auto mock = std::make_shared<MockTransport>(std::vector{reply("", "", 400)});
  Gateway gw({spec()}, mock, std::nullopt, fast_retry(5));
  gw.set_sleeper([](auto) {});
  EXPECT_THROW(gw.complete({"m", "", "u"}), TransportError);
  EXPECT_EQ(mock->calls(), 1u);
}

TEST(Gateway, MalformedBodyIsProtocolError) {
  MockTransport::Entry bad{"", "", "", 200, std::string("not json")};
  MockTransport::Entry wrong{"", "", "", 200, std::string(R"({"choices": []})")};
  Gateway a({spec()}, std::make_shared<MockTransport>(std::vector{bad}));
  Gateway b({spec()}, std::make_shared<MockTransport>(std::vector{wrong}));
  EXPECT_THROW(a.complete({"m", "", "u"}), ProtocolError);
  EXPECT_THROW(b.complete({"m", "", "u"}), ProtocolError);
}

TEST(Gateway, UnknownModelAndEmptyUser) {
  Gateway gw({spec()}, std::make_shared<MockTransport>(std::vector{reply("", "x")}));
  EXPECT_THROW(gw.complete({"nope", "", "u"}), ConfigError);
  EXPECT_THROW(gw.complete({"m", "", ""}), ConfigError);
}

TEST(Gateway, MissingApiKeyIsConfigError) {
  ::unsetenv("QGBENCH_TEST_UNSET_KEY");
  ModelSpec m = spec();
  m.api_key_env = "QGBENCH_TEST_UNSET_KEY";
  Gateway gw({m}, std::make_shared<HttpTransport>());
  EXPECT_THROW(gw.complete({"m", "", "u"}), ConfigError);
}

TEST(Gateway, ModelSpecValidation) {
  ModelSpec m = spec();
  m.temperature = -0.5;
  EXPECT_THROW(m.validate(), ConfigError);
  m = spec("");
  EXPECT_THROW(m.validate(), ConfigError);
  m = spec();
  m.max_output_tokens = 0;
  EXPECT_THROW(m.validate(), ConfigError);
  Json j = {{"name", "x"}, {"endpoint_url", "http://h/v1"}, {"temperature", 0.5}};
  ModelSpec parsed = model_from_json(j);
  EXPECT_EQ(parsed.name, "x");
  EXPECT_DOUBLE_EQ(parsed.temperature, 0.5);
  EXPECT_EQ(parsed.max_output_tokens, 1024);
}

TEST(CacheKey, Sensitivity) {
  ModelSpec base = spec("m", 0.0);
  std::string k = cache_key(base, "sys", "user");
  EXPECT_EQ(k, cache_key(base, "sys", "user"));
  EXPECT_EQ(k.size(), 64u);
  EXPECT_NE(k, cache_key(base, "sys", "usex"));
  EXPECT_NE(k, cache_key(base, "sy", "user"));
  EXPECT_NE(k, cache_key(spec("m", 0.1), "sys", "user"));
  EXPECT_NE(k, cache_key(spec("n", 0.0), "sys", "user"));
  ModelSpec budget = base;
  budget.max_output_tokens = 10;
  EXPECT_NE(k, cache_key(budget, "sys", "user"));
  // Field boundaries are unambiguous.
  EXPECT_NE(cache_key(base, "ab", "c"), cache_key(base, "a", "bc"));
}

TEST(CacheKey, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(RequestBody, Shape) {
  ModelSpec m = spec("gpt", 0.0);
  Json body = build_request_body(m, {"gpt", "S", "U"});
  EXPECT_EQ(body["model"], "gpt");
  ASSERT_EQ(body["messages"].size(), 2u);
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["messages"][1]["content"], "U");
  EXPECT_EQ(build_request_body(m, {"gpt", "", "U"})["messages"].size(), 1u);
  EXPECT_EQ(extract_content(R"({"choices":[{"message":{"content":"hi"}}]})"), "hi");
}

TEST(Mock, GroupsWalkPerRequestAndLastRepeats) {
  auto mock = std::make_shared<MockTransport>(
      std::vector{reply("a", "first"), reply("a", "second"), reply("", "fallback")});
  Gateway gw({spec()}, mock);
  EXPECT_EQ(gw.complete({"m", "", "a1"}).text, "first");
  EXPECT_EQ(gw.complete({"m", "", "a1"}).text, "second");
  EXPECT_EQ(gw.complete({"m", "", "a1"}).text, "second");
  // A different request starts its own walk.
  EXPECT_EQ(gw.complete({"m", "", "a2"}).text, "first");
  EXPECT_EQ(gw.complete({"m", "", "zzz"}).text, "fallback");
}

TEST(Mock, SystemFilterAndNoMatch) {
  MockTransport::Entry e{"", "judge", "yes", 200, std::nullopt};
  Gateway gw({spec()}, std::make_shared<MockTransport>(std::vector{e}));
  EXPECT_EQ(gw.complete({"m", "you are a judge", "u"}).text, "yes");
  EXPECT_THROW(gw.complete({"m", "other", "u"}), TransportError);
}

TEST(Mock, FromFile) {
  qgtest::TempDir dir;
  qgtest::write_file(dir / "s.jsonl",
                     "{\"match\": \"x\", \"response\": \"1\"}\n\n"
                     "{\"match\": \"\", \"response\": \"2\", \"status\": 200}\n");
  auto mock = MockTransport::from_file(dir / "s.jsonl");
  Gateway gw({spec()}, mock);
  EXPECT_EQ(gw.complete({"m", "", "x"}).text, "1");
  EXPECT_EQ(gw.complete({"m", "", "y"}).text, "2");
  qgtest::write_file(dir / "bad.jsonl", "{\"response\": \"1\"}\n");
  EXPECT_THROW(MockTransport::from_file(dir / "bad.jsonl"), Error);
}

TEST(Gateway, ConcurrentSameKeyConverges) {
  qgtest::TempDir dir;
  auto mock = std::make_shared<MockTransport>(std::vector{reply("", "same")});
  Gateway gw({spec()}, mock, dir.path(), fast_retry(1), 3);
  std::vector<std::jthread> threads;
  std::atomic<int> ok{0};
  for (int t = 0; t < 16; ++t)
    threads.emplace_back([&] {
      for (int i = 0; i < 20; ++i)
        if (gw.complete({"m", "", "q" + std::to_string(i % 4)}).text == "same") ++ok;
    });
  threads.clear();
  EXPECT_EQ(ok.load(), 16 * 20);
  std::size_t files = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir.path()))
    if (e.is_regular_file()) {
      ++files;
      EXPECT_EQ(e.path().extension(), ".json");
      EXPECT_NO_THROW(Json::parse(qgtest::read_file(e.path())));
    }
  EXPECT_EQ(files, 4u);
}
