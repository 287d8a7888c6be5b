/*
 * Copyright 2026 The revlabel Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "revlabel/gateway.hpp"
#include "support.hpp"

#include <cstdlib>
#include <thread>

using namespace revlabel;
using namespace std::chrono_literals;

namespace {

PromptSpec prompt(std::string id, std::string text = "some text") {
  return {"ctx", "classify " + id + ": " + text, "coarse", id};
}

Scheme coarse() { return load_scheme(testing::data_dir() / "definitions", "coarse"); }

EndpointConfig mock_endpoint(std::string id, MockBehavior m, int concurrency = 1) {
  EndpointConfig e;
  e.model_id = std::move(id);
  e.max_concurrency = concurrency;
  e.requests_per_minute = 1000000;
  e.mock = std::move(m);
  return e;
}

// Counts calls, tracks overlap, optionally fails.
class Instrumented : public Backend {
 public:
  std::atomic<int> calls{0}, live{0}, peak{0};
  std::function<std::string(const PromptSpec&, int)> answer =
      [](const PromptSpec&, int) { return std::string("Category: Other"); };
  std::chrono::microseconds hold{0};

  std::string complete(const EndpointConfig&, const PromptSpec& p,
                       const RequestContext&) override {
    const int n = ++calls;
    const int now = ++live;
    int seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(hold);
    struct Dec {
      std::atomic<int>& v;
      ~Dec() { --v; }
    } dec{live};
    return answer(p, n);
  }
};

}  // namespace

TEST_CASE("fixture mock") {
  MockBehavior m;
  m.mode = MockBehavior::Mode::FixtureTable;
  m.fixture = {{"r7", "Bug Report"}};
  auto s = coarse();
  CHECK(mock_classify(m, s, std::nullopt, "r7", "gpt") == "Bug Report");
  try {
    mock_classify(m, s, std::nullopt, "r9", "gpt");
    FAIL("expected FixtureMiss");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FixtureMiss);
  }
}

TEST_CASE("confusion mock") {
  auto s = coarse();
  MockBehavior identity;
  identity.confusion = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  CHECK(mock_classify(identity, s, "Bug Report", "r1", "m") == "Category: Bug Report");
  CHECK(mock_classify(identity, s, "Other", "r1", "m") == "Category: Other");

  MockBehavior row;
  row.confusion = {{0.8, 0.1, 0.1}, {0, 1, 0}, {0, 0, 1}};
  row.seed = 99;
  std::map<std::string, int> freq;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    freq[mock_classify(row, s, "Bug Report", "r" + std::to_string(i), "m")]++;
  }
  CHECK(std::abs(freq["Category: Bug Report"] / double(n) - 0.8) <= 0.02);
  CHECK(std::abs(freq["Category: Feature Request"] / double(n) - 0.1) <= 0.02);
  CHECK(std::abs(freq["Category: Other"] / double(n) - 0.1) <= 0.02);

  // same key, same answer; model id is part of the key
  CHECK(mock_classify(row, s, "Bug Report", "r5", "m") ==
        mock_classify(row, s, "Bug Report", "r5", "m"));

  MockBehavior acc;
  acc.accuracy = 0.8;
  auto m = acc.confusion_for(3);
  CHECK(m[0][0] == doctest::Approx(0.8));
  CHECK(m[0][1] == doctest::Approx(0.1));
  CHECK(m[2][1] == doctest::Approx(0.1));
}

TEST_CASE("mock validation") {
  MockBehavior both;
  both.accuracy = 0.5;
  both.confusion = {{1}};
  CHECK_THROWS_AS(both.validate(), Error);
  MockBehavior neither;
  CHECK_THROWS_AS(neither.validate(), Error);
  MockBehavior bad_row;
  bad_row.confusion = {{0.5, 0.4}, {0, 1}};
  CHECK_THROWS_AS(bad_row.validate(), Error);
  EndpointConfig e;
  e.model_id = "x";
  CHECK_THROWS_AS(e.validate(), Error);  // no base_url, no mock
  e.base_url = "http://localhost:1";
  CHECK_NOTHROW(e.validate());
  e.max_concurrency = 0;
  CHECK_THROWS_AS(e.validate(), Error);
}

TEST_CASE("prompt hash covers model, temperature and bytes") {
  auto p = prompt("r1");
  const auto h = prompt_hash("m", p, 0.0);
  CHECK(h.size() == 64);
  CHECK(h == prompt_hash("m", p, 0.0));
  CHECK(h != prompt_hash("n", p, 0.0));
  CHECK(h != prompt_hash("m", p, 0.7));
  CHECK(h != prompt_hash("m", prompt("r1", "other text"), 0.0));
}

TEST_CASE("cache round trip and submit") {
  testing::TempDir dir("gw");
  auto backend = std::make_shared<Instrumented>();
  Gateway gw({dir.path(), backend});
  MockBehavior fx;
  fx.mode = MockBehavior::Mode::FixtureTable;
  fx.fixture = {{"r7", "x"}};
  auto ep = mock_endpoint("model/a", fx);

  auto first = gw.submit(ep, prompt("r7"));
  CHECK_FALSE(first.from_cache);
  CHECK(first.output_text == "Category: Other");
  auto second = gw.submit(ep, prompt("r7"));
  CHECK(second.from_cache);
  CHECK(second.output_text == first.output_text);
  CHECK(backend->calls == 1);
  CHECK(gw.stats("model/a").cache_hits == 1);
  CHECK(std::filesystem::is_regular_file(
      ResponseCache(dir.path()).entry_path("model/a", first.prompt_hash)));

  // a torn entry reads as a miss
  testing::write(ResponseCache(dir.path()).entry_path("model/a", first.prompt_hash), "{");
  CHECK_FALSE(ResponseCache(dir.path()).get("model/a", first.prompt_hash).has_value());
}

TEST_CASE("mock backend through the gateway") {
  testing::TempDir dir("gw");
  Gateway gw({dir.path()});
  MockBehavior fx;
  fx.mode = MockBehavior::Mode::FixtureTable;
  fx.fixture = {{"r7", "Bug Report"}};
  auto ep = mock_endpoint("fx", fx);
  CHECK(gw.submit(ep, prompt("r7")).output_text == "Bug Report");
  try {
    gw.submit(ep, prompt("r9"));
    FAIL("expected FixtureMiss");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FixtureMiss);
  }
}

TEST_CASE("rate limiter with a fake clock") {
  auto now = std::chrono::steady_clock::time_point{};
  std::vector<std::chrono::nanoseconds> sleeps;
  RateLimiter lim(
      3, [&] { return now; },
      [&](std::chrono::nanoseconds d) {
        sleeps.push_back(d);
        now += d;
      });
  lim.acquire();
  now += 10s;
  lim.acquire();
  lim.acquire();
  CHECK(sleeps.empty());
  lim.acquire();  // window full: waits until the first issue ages out
  REQUIRE(sleeps.size() == 1);
  CHECK(sleeps[0] == std::chrono::nanoseconds(50s));
}

TEST_CASE("retries back off, then give up") {
  testing::TempDir dir("gw");
  auto backend = std::make_shared<Instrumented>();
  backend->answer = [](const PromptSpec&, int n) -> std::string {
    if (n <= 2) throw RetryableError(ErrorCode::RateLimited, "429");
    return "Category: Bug Report";
  };
  std::vector<std::chrono::nanoseconds> sleeps;
  Gateway::Options opts{dir.path(), backend};
  opts.sleep = [&](std::chrono::nanoseconds d) { sleeps.push_back(d); };
  Gateway gw(opts);
  MockBehavior m;
  m.accuracy = 1.0;
  auto ep = mock_endpoint("r", m);
  ep.max_retries = 3;
  CHECK(gw.submit(ep, prompt("a")).output_text == "Category: Bug Report");
  CHECK(backend->calls == 3);
  REQUIRE(sleeps.size() == 2);
  CHECK(sleeps[0] >= std::chrono::nanoseconds(500ms));
  CHECK(sleeps[0] < std::chrono::nanoseconds(1000ms));
  CHECK(sleeps[1] >= std::chrono::nanoseconds(1000ms));

  backend->calls = 0;
  backend->answer = [](const PromptSpec&, int) -> std::string {
    throw RetryableError(ErrorCode::TransportError, "down");
  };
  ep.max_retries = 2;
  try {
    gw.submit(ep, prompt("b"));
    FAIL("expected TransportError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TransportError);
  }
  CHECK(backend->calls == 3);
}

TEST_CASE("missing credentials fail before any call") {
  testing::TempDir dir("gw");
  auto backend = std::make_shared<Instrumented>();
  Gateway gw({dir.path(), backend});
  ::unsetenv("REVLABEL_TEST_NO_SUCH_KEY");
  EndpointConfig ep;
  ep.model_id = "live";
  ep.base_url = "http://127.0.0.1:9";
  ep.auth_env_var = "REVLABEL_TEST_NO_SUCH_KEY";
  try {
    gw.submit(ep, prompt("a"));
    FAIL("expected AuthMissing");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AuthMissing);
  }
  CHECK(backend->calls == 0);
}

TEST_CASE("run_batch: order, concurrency ceiling, partial failure, rerun") {
  testing::TempDir dir("gw");
  auto backend = std::make_shared<Instrumented>();
  backend->hold = 2ms;
  backend->answer = [](const PromptSpec& p, int) -> std::string {
    if (p.sample_record_id == "p42") throw Error(ErrorCode::MalformedResponse, "bad");
    return "Category: " + p.sample_record_id;
  };
  Gateway gw({dir.path(), backend});
  MockBehavior m;
  m.accuracy = 1.0;
  auto ep = mock_endpoint("c4", m, 4);
  std::vector<BatchRequest> reqs;
  for (int i = 0; i < 100; ++i) reqs.push_back({prompt("p" + std::to_string(i)), std::nullopt});

  auto items = gw.run_batch(ep, reqs);
  REQUIRE(items.size() == 100);
  int ok = 0, failed = 0;
  for (int i = 0; i < 100; ++i) {
    CHECK(items[i].record_id == "p" + std::to_string(i));
    if (items[i].response) {
      ++ok;
      CHECK(items[i].response->output_text == "Category: p" + std::to_string(i));
    } else {
      ++failed;
      CHECK(items[i].error->code == ErrorCode::MalformedResponse);
    }
  }
  CHECK(ok == 99);
  CHECK(failed == 1);
  CHECK(backend->peak <= 4);
  CHECK(gw.stats("c4").peak_in_flight <= 4);
  CHECK(gw.stats("c4").peak_in_flight >= 2);

  // only the failed item goes back to the backend
  backend->calls = 0;
  auto again = gw.run_batch(ep, reqs);
  CHECK(backend->calls == 1);
  CHECK_FALSE(again[42].response.has_value());
}

TEST_CASE("chat wire format") {
  EndpointConfig ep;
  ep.model_id = "gpt-4o";
  ep.temperature = 0.0;
  auto body = nlohmann::json::parse(chat_request_body(ep, {"system text", "user text", "coarse", "r"}));
  CHECK(body["model"] == "gpt-4o");
  CHECK(body["messages"][0]["role"] == "system");
  CHECK(body["messages"][0]["content"] == "system text");
  CHECK(body["messages"][1]["role"] == "user");
  CHECK(body["temperature"] == 0.0);
  CHECK(parse_chat_response(R"({"choices":[{"message":{"content":"Bug Report"}}]})") == "Bug Report");
  CHECK_THROWS_AS(parse_chat_response("not json"), Error);
  CHECK_THROWS_AS(parse_chat_response(R"({"choices":[]})"), Error);
}

TEST_CASE("http backend against a local server") {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string auth;
  std::mutex mu;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    {
      std::lock_guard lock(mu);
      auth = req.get_header_value("Authorization");
    }
    if (hits++ == 0) {
      res.status = 429;
      return;
    }
    res.set_content(R"({"choices":[{"message":{"content":"Category: Feature Request"}}]})",
                    "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  testing::TempDir dir("gw");
  ::setenv("REVLABEL_TEST_KEY", "sk-test", 1);
  Gateway::Options opts{dir.path()};
  opts.sleep = [](std::chrono::nanoseconds) {};
  Gateway gw(opts);
  EndpointConfig ep;
  ep.model_id = "local";
  ep.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1/";
  ep.auth_env_var = "REVLABEL_TEST_KEY";
  ep.max_retries = 2;
  auto r = gw.submit(ep, prompt("q1"));
  CHECK(r.output_text == "Category: Feature Request");
  CHECK(hits == 2);
  CHECK(gw.stats("local").backend_calls == 2);
  {
    std::lock_guard lock(mu);
    CHECK(auth == "Bearer sk-test");
  }
  server.stop();
  t.join();
}
