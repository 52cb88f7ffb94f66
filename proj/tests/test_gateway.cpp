// Copyright 2026 the pevo authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <chrono>
#include <memory>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "pevo/gateway.hpp"
#include "pevo/http_provider.hpp"
#include "pevo/serialize.hpp"

using namespace pevo;

TEST_CASE("list-mode script serves responses in order and then exhausts", "[gateway]") {
  auto p = ScriptedProvider::sequence({"a", "b"});
  CompletionRequest req;
  req.user_text = "x";
  CHECK(p->complete(req).text == "a");
  CHECK(p->complete(req).text == "b");
  CHECK_THROWS_AS(p->complete(req), ScriptExhausted);
  CHECK(p->call_count() == 3);
}

TEST_CASE("mapping-mode script matches on call tag and fingerprint", "[gateway]") {
  auto p = ScriptedProvider::mapping({
      {CallTag::judge, "", "<winner>A</winner>"},
      {CallTag::response, "weather", "sunny"},
      {CallTag::response, "", "generic"},
  });
  CompletionRequest judge_req;
  judge_req.call_tag = CallTag::judge;
  judge_req.user_text = "anything";
  CHECK(p->complete(judge_req).text == "<winner>A</winner>");

  CompletionRequest resp;
  resp.call_tag = CallTag::response;
  resp.user_text = "tell me the weather";
  CHECK(p->complete(resp).text == "sunny");
  resp.user_text = "other";
  CHECK(p->complete(resp).text == "generic");

  CompletionRequest miss;
  miss.call_tag = CallTag::mutation;
  CHECK_THROWS_AS(p->complete(miss), ScriptExhausted);
}

TEST_CASE("scripted provider records requests verbatim", "[gateway]") {
  auto p = ScriptedProvider::sequence({"ok"});
  CompletionRequest req;
  req.system_text = "sys";
  req.user_text = "payload";
  req.temperature = 0.8;
  req.call_tag = CallTag::crossover;
  p->complete(req);
  const auto reqs = p->requests();
  REQUIRE(reqs.size() == 1);
  CHECK(reqs[0].system_text == "sys");
  CHECK(reqs[0].user_text == "payload");
  CHECK(reqs[0].call_tag == CallTag::crossover);
}

TEST_CASE("request validation rejects bad temperature and token caps", "[gateway]") {
  auto p = ScriptedProvider::sequence({"ok"});
  CompletionRequest req;
  req.user_text = "x";
  req.temperature = 2.5;
  CHECK_THROWS_AS(p->complete(req), InvalidArgument);
  req.temperature = 0.0;
  req.max_output_tokens = 0;
  CHECK_THROWS_AS(p->complete(req), InvalidArgument);
}

TEST_CASE("gateway records one ledger entry per call with estimated usage", "[gateway]") {
  auto ledger = std::make_shared<CallLedger>();
  Gateway gw(ScriptedProvider::sequence({"12345678", "x"}), ledger, 4);
  CompletionRequest req;
  req.user_text = "abcdefgh";  // 8 chars -> 2 estimated input tokens
  req.call_tag = CallTag::defender;
  const auto res = gw.complete(req);
  REQUIRE(res.usage.has_value());
  CHECK(res.usage->estimated);
  CHECK(res.usage->input_tokens == 2);
  CHECK(res.usage->output_tokens == 2);
  req.call_tag = CallTag::judge;
  gw.complete(req);
  CHECK(ledger->size() == 2);
  const auto totals = ledger->totals_by_tag();
  CHECK(totals.at("defender") == 1);
  CHECK(totals.at("judge") == 1);
}

TEST_CASE("ledger serializes to line-delimited json", "[gateway]") {
  auto ledger = std::make_shared<CallLedger>();
  Gateway gw(ScriptedProvider::sequence({"a", "b"}), ledger);
  CompletionRequest req;
  req.user_text = "x";
  gw.complete(req);
  gw.complete(req);
  const auto path = std::filesystem::temp_directory_path() / "pevo_ledger_test.jsonl";
  write_ledger_jsonl(*ledger, path);
  std::ifstream in(path);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("call_tag"));
    CHECK(j.contains("attempts"));
    CHECK(j.contains("latency_us"));
    ++lines;
  }
  CHECK(lines == 2);
  std::filesystem::remove(path);
}

namespace {

struct LocalServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  explicit LocalServer() = default;

  void start() {
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }

  ~LocalServer() {
    server.stop();
    if (thread.joinable()) thread.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

std::string chat_body(const std::string& text) {
  nlohmann::json j;
  j["choices"][0]["message"]["content"] = text;
  j["usage"]["prompt_tokens"] = 11;
  j["usage"]["completion_tokens"] = 5;
  return j.dump();
}

HttpProviderConfig test_config(const std::string& url) {
  HttpProviderConfig cfg;
  cfg.base_url = url;
  cfg.api_key = "test-key";
  cfg.model = "test-model";
  cfg.retry.base_delay = std::chrono::milliseconds(1);
  cfg.retry.max_delay = std::chrono::milliseconds(4);
  return cfg;
}

}  // namespace

TEST_CASE("http provider retries rate limits and reports attempts", "[gateway]") {
  LocalServer srv;
  std::atomic<int> hits{0};
  srv.server.Post("/v1/chat/completions", [&](const httplib::Request& req,
                                              httplib::Response& res) {
    const int n = ++hits;
    CHECK(req.get_header_value("Authorization") == "Bearer test-key");
    const auto body = nlohmann::json::parse(req.body);
    CHECK(body["model"] == "test-model");
    CHECK(body["messages"].size() == 2);
    if (n <= 2) {
      res.status = 429;
      res.set_content("slow down", "text/plain");
    } else {
      res.status = 200;
      res.set_content(chat_body("hello"), "application/json");
    }
  });
  srv.start();

  HttpProvider provider(test_config(srv.url()));
  CompletionRequest req;
  req.system_text = "sys";
  req.user_text = "hi";
  const auto res = provider.complete(req);
  CHECK(res.text == "hello");
  CHECK(res.attempts == 3);
  REQUIRE(res.usage.has_value());
  CHECK_FALSE(res.usage->estimated);
  CHECK(res.usage->input_tokens == 11);
  CHECK(hits.load() == 3);
}

TEST_CASE("http provider exhausts after the attempt cap", "[gateway]") {
  LocalServer srv;
  std::atomic<int> hits{0};
  srv.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 503;
  });
  srv.start();

  HttpProvider provider(test_config(srv.url()));
  CompletionRequest req;
  req.user_text = "hi";
  CHECK_THROWS_AS(provider.complete(req), ProviderExhausted);
  CHECK(hits.load() == 5);
}

TEST_CASE("http provider treats non-transient statuses as hard errors", "[gateway]") {
  LocalServer srv;
  std::atomic<int> hits{0};
  srv.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 400;
    res.set_content("bad request", "text/plain");
  });
  srv.start();

  HttpProvider provider(test_config(srv.url()));
  CompletionRequest req;
  req.user_text = "hi";
  CHECK_THROWS_AS(provider.complete(req), ProviderError);
  CHECK(hits.load() == 1);
}

TEST_CASE("http provider rejects a missing endpoint up front", "[gateway]") {
  HttpProviderConfig cfg;
  cfg.api_key = "k";
  cfg.model = "m";
  // only applies when the env var is not set
  if (!env_value(kEnvApiBase)) CHECK_THROWS_AS(HttpProvider(cfg), ProviderError);
}
