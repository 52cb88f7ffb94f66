// Copyright 2026 the pevo authors
// SPDX-License-Identifier: Apache-2.0
//
// Live chat-completion backend over HTTP. Request body follows the
// common messages-list shape ({role, content} pairs); auth is a bearer
// token. Transient failures (429 and 5xx) retry with jittered
// exponential backoff up to an attempt cap.

#pragma once

#include <chrono>
#include <cstdlib>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "pevo/errors.hpp"
#include "pevo/gateway.hpp"

namespace pevo {

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{500};
  std::chrono::milliseconds max_delay{30000};
};

struct HttpProviderConfig {
  std::string base_url;                        // e.g. http://host:port
  std::string path = "/v1/chat/completions";
  std::string api_key;
  std::string model;
  RetryPolicy retry;
  std::chrono::seconds request_timeout{120};
};

// Env vars consulted when config fields are left empty.
inline constexpr const char* kEnvApiBase = "PEVO_API_BASE";
inline constexpr const char* kEnvApiKey = "PEVO_API_KEY";
inline constexpr const char* kEnvModel = "PEVO_MODEL";

inline std::optional<std::string> env_value(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

class HttpProvider : public Provider {
 public:
  explicit HttpProvider(HttpProviderConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.base_url.empty()) cfg_.base_url = env_value(kEnvApiBase).value_or("");
    if (cfg_.api_key.empty()) cfg_.api_key = env_value(kEnvApiKey).value_or("");
    if (cfg_.model.empty()) cfg_.model = env_value(kEnvModel).value_or("");
    if (cfg_.base_url.empty())
      throw ProviderError("http provider: endpoint URL missing (set " +
                          std::string(kEnvApiBase) + " or provider.endpoint)");
    if (cfg_.api_key.empty())
      throw ProviderError("http provider: API key missing (set " +
                          std::string(kEnvApiKey) + ")");
    if (cfg_.model.empty())
      throw ProviderError("http provider: model identifier missing (set " +
                          std::string(kEnvModel) + " or provider.model)");
  }

  CompletionResult complete(const CompletionRequest& req) override {
    validate_request(req);
    nlohmann::json body;
    body["model"] = cfg_.model;
    auto& messages = body["messages"] = nlohmann::json::array();
    if (req.system_text)
      messages.push_back({{"role", "system"}, {"content", *req.system_text}});
    messages.push_back({{"role", "user"}, {"content", req.user_text}});
    body["temperature"] = req.temperature;
    body["max_tokens"] = req.max_output_tokens;
    const std::string payload = body.dump();

    httplib::Client client(cfg_.base_url);
    client.set_read_timeout(cfg_.request_timeout);
    client.set_write_timeout(cfg_.request_timeout);
    client.set_bearer_token_auth(cfg_.api_key);

    std::string last_failure;
    auto delay = base_delay_clamped();
    for (int attempt = 1; attempt <= cfg_.retry.max_attempts; ++attempt) {
      auto res = client.Post(cfg_.path, payload, "application/json");
      if (res && res->status >= 200 && res->status < 300) {
        CompletionResult out = parse_response(res->body);
        out.attempts = attempt;
        return out;
      }
      if (res && !is_transient(res->status)) {
        throw ProviderError("http provider: status " + std::to_string(res->status) +
                            ": " + res->body);
      }
      last_failure = res ? "status " + std::to_string(res->status)
                         : "transport error (" + httplib::to_string(res.error()) + ")";
      if (attempt < cfg_.retry.max_attempts) {
        std::this_thread::sleep_for(jittered(delay));
        delay = std::min(delay * 2, cfg_.retry.max_delay);
      }
    }
    throw ProviderExhausted("http provider: gave up after " +
                            std::to_string(cfg_.retry.max_attempts) +
                            " attempts; last failure: " + last_failure);
  }

 private:
  static bool is_transient(int status) { return status == 429 || status >= 500; }

  std::chrono::milliseconds jittered(std::chrono::milliseconds d) {
    // Uniform in [d/2, d]; jitter only affects pacing, never results.
    thread_local std::mt19937_64 gen{std::random_device{}()};
    const auto half = d.count() / 2;
    return std::chrono::milliseconds(half + static_cast<long>(gen() % (d.count() - half + 1)));
  }

  static CompletionResult parse_response(const std::string& body) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw ProviderError(std::string("http provider: unparseable response body: ") + e.what());
    }
    CompletionResult out;
    try {
      out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw ProviderError("http provider: response missing choices[0].message.content");
    }
    if (j.contains("usage") && j["usage"].is_object()) {
      TokenUsage u;
      u.input_tokens = j["usage"].value("prompt_tokens", 0L);
      u.output_tokens = j["usage"].value("completion_tokens", 0L);
      u.estimated = false;
      out.usage = u;
    }
    return out;
  }

  std::chrono::milliseconds base_delay_clamped() const {
    return cfg_.retry.base_delay.count() > 0 ? cfg_.retry.base_delay
                                             : std::chrono::milliseconds(1);
  }

  HttpProviderConfig cfg_;
};

}  // namespace pevo
