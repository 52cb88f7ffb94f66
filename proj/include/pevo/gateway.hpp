// Copyright 2026 the pevo authors
// SPDX-License-Identifier: Apache-2.0
//
// The single provider boundary. Everything that talks to a language
// model goes through Provider::complete; runs record every call in a
// CallLedger keyed by call tag.

#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <utility>
#include <vector>

#include "pevo/errors.hpp"

namespace pevo {

enum class CallTag { response, defender, judge, crossover, mutation, variation };

inline const char* to_string(CallTag t) {
  switch (t) {
    case CallTag::response: return "response";
    case CallTag::defender: return "defender";
    case CallTag::judge: return "judge";
    case CallTag::crossover: return "crossover";
    case CallTag::mutation: return "mutation";
    case CallTag::variation: return "variation";
  }
  return "unknown";
}

struct CompletionRequest {
  std::optional<std::string> system_text;
  std::string user_text;
  double temperature = 0.0;
  int max_output_tokens = 4096;
  CallTag call_tag = CallTag::response;
};

inline void validate_request(const CompletionRequest& req) {
  if (req.temperature < 0.0 || req.temperature > 2.0)
    throw InvalidArgument("completion request: temperature must be within [0, 2]");
  if (req.max_output_tokens < 1)
    throw InvalidArgument("completion request: max_output_tokens must be >= 1");
}

struct TokenUsage {
  long input_tokens = 0;
  long output_tokens = 0;
  bool estimated = false;
};

struct CompletionResult {
  std::string text;
  std::optional<TokenUsage> usage;
  std::chrono::microseconds latency{0};
  int attempts = 1;
};

class Provider {
 public:
  virtual ~Provider() = default;
  virtual CompletionResult complete(const CompletionRequest& req) = 0;
};

// ---------------------------------------------------------------------
// Scripted provider (test double). Deterministic, records all traffic.
// ---------------------------------------------------------------------

class ScriptedProvider : public Provider {
 public:
  struct Rule {
    std::optional<CallTag> tag;  // match any tag when absent
    std::string contains;        // request fingerprint: substring of user_text; empty matches all
    std::string response;
  };

  // List mode: responses are consumed in call order.
  static std::shared_ptr<ScriptedProvider> sequence(std::vector<std::string> responses) {
    auto p = std::shared_ptr<ScriptedProvider>(new ScriptedProvider());
    p->list_ = std::move(responses);
    p->mode_ = Mode::list;
    return p;
  }

  // Mapping mode: first rule matching (call_tag, fingerprint) wins.
  static std::shared_ptr<ScriptedProvider> mapping(std::vector<Rule> rules) {
    auto p = std::shared_ptr<ScriptedProvider>(new ScriptedProvider());
    p->rules_ = std::move(rules);
    p->mode_ = Mode::mapping;
    return p;
  }

  // Responder mode: arbitrary deterministic function of the request.
  static std::shared_ptr<ScriptedProvider> responder(
      std::function<std::string(const CompletionRequest&)> fn) {
    auto p = std::shared_ptr<ScriptedProvider>(new ScriptedProvider());
    p->fn_ = std::move(fn);
    p->mode_ = Mode::responder;
    return p;
  }

  CompletionResult complete(const CompletionRequest& req) override {
    validate_request(req);
    std::lock_guard lock(mu_);
    requests_.push_back(req);
    CompletionResult res;
    switch (mode_) {
      case Mode::list:
        if (cursor_ >= list_.size())
          throw ScriptExhausted("scripted provider: response list exhausted after " +
                                std::to_string(list_.size()) + " calls");
        res.text = list_[cursor_++];
        break;
      case Mode::mapping: {
        const Rule* hit = nullptr;
        for (const auto& r : rules_) {
          if (r.tag && *r.tag != req.call_tag) continue;
          if (!r.contains.empty() && req.user_text.find(r.contains) == std::string::npos)
            continue;
          hit = &r;
          break;
        }
        if (!hit)
          throw ScriptExhausted(std::string("scripted provider: no rule matches tag '") +
                                to_string(req.call_tag) + "'");
        res.text = hit->response;
        break;
      }
      case Mode::responder:
        res.text = fn_(req);
        break;
    }
    return res;
  }

  std::vector<CompletionRequest> requests() const {
    std::lock_guard lock(mu_);
    return requests_;
  }

  std::size_t call_count() const {
    std::lock_guard lock(mu_);
    return requests_.size();
  }

 private:
  ScriptedProvider() = default;
  enum class Mode { list, mapping, responder };
  Mode mode_ = Mode::list;
  std::vector<std::string> list_;
  std::size_t cursor_ = 0;
  std::vector<Rule> rules_;
  std::function<std::string(const CompletionRequest&)> fn_;
  mutable std::mutex mu_;
  std::vector<CompletionRequest> requests_;
};

// ---------------------------------------------------------------------
// Call ledger: one record per provider call.
// ---------------------------------------------------------------------

struct LedgerEntry {
  std::int64_t timestamp_us = 0;  // wall clock, microseconds since epoch
  CallTag tag = CallTag::response;
  int attempts = 1;
  TokenUsage usage;
  std::int64_t latency_us = 0;
};

class CallLedger {
 public:
  void record(const LedgerEntry& e) {
    std::lock_guard lock(mu_);
    entries_.push_back(e);
  }

  std::vector<LedgerEntry> entries() const {
    std::lock_guard lock(mu_);
    return entries_;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
  }

  std::map<std::string, long> totals_by_tag() const {
    std::lock_guard lock(mu_);
    std::map<std::string, long> totals;
    for (const auto& e : entries_) totals[to_string(e.tag)]++;
    return totals;
  }

 private:
  mutable std::mutex mu_;
  std::vector<LedgerEntry> entries_;
};

// ---------------------------------------------------------------------
// Gateway: shared decorator that bounds in-flight requests, validates,
// fills in estimated usage, and records the ledger entry.
// ---------------------------------------------------------------------

class Gateway : public Provider {
 public:
  Gateway(std::shared_ptr<Provider> inner, std::shared_ptr<CallLedger> ledger,
          int max_inflight = 8)
      : inner_(std::move(inner)),
        ledger_(std::move(ledger)),
        sem_(max_inflight > 0 ? max_inflight : 1) {
    if (!inner_) throw InvalidArgument("gateway: provider required");
  }

  CompletionResult complete(const CompletionRequest& req) override {
    validate_request(req);
    sem_.acquire();
    struct Release {
      std::counting_semaphore<>& s;
      ~Release() { s.release(); }
    } release{sem_};

    const auto t0 = std::chrono::steady_clock::now();
    CompletionResult res = inner_->complete(req);
    const auto t1 = std::chrono::steady_clock::now();
    res.latency = std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0);

    if (!res.usage) {
      // Character/4 heuristic when the backend reports nothing.
      TokenUsage est;
      est.input_tokens = static_cast<long>(
          (req.user_text.size() + (req.system_text ? req.system_text->size() : 0)) / 4);
      est.output_tokens = static_cast<long>(res.text.size() / 4);
      est.estimated = true;
      res.usage = est;
    }

    if (ledger_) {
      LedgerEntry e;
      e.timestamp_us = std::chrono::duration_cast<std::chrono::microseconds>(
                           std::chrono::system_clock::now().time_since_epoch())
                           .count();
      e.tag = req.call_tag;
      e.attempts = res.attempts;
      e.usage = *res.usage;
      e.latency_us = res.latency.count();
      ledger_->record(e);
    }
    return res;
  }

 private:
  std::shared_ptr<Provider> inner_;
  std::shared_ptr<CallLedger> ledger_;
  std::counting_semaphore<> sem_;
};

}  // namespace pevo
