// Copyright 2026 the pevo authors
// SPDX-License-Identifier: Apache-2.0
//
// The pairwise evaluator: two defender agents argue over a pair of
// responses for a fixed number of rounds, then a forced-choice judge
// names a winner. One match is a sequential pipeline; matches never
// share mutable state, so any number may run concurrently.

#pragma once

#include <string>
#include <vector>

#include "pevo/errors.hpp"
#include "pevo/gateway.hpp"
#include "pevo/match.hpp"
#include "pevo/roster.hpp"
#include "pevo/taskbank.hpp"

namespace pevo {

struct ArenaOptions {
  int debate_rounds = 3;           // d
  double execution_temperature = 0.0;
  double defender_temperature = 0.8;
  double judge_temperature = 0.0;
  int max_output_tokens = 4096;
  int judge_retries = 2;           // fresh judge calls after an unparseable verdict
};

// Carries whatever part of the debate completed before the provider gave
// out; the engine records the pair as skipped.
class DebateAborted : public ProviderError {
 public:
  DebateAborted(std::string msg, DebateTranscript partial)
      : ProviderError(std::move(msg)), partial_(std::move(partial)) {}
  const DebateTranscript& partial_transcript() const { return partial_; }

 private:
  DebateTranscript partial_;
};

class VerdictUnparseable : public ProviderError {
 public:
  explicit VerdictUnparseable(std::string msg) : ProviderError(std::move(msg)) {}
};

namespace detail {

inline std::string defender_charter(bool defending_a) {
  const char own = defending_a ? 'A' : 'B';
  const char other = defending_a ? 'B' : 'A';
  std::string s;
  s += "You are a master debater. You are defending Output ";
  s += own;
  s += " in this debate. Your role is to:\n1. Highlight the strengths of Output ";
  s += own;
  s += "\n2. Point out weaknesses in Output ";
  s += other;
  s += "\n3. Respond to criticisms of Output ";
  s += own;
  s += "\n4. Provide specific examples and reasoning to support your position\n\n"
       "You must remain loyal to defending Output ";
  s += own;
  s += " throughout the debate. Be professional but persuasive in your defense.\n"
       "Structure your response clearly with main points and supporting evidence.";
  return s;
}

}  // namespace detail

inline std::string render_defender_prompt(const std::string& task, const std::string& output_a,
                                          const std::string& output_b,
                                          const std::vector<std::string>* history,
                                          bool defending_a) {
  if (task.empty() || output_a.empty() || output_b.empty())
    throw InvalidArgument("render_defender_prompt: task and both outputs must be non-empty");
  std::string msg = detail::defender_charter(defending_a);
  msg += "\n\nTASK:\n" + task;
  msg += "\n\nOutput A:\n" + output_a;
  msg += "\n\nOutput B:\n" + output_b;
  if (history != nullptr && !history->empty()) {
    msg += "\n\nDEBATE HISTORY:";
    for (const auto& entry : *history) msg += "\n" + entry;
  }
  return msg;
}

// Openings for both defenders (A first), then one rebuttal per defender
// per round, every call seeing the full history so far. Entries combine
// both defenders' turns for the phase.
inline DebateTranscript conduct_debate(const std::string& task, const std::string& output_a,
                                       const std::string& output_b, int rounds,
                                       Provider& provider, const ArenaOptions& opts = {}) {
  if (rounds < 0) throw InvalidArgument("conduct_debate: rounds must be >= 0");
  DebateTranscript transcript;
  std::vector<std::string> history;

  auto defender_turn = [&](bool defending_a) -> std::string {
    CompletionRequest req;
    req.user_text = render_defender_prompt(task, output_a, output_b,
                                           history.empty() ? nullptr : &history, defending_a);
    req.temperature = opts.defender_temperature;
    req.max_output_tokens = opts.max_output_tokens;
    req.call_tag = CallTag::defender;
    std::string text;
    try {
      text = provider.complete(req).text;
    } catch (const ProviderError& e) {
      throw DebateAborted(std::string("debate aborted: ") + e.what(), transcript);
    }
    transcript.raw_messages.push_back(
        {defending_a ? DebateRole::defender_a : DebateRole::defender_b, text});
    return text;
  };

  const std::string opening_a = defender_turn(true);
  const std::string opening_b = defender_turn(false);
  transcript.opening =
      "Agent 1 and 2 (defending A and B respectively) debate opening summary: " + opening_a +
      " " + opening_b;
  history.push_back(transcript.opening);

  for (int round = 1; round <= rounds; ++round) {
    const std::string rebuttal_a = defender_turn(true);
    const std::string rebuttal_b = defender_turn(false);
    std::string entry = "Agent 1 and 2 (defending A and B respectively) debate rebuttal round " +
                        std::to_string(round) + " summary: " + rebuttal_a + " " + rebuttal_b;
    transcript.rounds.push_back(entry);
    history.push_back(std::move(entry));
  }
  return transcript;
}

inline std::string render_judge_prompt(const std::string& task, const std::string& output_a,
                                       const std::string& output_b,
                                       const DebateTranscript& transcript) {
  std::string msg =
      "You are the judge of a debate over two candidate outputs for the same task. "
      "Read the task, both outputs, and the debate, then decide which output is superior. "
      "You must pick exactly one winner; a tie is not an option.";
  msg += "\n\nTASK:\n" + task;
  msg += "\n\nOutput A:\n" + output_a;
  msg += "\n\nOutput B:\n" + output_b;
  msg += "\n\nDEBATE:\n" + transcript.joined();
  msg += "\n\nState your reasoning, then declare the winner with exactly one of the markers "
         "<winner>A</winner> or <winner>B</winner>.";
  return msg;
}

namespace detail {

// Exactly one of the two side markers must be present.
inline bool parse_winner(const std::string& text, Side& out) {
  const bool has_a = text.find("<winner>A</winner>") != std::string::npos;
  const bool has_b = text.find("<winner>B</winner>") != std::string::npos;
  if (has_a == has_b) return false;  // neither, or ambiguous both
  out = has_a ? Side::a : Side::b;
  return true;
}

}  // namespace detail

inline Verdict judge(const std::string& task, const std::string& output_a,
                     const std::string& output_b, const DebateTranscript& transcript,
                     Provider& provider, const ArenaOptions& opts = {}) {
  CompletionRequest req;
  req.user_text = render_judge_prompt(task, output_a, output_b, transcript);
  req.temperature = opts.judge_temperature;
  req.max_output_tokens = opts.max_output_tokens;
  req.call_tag = CallTag::judge;

  for (int attempt = 0; attempt <= opts.judge_retries; ++attempt) {
    const CompletionResult res = provider.complete(req);
    Side winner;
    if (detail::parse_winner(res.text, winner)) {
      Verdict v;
      v.winner = winner;
      v.judge_raw = res.text;
      v.retries_used = attempt;
      return v;
    }
  }
  throw VerdictUnparseable("judge: no unambiguous <winner> marker in " +
                           std::to_string(opts.judge_retries + 1) + " attempts");
}

// Full pipeline for one pair: generate both responses with the same
// provider and temperature, debate, judge. Rating fields stay empty; the
// engine fills them when it applies the update.
inline MatchRecord evaluate_pair(const Candidate& cand_a, const Candidate& cand_b,
                                 const TaskView& task, Provider& provider,
                                 const ArenaOptions& opts = {}) {
  if (cand_a.id == cand_b.id)
    throw InvalidArgument("evaluate_pair: candidates must be distinct");
  auto generate = [&](const Candidate& c) {
    CompletionRequest req;
    req.system_text = c.text;
    req.user_text = task.input_text;
    req.temperature = opts.execution_temperature;
    req.max_output_tokens = opts.max_output_tokens;
    req.call_tag = CallTag::response;
    return provider.complete(req).text;
  };

  MatchRecord record;
  record.cand_a_id = cand_a.id;
  record.cand_b_id = cand_b.id;
  record.task_id = task.id;
  record.input_text = task.input_text;
  record.response_a = generate(cand_a);
  record.response_b = generate(cand_b);
  record.transcript = conduct_debate(task.input_text, record.response_a, record.response_b,
                                     opts.debate_rounds, provider, opts);
  record.verdict = judge(task.input_text, record.response_a, record.response_b,
                         record.transcript, provider, opts);
  return record;
}

}  // namespace pevo
