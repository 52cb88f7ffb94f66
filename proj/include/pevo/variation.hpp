// Copyright 2026 the pevo authors
// SPDX-License-Identifier: Apache-2.0
//
// Debate-informed genetic operators: crossover that folds the debate
// trace into a child prompt, single-edit mutation, and the tag
// extraction both rely on.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pevo/errors.hpp"
#include "pevo/gateway.hpp"
#include "pevo/match.hpp"
#include "pevo/rng.hpp"

namespace pevo {

struct VariationOptions {
  double temperature = 0.8;
  int max_output_tokens = 4096;
  int extract_retries = 2;
  // Requests longer than this shed middle rebuttal rounds (oldest first);
  // the opening and the final round always survive.
  std::size_t max_request_chars = 400000;
};

struct OffspringDraft {
  std::string text;
  std::string source_match;
  bool mutated = false;
  int retries_used = 0;
  bool mutation_failed = false;
};

inline std::string trim_copy(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Content of the first <tag>...</tag> pair, trimmed. Anything outside the
// tags is ignored.
inline std::string extract_tagged(std::string_view raw, std::string_view tag_name) {
  const std::string open = "<" + std::string(tag_name) + ">";
  const std::string close = "</" + std::string(tag_name) + ">";
  const auto b = raw.find(open);
  if (b == std::string_view::npos)
    throw ExtractionError("extract_tagged: missing opening tag " + open);
  const auto body_start = b + open.size();
  const auto e = raw.find(close, body_start);
  if (e == std::string_view::npos)
    throw ExtractionError("extract_tagged: unmatched tag " + open);
  std::string inner = trim_copy(raw.substr(body_start, e - body_start));
  if (inner.empty()) throw ExtractionError("extract_tagged: empty content inside " + open);
  return inner;
}

inline constexpr std::string_view kNewPromptTag = "new_prompt";

inline std::string render_crossover_request(const std::string& winner_text,
                                            const std::string& loser_text,
                                            const std::string& transcript_text) {
  std::string out;
  out += "I have two system prompts:\n\nWINNING PROMPT:\n";
  out += winner_text;
  out += "\n\nLOSER PROMPT:\n";
  out += loser_text;
  out += "\n\nBased on this debate about their performance:\n";
  out += transcript_text;
  out +=
      "\n\nCreate a new system prompt that combines the strengths of both prompts.\n"
      "Focus on preserving what made the winning prompt effective while\n"
      "incorporating any valuable elements from the alternative prompt.\n\n"
      "Output your new prompt in between <new_prompt></new_prompt> XML tags. "
      "Your new prompt MUST in between these tags.";
  return out;
}

inline std::string render_mutation_request(const std::string& prompt_text) {
  std::string out;
  out += "I have a system prompt that I want to improve through strategic mutation:\n\n"
         "ORIGINAL PROMPT:\n";
  out += prompt_text;
  out +=
      "\n\n## Mutation Instructions\n"
      "Please modify this prompt in ONE of the following ways (choose the most impactful "
      "approach):\n"
      "1. Add a new instruction that enhances its effectiveness or addresses a gap\n"
      "2. Modify an existing instruction to make it clearer, more precise, or more effective\n"
      "3. Remove redundant, ineffective, or potentially harmful parts\n"
      "4. Restructure the prompt to improve flow, coherence, or clarity\n\n"
      "## Requirements\n"
      "- Preserve the core intent and functionality of the original prompt\n"
      "- Make only targeted changes with clear purpose (quality over quantity)\n"
      "- Ensure the modified prompt remains concise and actionable\n"
      "- Consider how the changes will affect the response quality\n\n"
      "# Output your new prompt in between <new_prompt></new_prompt> XML tags. "
      "Your new prompt MUST in between these tags.";
  return out;
}

inline std::string render_seed_variation_request(const std::string& seed_text) {
  std::string out;
  out += "Rewrite the following prompt with meaningful variation while preserving its "
         "task intent:\n\nPROMPT:\n";
  out += seed_text;
  out += "\n\nOutput your new prompt in between <new_prompt></new_prompt> XML tags. "
         "Your new prompt MUST in between these tags.";
  return out;
}

namespace detail {

// Issues the request, extracts <new_prompt>, retrying with a fresh call on
// each extraction failure. Returns {text, retries_used}.
inline std::pair<std::string, int> call_and_extract(const std::string& request, CallTag tag,
                                                    Provider& provider,
                                                    const VariationOptions& opts) {
  std::string last_error;
  for (int attempt = 0; attempt <= opts.extract_retries; ++attempt) {
    CompletionRequest req;
    req.user_text = request;
    req.temperature = opts.temperature;
    req.max_output_tokens = opts.max_output_tokens;
    req.call_tag = tag;
    const CompletionResult res = provider.complete(req);
    try {
      return {extract_tagged(res.text, kNewPromptTag), attempt};
    } catch (const ExtractionError& e) {
      last_error = e.what();
    }
  }
  throw ExtractionError(std::string(to_string(tag)) + ": " + last_error + " after " +
                        std::to_string(opts.extract_retries) + " retries");
}

}  // namespace detail

// Transcript text for the crossover request, shedding middle rounds when
// the rendered request would blow the provider's context budget.
inline std::string transcript_for_crossover(const std::string& winner_text,
                                            const std::string& loser_text,
                                            const DebateTranscript& transcript,
                                            const VariationOptions& opts) {
  std::string text = transcript.joined();
  if (render_crossover_request(winner_text, loser_text, text).size() <= opts.max_request_chars)
    return text;
  const std::vector<std::string>& kept = transcript.rounds;
  std::size_t drop = 0;
  while (drop + 1 < kept.size()) {
    ++drop;
    DebateTranscript t;
    t.opening = transcript.opening;
    t.rounds.push_back("[" + std::to_string(drop) + " earlier rebuttal rounds omitted]");
    t.rounds.insert(t.rounds.end(), kept.begin() + drop, kept.end());
    text = t.joined();
    if (render_crossover_request(winner_text, loser_text, text).size() <=
        opts.max_request_chars)
      return text;
  }
  return text;
}

inline OffspringDraft crossover(const std::string& winner_text, const std::string& loser_text,
                                const DebateTranscript& transcript, Provider& provider,
                                const VariationOptions& opts = {},
                                const std::string& source_match = {}) {
  const std::string request = render_crossover_request(
      winner_text, loser_text, transcript_for_crossover(winner_text, loser_text, transcript, opts));
  auto [text, retries] = detail::call_and_extract(request, CallTag::crossover, provider, opts);
  OffspringDraft draft;
  draft.text = std::move(text);
  draft.source_match = source_match;
  draft.retries_used = retries;
  return draft;
}

inline std::string mutate(const std::string& prompt_text, Provider& provider,
                          const VariationOptions& opts = {}) {
  if (prompt_text.empty()) throw InvalidArgument("mutate: prompt must be non-empty");
  auto [text, retries] =
      detail::call_and_extract(render_mutation_request(prompt_text), CallTag::mutation,
                               provider, opts);
  (void)retries;
  return text;
}

inline std::string vary_seed(const std::string& seed_text, Provider& provider,
                             const VariationOptions& opts = {}) {
  auto [text, retries] =
      detail::call_and_extract(render_seed_variation_request(seed_text), CallTag::variation,
                               provider, opts);
  (void)retries;
  return text;
}

// Crossover, then a seeded mutation gate: one uniform variate per pair,
// mutate iff it falls below the mutation rate. A failed mutation falls
// back to the unmutated child.
inline OffspringDraft breed(const MatchRecord& match, const std::string& text_a,
                            const std::string& text_b, double mutation_rate,
                            std::uint64_t rng_seed, Provider& provider,
                            const VariationOptions& opts = {}) {
  if (mutation_rate < 0.0 || mutation_rate > 1.0)
    throw InvalidArgument("breed: mutation rate must be in [0, 1]");
  const bool a_won = match.verdict.winner == Side::a;
  const std::string& winner_text = a_won ? text_a : text_b;
  const std::string& loser_text = a_won ? text_b : text_a;
  OffspringDraft draft = crossover(winner_text, loser_text, match.transcript, provider, opts,
                                   match.cand_a_id + ":" + match.cand_b_id);
  Rng gate(rng_seed);
  if (gate.uniform01() < mutation_rate) {
    try {
      draft.text = mutate(draft.text, provider, opts);
      draft.mutated = true;
    } catch (const ExtractionError&) {
      draft.mutation_failed = true;  // keep the unmutated child
    }
  }
  return draft;
}

}  // namespace pevo
