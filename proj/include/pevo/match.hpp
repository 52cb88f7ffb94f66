// Copyright 2026 the pevo authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pevo/rating.hpp"

namespace pevo {

enum class DebateRole { defender_a, defender_b, judge };

inline const char* to_string(DebateRole r) {
  switch (r) {
    case DebateRole::defender_a: return "defender-A";
    case DebateRole::defender_b: return "defender-B";
    case DebateRole::judge: return "judge";
  }
  return "unknown";
}

struct RawMessage {
  DebateRole role;
  std::string text;
};

// One combined entry per phase: the opening plus one entry per rebuttal
// round, each concatenating both defenders' turns.
struct DebateTranscript {
  std::string opening;
  std::vector<std::string> rounds;
  std::vector<RawMessage> raw_messages;

  std::vector<std::string> entries() const {
    std::vector<std::string> out;
    if (!opening.empty() || !rounds.empty()) out.push_back(opening);
    out.insert(out.end(), rounds.begin(), rounds.end());
    return out;
  }

  std::string joined() const {
    std::string out;
    bool first = true;
    for (const auto& e : entries()) {
      if (!first) out += '\n';
      out += e;
      first = false;
    }
    return out;
  }
};

struct Verdict {
  Side winner = Side::a;
  std::string judge_raw;
  int retries_used = 0;
};

struct RatingChange {
  double before_a = 0.0;
  double after_a = 0.0;
  double before_b = 0.0;
  double after_b = 0.0;
};

struct MatchRecord {
  std::string cand_a_id;
  std::string cand_b_id;
  std::string task_id;
  std::string input_text;
  std::string response_a;
  std::string response_b;
  DebateTranscript transcript;
  Verdict verdict;
  std::optional<RatingChange> ratings;  // filled by the engine
};

}  // namespace pevo
