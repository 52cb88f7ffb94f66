// Copyright 2026 the pevo authors
// SPDX-License-Identifier: Apache-2.0
//
// JSON mappings for everything that lands in checkpoints, reports, and
// the call ledger. Doubles round-trip at full precision.

#pragma once

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "pevo/gateway.hpp"
#include "pevo/match.hpp"
#include "pevo/roster.hpp"
#include "pevo/taskbank.hpp"

namespace pevo {

using nlohmann::json;

inline void to_json(json& j, const Side& s) { j = s == Side::a ? "A" : "B"; }
inline void from_json(const json& j, Side& s) {
  const auto v = j.get<std::string>();
  if (v == "A") s = Side::a;
  else if (v == "B") s = Side::b;
  else throw DataError("bad side value '" + v + "'");
}

inline void to_json(json& j, const Lineage& l) {
  j = json{{"parent_winner_id", l.parent_winner_id},
           {"parent_loser_id", l.parent_loser_id},
           {"mutated", l.mutated},
           {"created_generation", l.created_generation}};
}
inline void from_json(const json& j, Lineage& l) {
  j.at("parent_winner_id").get_to(l.parent_winner_id);
  j.at("parent_loser_id").get_to(l.parent_loser_id);
  j.at("mutated").get_to(l.mutated);
  j.at("created_generation").get_to(l.created_generation);
}

inline void to_json(json& j, const Candidate& c) {
  j = json{{"id", c.id}, {"text", c.text}, {"rating", c.rating.value}, {"age", c.age}};
  if (c.lineage) j["lineage"] = *c.lineage;
}
inline void from_json(const json& j, Candidate& c) {
  j.at("id").get_to(c.id);
  j.at("text").get_to(c.text);
  c.rating.value = j.at("rating").get<double>();
  j.at("age").get_to(c.age);
  if (j.contains("lineage")) c.lineage = j["lineage"].get<Lineage>();
  else c.lineage.reset();
}

inline void to_json(json& j, const Population& p) {
  j = json{{"generation_index", p.generation_index}, {"members", p.members}};
}
inline void from_json(const json& j, Population& p) {
  j.at("generation_index").get_to(p.generation_index);
  j.at("members").get_to(p.members);
}

inline void to_json(json& j, const RawMessage& m) {
  j = json{{"role", to_string(m.role)}, {"text", m.text}};
}
inline void from_json(const json& j, RawMessage& m) {
  const auto role = j.at("role").get<std::string>();
  if (role == "defender-A") m.role = DebateRole::defender_a;
  else if (role == "defender-B") m.role = DebateRole::defender_b;
  else if (role == "judge") m.role = DebateRole::judge;
  else throw DataError("bad debate role '" + role + "'");
  j.at("text").get_to(m.text);
}

inline void to_json(json& j, const DebateTranscript& t) {
  j = json{{"opening", t.opening}, {"rounds", t.rounds}, {"raw_messages", t.raw_messages}};
}
inline void from_json(const json& j, DebateTranscript& t) {
  j.at("opening").get_to(t.opening);
  j.at("rounds").get_to(t.rounds);
  j.at("raw_messages").get_to(t.raw_messages);
}

inline void to_json(json& j, const Verdict& v) {
  j = json{{"winner", v.winner}, {"judge_raw", v.judge_raw}, {"retries_used", v.retries_used}};
}
inline void from_json(const json& j, Verdict& v) {
  j.at("winner").get_to(v.winner);
  j.at("judge_raw").get_to(v.judge_raw);
  j.at("retries_used").get_to(v.retries_used);
}

inline void to_json(json& j, const RatingChange& r) {
  j = json{{"before_a", r.before_a},
           {"after_a", r.after_a},
           {"before_b", r.before_b},
           {"after_b", r.after_b}};
}
inline void from_json(const json& j, RatingChange& r) {
  j.at("before_a").get_to(r.before_a);
  j.at("after_a").get_to(r.after_a);
  j.at("before_b").get_to(r.before_b);
  j.at("after_b").get_to(r.after_b);
}

inline void to_json(json& j, const MatchRecord& m) {
  j = json{{"cand_a_id", m.cand_a_id},
           {"cand_b_id", m.cand_b_id},
           {"task_id", m.task_id},
           {"input_text", m.input_text},
           {"response_a", m.response_a},
           {"response_b", m.response_b},
           {"transcript", m.transcript},
           {"verdict", m.verdict}};
  if (m.ratings) j["ratings"] = *m.ratings;
}
inline void from_json(const json& j, MatchRecord& m) {
  j.at("cand_a_id").get_to(m.cand_a_id);
  j.at("cand_b_id").get_to(m.cand_b_id);
  j.at("task_id").get_to(m.task_id);
  j.at("input_text").get_to(m.input_text);
  j.at("response_a").get_to(m.response_a);
  j.at("response_b").get_to(m.response_b);
  j.at("transcript").get_to(m.transcript);
  j.at("verdict").get_to(m.verdict);
  if (j.contains("ratings")) m.ratings = j["ratings"].get<RatingChange>();
  else m.ratings.reset();
}

inline void to_json(json& j, const TaskInstance& t) {
  j = json{{"id", t.id},
           {"input", t.input_text},
           {"split", t.split == TaskSplit::train ? "train" : "test"}};
  if (t.gold) j["gold"] = *t.gold;
}
inline void from_json(const json& j, TaskInstance& t) {
  j.at("id").get_to(t.id);
  j.at("input").get_to(t.input_text);
  const auto split = j.at("split").get<std::string>();
  if (split == "train") t.split = TaskSplit::train;
  else if (split == "test") t.split = TaskSplit::test;
  else throw DataError("bad task split '" + split + "'");
  if (j.contains("gold") && !j["gold"].is_null()) t.gold = j["gold"].get<std::string>();
  else t.gold.reset();
}

inline void to_json(json& j, const TaskSet& ts) {
  j = json{{"name", ts.name}, {"instances", ts.instances}};
}
inline void from_json(const json& j, TaskSet& ts) {
  j.at("name").get_to(ts.name);
  j.at("instances").get_to(ts.instances);
}

inline void to_json(json& j, const LedgerEntry& e) {
  j = json{{"timestamp_us", e.timestamp_us},
           {"call_tag", to_string(e.tag)},
           {"attempts", e.attempts},
           {"usage",
            {{"input_tokens", e.usage.input_tokens},
             {"output_tokens", e.usage.output_tokens},
             {"estimated", e.usage.estimated}}},
           {"latency_us", e.latency_us}};
}

inline void write_ledger_jsonl(const CallLedger& ledger, const std::filesystem::path& path,
                               bool append = false) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw DataError("cannot write ledger file " + path.string());
  for (const auto& e : ledger.entries()) out << json(e).dump() << '\n';
}

}  // namespace pevo
