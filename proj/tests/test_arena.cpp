// Copyright 2026 the pevo authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <memory>

#include "pevo/arena.hpp"
#include "pevo/gateway.hpp"

using namespace pevo;

TEST_CASE("defender prompt names the right side and omits empty history", "[arena]") {
  const auto msg_a = render_defender_prompt("the task", "out A", "out B", nullptr, true);
  CHECK(msg_a.find("You are defending Output A") != std::string::npos);
  CHECK(msg_a.find("weaknesses in Output B") != std::string::npos);
  CHECK(msg_a.find("DEBATE HISTORY") == std::string::npos);
  CHECK(msg_a.find("TASK:\nthe task") != std::string::npos);
  CHECK(msg_a.find("Output A:\nout A") != std::string::npos);
  CHECK(msg_a.find("Output B:\nout B") != std::string::npos);

  const auto msg_b = render_defender_prompt("the task", "out A", "out B", nullptr, false);
  CHECK(msg_b.find("You are defending Output B") != std::string::npos);
  CHECK(msg_b.find("master debater") != std::string::npos);
  CHECK(msg_b.find("remain loyal to defending Output B") != std::string::npos);
}

TEST_CASE("defender prompt embeds history entries verbatim, in order", "[arena]") {
  const std::vector<std::string> history{"first entry", "second entry"};
  const auto msg = render_defender_prompt("t", "a", "b", &history, true);
  const auto h1 = msg.find("first entry");
  const auto h2 = msg.find("second entry");
  REQUIRE(h1 != std::string::npos);
  REQUIRE(h2 != std::string::npos);
  CHECK(h1 < h2);
  CHECK(msg.find("DEBATE HISTORY:") < h1);
}

TEST_CASE("three-round debate issues eight defender calls and four entries", "[arena]") {
  auto p = ScriptedProvider::sequence({"a0", "b0", "a1", "b1", "a2", "b2", "a3", "b3"});
  const auto t = conduct_debate("task", "out A", "out B", 3, *p);
  CHECK(p->call_count() == 8);
  CHECK(t.entries().size() == 4);
  CHECK(t.rounds.size() == 3);
  CHECK(t.raw_messages.size() == 8);
  CHECK(t.opening ==
        "Agent 1 and 2 (defending A and B respectively) debate opening summary: a0 b0");
  CHECK(t.rounds[0] ==
        "Agent 1 and 2 (defending A and B respectively) debate rebuttal round 1 summary: a1 b1");
  CHECK(t.rounds[2] ==
        "Agent 1 and 2 (defending A and B respectively) debate rebuttal round 3 summary: a3 b3");
}

TEST_CASE("zero-round debate is openings only", "[arena]") {
  auto p = ScriptedProvider::sequence({"a0", "b0"});
  const auto t = conduct_debate("task", "out A", "out B", 0, *p);
  CHECK(p->call_count() == 2);
  CHECK(t.entries().size() == 1);
  CHECK(t.rounds.empty());
}

TEST_CASE("defender A speaks before defender B in every phase", "[arena]") {
  auto p = ScriptedProvider::sequence({"a0", "b0", "a1", "b1"});
  const auto t = conduct_debate("task", "A out", "B out", 1, *p);
  REQUIRE(t.raw_messages.size() == 4);
  CHECK(t.raw_messages[0].role == DebateRole::defender_a);
  CHECK(t.raw_messages[1].role == DebateRole::defender_b);
  CHECK(t.raw_messages[2].role == DebateRole::defender_a);
  CHECK(t.raw_messages[3].role == DebateRole::defender_b);

  // rebuttals see the opening, not the same-round rival message
  const auto reqs = p->requests();
  CHECK(reqs[2].user_text.find("debate opening summary: a0 b0") != std::string::npos);
  CHECK(reqs[3].user_text.find("a1") == std::string::npos);
}

TEST_CASE("debate failure surfaces the partial transcript", "[arena]") {
  auto p = ScriptedProvider::sequence({"a0", "b0", "a1"});  // dies at round 1, defender B
  try {
    conduct_debate("task", "a", "b", 2, *p);
    FAIL("expected DebateAborted");
  } catch (const DebateAborted& e) {
    CHECK(e.partial_transcript().entries().size() == 1);
    CHECK(e.partial_transcript().raw_messages.size() == 3);
  }
}

TEST_CASE("judge parses the winner marker at temperature zero", "[arena]") {
  auto p = ScriptedProvider::responder([](const CompletionRequest& req) {
    CHECK(req.temperature == 0.0);
    CHECK(req.call_tag == CallTag::judge);
    return std::string("reasoning ... <winner>A</winner> done");
  });
  DebateTranscript t;
  t.opening = "entry";
  const Verdict v = judge("task", "a", "b", t, *p);
  CHECK(v.winner == Side::a);
  CHECK(v.retries_used == 0);
  CHECK(v.judge_raw.find("<winner>A</winner>") != std::string::npos);
}

TEST_CASE("judge retries unparseable output and then succeeds", "[arena]") {
  auto p = ScriptedProvider::sequence({"no marker", "still nothing", "ok: <winner>B</winner>"});
  DebateTranscript t;
  const Verdict v = judge("task", "a", "b", t, *p);
  CHECK(v.winner == Side::b);
  CHECK(v.retries_used == 2);
}

TEST_CASE("ambiguous double markers count as unparseable", "[arena]") {
  auto p = ScriptedProvider::mapping(
      {{CallTag::judge, "", "<winner>A</winner> but also <winner>B</winner>"}});
  DebateTranscript t;
  CHECK_THROWS_AS(judge("task", "a", "b", t, *p), VerdictUnparseable);
  CHECK(p->call_count() == 3);  // initial + 2 retries
}

TEST_CASE("judge prompt carries task, outputs, and the joined transcript", "[arena]") {
  auto p = ScriptedProvider::responder([](const CompletionRequest& req) {
    CHECK(req.user_text.find("TASK:\nthe task") != std::string::npos);
    CHECK(req.user_text.find("Output A:\nfirst") != std::string::npos);
    CHECK(req.user_text.find("Output B:\nsecond") != std::string::npos);
    CHECK(req.user_text.find("opening entry\nround entry") != std::string::npos);
    return std::string("<winner>B</winner>");
  });
  DebateTranscript t;
  t.opening = "opening entry";
  t.rounds = {"round entry"};
  judge("the task", "first", "second", t, *p);
}

namespace {

std::shared_ptr<ScriptedProvider> full_match_script() {
  return ScriptedProvider::responder([](const CompletionRequest& req) -> std::string {
    switch (req.call_tag) {
      case CallTag::response:
        return "response to: " + req.user_text + " via " + req.system_text.value_or("");
      case CallTag::defender:
        return "argument";
      case CallTag::judge:
        return "<winner>B</winner>";
      default:
        return "<new_prompt>child</new_prompt>";
    }
  });
}

}  // namespace

TEST_CASE("evaluate_pair wires prompts as system text and stores everything", "[arena]") {
  auto p = full_match_script();
  const Candidate a{"pa", "prompt A", Rating{1000}, 0, std::nullopt};
  const Candidate b{"pb", "prompt B", Rating{1000}, 0, std::nullopt};
  ArenaOptions opts;
  opts.debate_rounds = 2;
  const MatchRecord rec = evaluate_pair(a, b, TaskView{"t7", "the input"}, *p, opts);
  CHECK(rec.cand_a_id == "pa");
  CHECK(rec.cand_b_id == "pb");
  CHECK(rec.task_id == "t7");
  CHECK(rec.input_text == "the input");
  CHECK(rec.response_a == "response to: the input via prompt A");
  CHECK(rec.response_b == "response to: the input via prompt B");
  CHECK(rec.verdict.winner == Side::b);
  CHECK_FALSE(rec.ratings.has_value());
  CHECK(rec.transcript.rounds.size() == 2);

  // call-count law for one match: 2 + 2(d+1) + 1
  CHECK(p->call_count() == 2u + 2u * (2 + 1) + 1u);

  // response calls carried the candidate prompt as system text at the
  // execution temperature
  const auto reqs = p->requests();
  CHECK(reqs[0].system_text == "prompt A");
  CHECK(reqs[0].temperature == opts.execution_temperature);
  CHECK(reqs[1].system_text == "prompt B");
}

TEST_CASE("identical prompt texts still force a verdict", "[arena]") {
  auto p = full_match_script();
  const Candidate a{"pa", "same prompt", Rating{1000}, 0, std::nullopt};
  const Candidate b{"pb", "same prompt", Rating{1000}, 0, std::nullopt};
  const MatchRecord rec = evaluate_pair(a, b, TaskView{"t", "input"}, *p, ArenaOptions{});
  CHECK((rec.verdict.winner == Side::a || rec.verdict.winner == Side::b));
  CHECK_THROWS_AS(evaluate_pair(a, a, TaskView{"t", "input"}, *p, ArenaOptions{}),
                  InvalidArgument);
}

TEST_CASE("provider failure during response generation aborts the match", "[arena]") {
  auto p = ScriptedProvider::sequence({"only one response"});
  const Candidate a{"pa", "A", Rating{1000}, 0, std::nullopt};
  const Candidate b{"pb", "B", Rating{1000}, 0, std::nullopt};
  CHECK_THROWS_AS(evaluate_pair(a, b, TaskView{"t", "input"}, *p, ArenaOptions{}),
                  ScriptExhausted);
}

TEST_CASE("scripted matches replay bit-identically", "[arena]") {
  auto run_once = [] {
    auto p = full_match_script();
    const Candidate a{"pa", "A", Rating{1000}, 0, std::nullopt};
    const Candidate b{"pb", "B", Rating{1000}, 0, std::nullopt};
    return evaluate_pair(a, b, TaskView{"t", "in"}, *p, ArenaOptions{});
  };
  const MatchRecord x = run_once();
  const MatchRecord y = run_once();
  CHECK(x.response_a == y.response_a);
  CHECK(x.transcript.joined() == y.transcript.joined());
  CHECK(x.verdict.winner == y.verdict.winner);
  CHECK(x.verdict.judge_raw == y.verdict.judge_raw);
}
