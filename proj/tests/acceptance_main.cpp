// Copyright 2026 the pevo authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Each criterion runs standalone, prints one PASS/FAIL
// line with its elapsed time, and the process exits nonzero if any
// criterion failed. Expected values come from independent references:
// a long-double tanh-form Elo calculator, hand-derived statistics, and
// the frozen outcomes of the seeded simulation oracle.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pevo/pevo.hpp"

using namespace pevo;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  int number;
  std::string title;
  double time_limit_seconds;
  std::function<std::vector<std::string>()> body;
};

std::vector<std::string> g_failures;

void run_criterion(const Criterion& c) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> problems;
  try {
    problems = c.body();
  } catch (const std::exception& e) {
    problems.push_back(std::string("exception: ") + e.what());
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (elapsed >= c.time_limit_seconds)
    problems.push_back("runtime " + std::to_string(elapsed) + "s exceeds the " +
                       std::to_string(c.time_limit_seconds) + "s limit");
  if (problems.empty()) {
    std::printf("[PASS] criterion %d: %s (%.2fs)\n", c.number, c.title.c_str(), elapsed);
  } else {
    std::printf("[FAIL] criterion %d: %s (%.2fs)\n", c.number, c.title.c_str(), elapsed);
    for (const auto& p : problems) {
      std::printf("       - %s\n", p.c_str());
      g_failures.push_back("criterion " + std::to_string(c.number) + ": " + p);
    }
  }
  std::fflush(stdout);
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("pevo_accept_" + name)) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::shared_ptr<Provider> standard_script() {
  return ScriptedProvider::mapping({
      {CallTag::response, "", "resp"},
      {CallTag::defender, "", "arg"},
      {CallTag::judge, "", "<winner>A</winner>"},
      {CallTag::crossover, "", "<new_prompt>child prompt</new_prompt>"},
      {CallTag::mutation, "", "<new_prompt>mutant prompt</new_prompt>"},
      {CallTag::variation, "", "<new_prompt>filled seed</new_prompt>"},
  });
}

TaskSet tiny_tasks() {
  TaskSet ts;
  ts.name = "tiny";
  for (int i = 0; i < 4; ++i)
    ts.instances.push_back(TaskInstance{"t" + std::to_string(i),
                                        "task input " + std::to_string(i), std::nullopt,
                                        TaskSplit::train});
  return ts;
}

// Independent Elo reference in long double via the tanh form of the
// logistic: 1/(1+10^((rb-ra)/400)) = (1 - tanh((rb-ra) ln10 / 800)) / 2.
long double reference_expected(long double ra, long double rb) {
  const long double ln10 = 2.302585092994045684017991454684364208L;
  return (1.0L - std::tanh((rb - ra) * ln10 / 800.0L)) / 2.0L;
}

// -------------------------------------------------------------------
// 1. Elo arithmetic
// -------------------------------------------------------------------
std::vector<std::string> criterion_elo() {
  std::vector<std::string> problems;
  Rng rng(1001);
  for (int i = 0; i < 1000; ++i) {
    const double ra = 3000.0 * rng.uniform01();
    const double rb = 3000.0 * rng.uniform01();
    const double k = 1.0 + 63.0 * rng.uniform01();
    const Side winner = rng.uniform01() < 0.5 ? Side::a : Side::b;

    const double e = expected_score(Rating{ra}, Rating{rb});
    const long double e_ref = reference_expected(ra, rb);
    if (std::fabs(e - static_cast<double>(e_ref)) > 1e-9) {
      problems.push_back("expected_score deviates from the reference at (" +
                         std::to_string(ra) + ", " + std::to_string(rb) + ")");
      break;
    }

    const auto [na, nb] = update(Rating{ra}, Rating{rb}, winner, KFactor{k});
    const long double sa = winner == Side::a ? 1.0L : 0.0L;
    const long double na_ref = ra + k * (sa - e_ref);
    const long double nb_ref = rb + k * ((1.0L - sa) - (1.0L - e_ref));
    if (std::fabs(na.value - static_cast<double>(na_ref)) > 1e-9 ||
        std::fabs(nb.value - static_cast<double>(nb_ref)) > 1e-9) {
      problems.push_back("update deviates from the reference calculator");
      break;
    }
    if (std::fabs((na.value + nb.value) - (ra + rb)) > 1e-9) {
      problems.push_back("zero-sum violated");
      break;
    }
  }
  const auto [wa, wb] = update(Rating{1000}, Rating{1000}, Side::a, KFactor{32});
  if (wa.value != 1016.0 || wb.value != 984.0)
    problems.push_back("(1000,1000,K=32) did not yield (1016,984)");
  return problems;
}

// -------------------------------------------------------------------
// 2. Call-count law
// -------------------------------------------------------------------
std::vector<std::string> criterion_call_count() {
  std::vector<std::string> problems;
  TempDir dir("law");
  EngineConfig cfg;
  cfg.n = 4;
  cfg.generations = 2;
  cfg.debate_rounds = 3;
  cfg.mutation_rate = 1.0;
  cfg.master_seed = 42;
  auto ledger = std::make_shared<CallLedger>();
  run_llm(cfg, {"s1", "s2", "s3", "s4"}, tiny_tasks(), standard_script(), dir.path, ledger);

  const auto totals = ledger->totals_by_tag();
  auto want = [&](const char* tag, long expected) {
    const auto it = totals.find(tag);
    const long got = it == totals.end() ? 0 : it->second;
    if (got != expected)
      problems.push_back(std::string(tag) + " calls: got " + std::to_string(got) +
                         ", law demands " + std::to_string(expected));
  };
  // 4 pairs total; per match 2 responses + 2(3+1) defenders + 1 judge = 11
  want("response", 8);
  want("defender", 32);
  want("judge", 4);
  want("crossover", 4);
  want("mutation", 4);
  long sum = 0;
  for (const auto& [tag, count] : totals) sum += count;
  const long law = 4 * (2 + 2 * (3 + 1) + 1) + 4 + 4;
  if (sum != law)
    problems.push_back("ledger total " + std::to_string(sum) + " != law total " +
                       std::to_string(law));
  return problems;
}

// -------------------------------------------------------------------
// 3. Quota selection property
// -------------------------------------------------------------------
std::vector<std::string> criterion_selection() {
  std::vector<std::string> problems;
  Rng rng(3003);
  for (int trial = 0; trial < 10000 && problems.empty(); ++trial) {
    const int n = 2 + static_cast<int>(rng.below(12));
    const int n_new = static_cast<int>(rng.below(static_cast<std::uint64_t>(n) + 1));
    const int vet_count = 1 + static_cast<int>(rng.below(14));
    const int off_count = static_cast<int>(rng.below(10));
    std::vector<Candidate> veterans, offspring;
    for (int i = 0; i < vet_count; ++i)
      veterans.push_back(Candidate{"v" + std::to_string(i), "t",
                                   Rating{900.0 + static_cast<double>(rng.below(200))},
                                   1 + static_cast<int>(rng.below(5)), std::nullopt});
    for (int i = 0; i < off_count; ++i)
      offspring.push_back(Candidate{"o" + std::to_string(i), "t",
                                    Rating{900.0 + static_cast<double>(rng.below(200))}, 0,
                                    std::nullopt});

    const Population next = select_next_generation(veterans, offspring, n, n_new, 1);

    const std::size_t pool = veterans.size() + offspring.size();
    if (next.members.size() != std::min<std::size_t>(pool, static_cast<std::size_t>(n)))
      problems.push_back("size violation at trial " + std::to_string(trial));

    std::set<std::string> ids;
    for (const auto& c : next.members) ids.insert(c.id);
    if (ids.size() != next.members.size())
      problems.push_back("duplicate ids at trial " + std::to_string(trial));

    const std::size_t quota =
        std::min<std::size_t>(static_cast<std::size_t>(n_new), offspring.size());
    std::size_t age0 = 0;
    for (const auto& c : next.members) age0 += c.age == 0;
    if (age0 < std::min(quota, next.members.size()))
      problems.push_back("quota violation at trial " + std::to_string(trial));

    // monotonicity: outside the quota slots, no excluded candidate
    // out-rates an included one
    double min_included = 1e18;
    for (std::size_t i = quota; i < next.members.size(); ++i)
      min_included = std::min(min_included, next.members[i].rating.value);
    std::vector<Candidate> all(veterans);
    all.insert(all.end(), offspring.begin(), offspring.end());
    for (const auto& c : all)
      if (!ids.count(c.id) && next.members.size() > quota &&
          c.rating.value > min_included + 1e-12)
        problems.push_back("monotonicity violation at trial " + std::to_string(trial));
  }
  return problems;
}

// -------------------------------------------------------------------
// 4. Determinism & resume
// -------------------------------------------------------------------
std::vector<std::string> criterion_resume() {
  std::vector<std::string> problems;
  TempDir straight("straight");
  TempDir resumed("resumed");
  EngineConfig cfg;
  cfg.n = 4;
  cfg.generations = 5;
  cfg.debate_rounds = 1;
  cfg.mutation_rate = 0.4;
  cfg.master_seed = 42;

  run_llm(cfg, {"s1", "s2", "s3", "s4"}, tiny_tasks(), standard_script(), straight.path);
  run_llm(cfg, {"s1", "s2", "s3", "s4"}, tiny_tasks(), standard_script(), resumed.path,
          nullptr, /*stop_after=*/3);
  resume_llm(resumed.path, standard_script());

  const std::string a = slurp(straight.path / "report.json");
  const std::string b = slurp(resumed.path / "report.json");
  if (a.empty() || a != b)
    problems.push_back("straight and 3+2 resumed runs differ in their final report bytes");
  return problems;
}

// -------------------------------------------------------------------
// 5. Position-bias neutralization
// -------------------------------------------------------------------
std::vector<std::string> criterion_position_bias() {
  std::vector<std::string> problems;
  auto judge_a = ScriptedProvider::mapping({{CallTag::judge, "", "<winner>A</winner>"}});
  const std::vector<std::string> cand(6, "candidate output");
  const std::vector<std::string> opp(6, "opponent output");
  const WinrateResult res = winrate_protocol(cand, opp, 20, *judge_a, 7);
  if (res.winrate != 0.5)
    problems.push_back("always-A judge winrate " + std::to_string(res.winrate) + " != 0.5");
  int at_a = 0;
  for (const auto& t : res.trials) at_a += t.candidate_position == Side::a;
  if (at_a != 10)
    problems.push_back("candidate held position A in " + std::to_string(at_a) +
                       " of 20 trials, expected exactly 10");
  return problems;
}

// -------------------------------------------------------------------
// 6. Point-biserial oracle
// -------------------------------------------------------------------
std::vector<std::string> criterion_point_biserial() {
  std::vector<std::string> problems;
  const double r = point_biserial({1100, 1000, 900, 800}, {1, 1, 0, 0});
  if (std::fabs(r - 0.8944271909999159) > 1e-4)
    problems.push_back("hand-derived example: got " + std::to_string(r));

  Rng rng(606);
  std::vector<double> ratings;
  std::vector<int> correct;
  for (int i = 0; i < 16; ++i) {
    ratings.push_back(700 + 600 * rng.uniform01());
    correct.push_back(rng.uniform01() < 0.5 ? 1 : 0);
  }
  correct[0] = 1;
  correct[1] = 0;
  const double base = point_biserial(ratings, correct);
  for (int trial = 0; trial < 100; ++trial) {
    const double scale = 0.01 + 20.0 * rng.uniform01();
    const double shift = -1000.0 + 2000.0 * rng.uniform01();
    std::vector<double> transformed;
    for (double x : ratings) transformed.push_back(scale * x + shift);
    if (std::fabs(point_biserial(transformed, correct) - base) > 1e-9) {
      problems.push_back("affine invariance violated at trial " + std::to_string(trial));
      break;
    }
  }
  return problems;
}

// -------------------------------------------------------------------
// 7 & 9. Simulation co-ascent and the correlation echo
// -------------------------------------------------------------------
struct SimSweep {
  int mean_ascents = 0;
  double tau_final_sum = 0.0;
  double tau_all_sum = 0.0;
  int pb_positive = 0;
  int seeds = 0;
};

SimSweep g_sweep;

std::vector<std::string> criterion_sim_co_ascent() {
  std::vector<std::string> problems;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    TempDir dir("sweep" + std::to_string(seed));
    LabConfig lab;  // dimension 8, beta 4, bias 0.7, sigma 0.05
    EngineConfig cfg;
    cfg.n = 10;
    cfg.generations = 5;
    cfg.master_seed = seed;
    const SimReport r = run_sim(lab, cfg, dir.path);
    g_sweep.seeds++;
    g_sweep.mean_ascents +=
        r.quality.back().mean_quality > r.quality.front().mean_quality;
    g_sweep.tau_final_sum += r.tau_final_population;
    g_sweep.tau_all_sum += r.tau_all_played;
    g_sweep.pb_positive += r.point_biserial_all_played > 0.0;
  }
  std::printf("       sim sweep: mean-ascent %d/20, mean tau (final population) %.4f,\n"
              "       mean tau (all played) %.4f, point-biserial positive %d/20\n",
              g_sweep.mean_ascents, g_sweep.tau_final_sum / 20.0, g_sweep.tau_all_sum / 20.0,
              g_sweep.pb_positive);
  if (g_sweep.mean_ascents < 18)
    problems.push_back("final mean quality exceeded generation 0 in only " +
                       std::to_string(g_sweep.mean_ascents) + "/20 seeds (need >= 18)");
  const double mean_tau = g_sweep.tau_final_sum / 20.0;
  if (mean_tau < 0.5)
    problems.push_back("mean Kendall tau over the final population is " +
                       std::to_string(mean_tau) + ", below the 0.5 threshold");
  return problems;
}

std::vector<std::string> criterion_correlation_echo() {
  std::vector<std::string> problems;
  if (g_sweep.seeds != 20) {
    problems.push_back("criterion 7 sweep did not run");
    return problems;
  }
  if (g_sweep.pb_positive < 18)
    problems.push_back("point-biserial positive in only " +
                       std::to_string(g_sweep.pb_positive) + "/20 seeds (need >= 18)");
  return problems;
}

// -------------------------------------------------------------------
// 8. Mutation-rate gate
// -------------------------------------------------------------------
std::vector<std::string> criterion_mutation_gate() {
  std::vector<std::string> problems;

  auto mutation_calls = [&](double m) {
    TempDir dir("gate" + std::to_string(static_cast<int>(m * 10)));
    EngineConfig cfg;
    cfg.n = 6;
    cfg.generations = 3;
    cfg.debate_rounds = 0;
    cfg.mutation_rate = m;
    cfg.master_seed = 42;
    auto ledger = std::make_shared<CallLedger>();
    run_llm(cfg, {"a", "b", "c", "d", "e", "f"}, tiny_tasks(), standard_script(), dir.path,
            ledger);
    const auto totals = ledger->totals_by_tag();
    const long mutations = totals.count("mutation") ? totals.at("mutation") : 0;
    const long crossovers = totals.count("crossover") ? totals.at("crossover") : 0;
    return std::pair<long, long>{mutations, crossovers};
  };

  const auto [m0, x0] = mutation_calls(0.0);
  if (m0 != 0) problems.push_back("m=0 issued " + std::to_string(m0) + " mutation calls");
  const auto [m1, x1] = mutation_calls(1.0);
  if (m1 != x1 || m1 == 0)
    problems.push_back("m=1 mutated " + std::to_string(m1) + " of " + std::to_string(x1) +
                       " offspring");

  int gated = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    Rng gate(derive_seed(42, 1, static_cast<std::uint64_t>(i), "mutation-gate"));
    if (gate.uniform01() < 0.4) ++gated;
  }
  const double fraction = static_cast<double>(gated) / trials;
  if (fraction < 0.37 || fraction > 0.43)
    problems.push_back("m=0.4 gate fraction " + std::to_string(fraction) +
                       " outside [0.37, 0.43]");
  return problems;
}

}  // namespace

int main() {
  std::printf("acceptance suite\n================\n");
  const std::vector<Criterion> criteria = {
      {1, "Elo arithmetic matches an independent reference (1,000 pairs, 1e-9)", 1.0,
       criterion_elo},
      {2, "call-count law holds on the provider ledger (n=4, G=2, d=3, m=1)", 5.0,
       criterion_call_count},
      {3, "quota selection invariants over 10,000 randomized instances", 10.0,
       criterion_selection},
      {4, "straight and 3+2 resumed runs are byte-identical", 10.0, criterion_resume},
      {5, "position-swapped winrate neutralizes a pure positional bias", 1.0,
       criterion_position_bias},
      {6, "point-biserial oracle and affine invariance", 1.0, criterion_point_biserial},
      {7, "simulation co-ascent over 20 seeds (quality up; tau >= 0.5)", 60.0,
       criterion_sim_co_ascent},
      {8, "mutation-rate gate at m=0, m=1, and m=0.4", 5.0, criterion_mutation_gate},
      {9, "rating/correctness point-biserial positive in >= 18/20 seeds", 60.0,
       criterion_correlation_echo},
  };
  for (const auto& c : criteria) run_criterion(c);

  std::printf("================\n");
  if (g_failures.empty()) {
    std::printf("all criteria passed\n");
    return 0;
  }
  std::printf("%zu criterion failure(s)\n", g_failures.size());
  return 1;
}
