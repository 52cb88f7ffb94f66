// Copyright 2026 the pevo authors
// SPDX-License-Identifier: Apache-2.0
//
// The generational loop: pairing, concurrent match evaluation, rating
// application, breeding, aging, quota selection, checkpointing, resume.
// One control thread owns the population; per-pair work runs on a
// bounded pool and merges back in pair-index order, so runs replay
// byte-identically under any worker interleaving.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pevo/arena.hpp"
#include "pevo/errors.hpp"
#include "pevo/gateway.hpp"
#include "pevo/match.hpp"
#include "pevo/rating.hpp"
#include "pevo/rng.hpp"
#include "pevo/roster.hpp"
#include "pevo/serialize.hpp"
#include "pevo/taskbank.hpp"
#include "pevo/variation.hpp"

namespace pevo {

// Seed-derivation purpose tags used by the loop.
inline constexpr std::string_view kPurposePairing = "pairing";
inline constexpr std::string_view kPurposeTaskDraw = "task-draw";
inline constexpr std::string_view kPurposeMutationGate = "mutation-gate";

struct Temperatures {
  double execution = 0.0;
  double debater = 0.8;
  double judge = 0.0;
  double variation = 0.8;
};

struct RetryCaps {
  int provider_attempts = 5;
  int judge_retries = 2;
  int extract_retries = 2;
};

struct EngineConfig {
  int n = 10;                 // population size
  int generations = 5;        // G
  double mutation_rate = 0.4; // m
  int newcomer_quota = -1;    // n_new; -1 resolves to n/3
  int debate_rounds = 3;      // d
  double k_factor = 32.0;
  Temperatures temperatures;
  int max_output_tokens = 4096;
  int max_inflight = 8;
  std::uint64_t master_seed = 0;
  RetryCaps retries;
  std::size_t max_request_chars = 400000;

  EngineConfig resolved() const {
    EngineConfig c = *this;
    if (c.newcomer_quota < 0) c.newcomer_quota = c.n / 3;
    return c;
  }
};

inline void validate(const EngineConfig& cfg) {
  auto bad = [](const std::string& field, const std::string& why) {
    throw ConfigError("config field '" + field + "': " + why);
  };
  if (cfg.n < 2) bad("n", "population size must be >= 2");
  if (cfg.generations < 1) bad("generations", "must be >= 1");
  if (cfg.mutation_rate < 0.0 || cfg.mutation_rate > 1.0)
    bad("mutation_rate", "must be within [0, 1]");
  if (cfg.newcomer_quota < 0) bad("newcomer_quota", "must be >= 0");
  if (cfg.newcomer_quota > cfg.n) bad("newcomer_quota", "must be <= n");
  if (cfg.debate_rounds < 0) bad("debate_rounds", "must be >= 0");
  if (!(cfg.k_factor > 0.0)) bad("k_factor", "must be positive");
  for (auto [name, value] : {std::pair<const char*, double>{"temperatures.execution",
                                                            cfg.temperatures.execution},
                             {"temperatures.debater", cfg.temperatures.debater},
                             {"temperatures.judge", cfg.temperatures.judge},
                             {"temperatures.variation", cfg.temperatures.variation}})
    if (value < 0.0 || value > 2.0) bad(name, "must be within [0, 2]");
  if (cfg.max_output_tokens < 1) bad("max_output_tokens", "must be >= 1");
  if (cfg.max_inflight < 1) bad("max_inflight", "must be >= 1");
  if (cfg.retries.provider_attempts < 1) bad("retries.provider_attempts", "must be >= 1");
  if (cfg.retries.judge_retries < 0) bad("retries.judge_retries", "must be >= 0");
  if (cfg.retries.extract_retries < 0) bad("retries.extract_retries", "must be >= 0");
}

inline void to_json(json& j, const Temperatures& t) {
  j = json{{"execution", t.execution},
           {"debater", t.debater},
           {"judge", t.judge},
           {"variation", t.variation}};
}
inline void from_json(const json& j, Temperatures& t) {
  t.execution = j.value("execution", 0.0);
  t.debater = j.value("debater", 0.8);
  t.judge = j.value("judge", 0.0);
  t.variation = j.value("variation", 0.8);
}

inline void to_json(json& j, const RetryCaps& r) {
  j = json{{"provider_attempts", r.provider_attempts},
           {"judge_retries", r.judge_retries},
           {"extract_retries", r.extract_retries}};
}
inline void from_json(const json& j, RetryCaps& r) {
  r.provider_attempts = j.value("provider_attempts", 5);
  r.judge_retries = j.value("judge_retries", 2);
  r.extract_retries = j.value("extract_retries", 2);
}

inline void to_json(json& j, const EngineConfig& c) {
  j = json{{"n", c.n},
           {"generations", c.generations},
           {"mutation_rate", c.mutation_rate},
           {"newcomer_quota", c.newcomer_quota},
           {"debate_rounds", c.debate_rounds},
           {"k_factor", c.k_factor},
           {"temperatures", c.temperatures},
           {"max_output_tokens", c.max_output_tokens},
           {"max_inflight", c.max_inflight},
           {"master_seed", c.master_seed},
           {"retries", c.retries},
           {"max_request_chars", c.max_request_chars}};
}
inline void from_json(const json& j, EngineConfig& c) {
  c = EngineConfig{};
  c.n = j.value("n", 10);
  c.generations = j.value("generations", 5);
  c.mutation_rate = j.value("mutation_rate", 0.4);
  c.newcomer_quota = j.value("newcomer_quota", -1);
  c.debate_rounds = j.value("debate_rounds", 3);
  c.k_factor = j.value("k_factor", 32.0);
  if (j.contains("temperatures")) j.at("temperatures").get_to(c.temperatures);
  c.max_output_tokens = j.value("max_output_tokens", 4096);
  c.max_inflight = j.value("max_inflight", 8);
  c.master_seed = j.value("master_seed", std::uint64_t{0});
  if (j.contains("retries")) j.at("retries").get_to(c.retries);
  c.max_request_chars = j.value("max_request_chars", std::size_t{400000});
}

// ---------------------------------------------------------------------
// Per-generation state
// ---------------------------------------------------------------------

struct SkippedPair {
  std::string cand_a_id;
  std::string cand_b_id;
  std::string reason;
};

struct GenerationReportRow {
  double max_rating = 0.0;
  double mean_rating = 0.0;
  std::string best_id;
};

struct GenerationState {
  int generation_index = 0;  // 1-based: the generation that was played
  std::vector<MatchRecord> matches;
  std::vector<SkippedPair> skipped;
  std::vector<Candidate> offspring;
  std::vector<std::string> byes;
  Population population;  // post-selection population entering the next generation
  GenerationReportRow report_row;
  std::map<std::string, long> call_totals;
  std::uint64_t id_counter = 0;
  std::vector<std::string> warnings;
};

struct RunReport {
  std::vector<GenerationReportRow> generations;
  std::string final_top_id;
  double final_top_rating = 0.0;
  std::map<std::string, long> provider_calls;
};

inline void to_json(json& j, const SkippedPair& s) {
  j = json{{"cand_a_id", s.cand_a_id}, {"cand_b_id", s.cand_b_id}, {"reason", s.reason}};
}
inline void from_json(const json& j, SkippedPair& s) {
  j.at("cand_a_id").get_to(s.cand_a_id);
  j.at("cand_b_id").get_to(s.cand_b_id);
  j.at("reason").get_to(s.reason);
}

inline void to_json(json& j, const GenerationReportRow& r) {
  j = json{{"max_rating", r.max_rating}, {"mean_rating", r.mean_rating}, {"best_id", r.best_id}};
}
inline void from_json(const json& j, GenerationReportRow& r) {
  j.at("max_rating").get_to(r.max_rating);
  j.at("mean_rating").get_to(r.mean_rating);
  j.at("best_id").get_to(r.best_id);
}

inline void to_json(json& j, const GenerationState& g) {
  j = json{{"generation_index", g.generation_index},
           {"matches", g.matches},
           {"skipped", g.skipped},
           {"offspring", g.offspring},
           {"byes", g.byes},
           {"population", g.population},
           {"report_row", g.report_row},
           {"call_totals", g.call_totals},
           {"id_counter", g.id_counter},
           {"warnings", g.warnings}};
}
inline void from_json(const json& j, GenerationState& g) {
  j.at("generation_index").get_to(g.generation_index);
  j.at("matches").get_to(g.matches);
  j.at("skipped").get_to(g.skipped);
  j.at("offspring").get_to(g.offspring);
  j.at("byes").get_to(g.byes);
  j.at("population").get_to(g.population);
  j.at("report_row").get_to(g.report_row);
  j.at("call_totals").get_to(g.call_totals);
  j.at("id_counter").get_to(g.id_counter);
  j.at("warnings").get_to(g.warnings);
}

inline void to_json(json& j, const RunReport& r) {
  j = json{{"generations", r.generations},
           {"final_top_id", r.final_top_id},
           {"final_top_rating", r.final_top_rating},
           {"provider_calls", r.provider_calls}};
}
inline void from_json(const json& j, RunReport& r) {
  j.at("generations").get_to(r.generations);
  j.at("final_top_id").get_to(r.final_top_id);
  j.at("final_top_rating").get_to(r.final_top_rating);
  j.at("provider_calls").get_to(r.provider_calls);
}

// ---------------------------------------------------------------------
// Run archive: manifest + per-generation files, written atomically.
// ---------------------------------------------------------------------

inline constexpr int kArchiveFormatVersion = 1;

struct Manifest {
  int format_version = kArchiveFormatVersion;
  std::string mode;  // "llm" | "sim"
  EngineConfig config;
  json lab;            // sim lab config, when mode == "sim"
  json provider_spec;  // opaque provider description for resume
  std::optional<TaskSet> tasks;
  Population initial_population;
  std::uint64_t id_counter = 0;  // after initialization
  std::map<std::string, long> init_calls;
  int completed_generations = 0;
};

inline void to_json(json& j, const Manifest& m) {
  j = json{{"format_version", m.format_version},
           {"mode", m.mode},
           {"config", m.config},
           {"initial_population", m.initial_population},
           {"id_counter", m.id_counter},
           {"init_calls", m.init_calls},
           {"completed_generations", m.completed_generations}};
  if (!m.lab.is_null()) j["lab"] = m.lab;
  if (!m.provider_spec.is_null()) j["provider_spec"] = m.provider_spec;
  if (m.tasks) j["tasks"] = *m.tasks;
}
inline void from_json(const json& j, Manifest& m) {
  j.at("format_version").get_to(m.format_version);
  j.at("mode").get_to(m.mode);
  j.at("config").get_to(m.config);
  j.at("initial_population").get_to(m.initial_population);
  j.at("id_counter").get_to(m.id_counter);
  j.at("init_calls").get_to(m.init_calls);
  j.at("completed_generations").get_to(m.completed_generations);
  m.lab = j.contains("lab") ? j["lab"] : json();
  m.provider_spec = j.contains("provider_spec") ? j["provider_spec"] : json();
  if (j.contains("tasks")) m.tasks = j["tasks"].get<TaskSet>();
  else m.tasks.reset();
}

class RunArchive {
 public:
  explicit RunArchive(std::filesystem::path dir) : dir_(std::move(dir)) {}

  static RunArchive create(const std::filesystem::path& dir, const Manifest& manifest) {
    std::filesystem::create_directories(dir / "generations");
    RunArchive a(dir);
    a.write_manifest(manifest);
    return a;
  }

  static bool exists(const std::filesystem::path& dir) {
    return std::filesystem::exists(dir / "manifest.json");
  }

  const std::filesystem::path& dir() const { return dir_; }

  Manifest read_manifest() const {
    const json j = read_json(dir_ / "manifest.json");
    Manifest m;
    try {
      m = j.get<Manifest>();
    } catch (const json::exception& e) {
      throw DataError("manifest.json is corrupted: " + std::string(e.what()));
    }
    if (m.format_version != kArchiveFormatVersion)
      throw DataError("archive format version " + std::to_string(m.format_version) +
                      " is not supported (expected " +
                      std::to_string(kArchiveFormatVersion) + ")");
    return m;
  }

  void write_manifest(const Manifest& m) const { write_json(dir_ / "manifest.json", json(m)); }

  void write_generation(const GenerationState& g) const {
    write_json(generation_path(g.generation_index), json(g));
  }

  GenerationState read_generation(int index) const {
    const json j = read_json(generation_path(index));
    try {
      return j.get<GenerationState>();
    } catch (const json::exception& e) {
      throw DataError("generation file " + generation_path(index).string() +
                      " is corrupted: " + std::string(e.what()));
    }
  }

  void write_partial_generation(int index, const json& payload) const {
    char name[32];
    std::snprintf(name, sizeof name, "gen_%03d.partial.json", index);
    write_json(dir_ / "generations" / name, payload);
  }

  void write_report(const RunReport& r) const { write_json(dir_ / "report.json", json(r)); }

  RunReport read_report() const {
    const json j = read_json(dir_ / "report.json");
    try {
      return j.get<RunReport>();
    } catch (const json::exception& e) {
      throw DataError("report.json is corrupted: " + std::string(e.what()));
    }
  }

  std::filesystem::path generation_path(int index) const {
    char name[24];
    std::snprintf(name, sizeof name, "gen_%03d.json", index);
    return dir_ / "generations" / name;
  }

  static json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    try {
      return json::parse(in);
    } catch (const json::exception& e) {
      throw DataError(path.string() + " is corrupted: " + std::string(e.what()));
    }
  }

  static void write_json(const std::filesystem::path& path, const json& j) {
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      if (!out) throw DataError("cannot write " + tmp);
      out << j.dump(2) << '\n';
      if (!out) throw DataError("short write on " + tmp);
    }
    std::filesystem::rename(tmp, path);
  }

 private:
  std::filesystem::path dir_;
};

// ---------------------------------------------------------------------
// The loop
// ---------------------------------------------------------------------

// Outcome of one pair's pipeline. A missing record means the pair was
// skipped (no verdict); a record without a draft means the match counted
// but breeding produced nothing.
struct PairResult {
  std::optional<MatchRecord> record;
  std::optional<OffspringDraft> draft;
  std::string note;
};

using PairWorker =
    std::function<PairResult(const Candidate& a, const Candidate& b, int generation_index,
                             int pair_index)>;

namespace detail {

inline GenerationReportRow report_row_of(const Population& pop) {
  GenerationReportRow row;
  double sum = 0.0;
  const Candidate* best = nullptr;
  for (const auto& c : pop.members) {
    sum += c.rating.value;
    if (best == nullptr || ranks_before(c, *best)) best = &c;
  }
  row.max_rating = best ? best->rating.value : 0.0;
  row.mean_rating = pop.members.empty() ? 0.0 : sum / static_cast<double>(pop.members.size());
  row.best_id = best ? best->id : "";
  return row;
}

struct PairSlot {
  PairResult result;
  std::exception_ptr fatal;
  bool skipped = false;
  std::string skip_reason;
};

}  // namespace detail

class Engine {
 public:
  Engine(EngineConfig cfg, PairWorker worker, std::shared_ptr<CallLedger> ledger = nullptr)
      : cfg_(cfg.resolved()), worker_(std::move(worker)), ledger_(std::move(ledger)) {
    validate(cfg_);
    if (!worker_) throw InvalidArgument("engine: pair worker required");
  }

  const EngineConfig& config() const { return cfg_; }

  // Plays one generation (1-based index) and returns its full state,
  // including the post-selection population. `pop` is the population
  // entering the generation; `ids` continues the run-wide id sequence.
  GenerationState play_generation(const Population& pop, int generation_index,
                                  IdAllocator& ids) {
    const auto calls_before = ledger_ ? ledger_->totals_by_tag() : std::map<std::string, long>{};
    GenerationState state;
    state.generation_index = generation_index;

    const Pairing pairing =
        pair_random(pop, derive_seed(cfg_.master_seed, generation_index, 0, kPurposePairing));
    state.byes = pairing.byes;

    std::map<std::string, std::size_t> index_of;
    for (std::size_t i = 0; i < pop.members.size(); ++i) index_of[pop.members[i].id] = i;

    std::vector<detail::PairSlot> slots(pairing.pairs.size());
    std::atomic<std::size_t> cursor{0};
    auto run_worker = [&]() {
      for (;;) {
        const std::size_t i = cursor.fetch_add(1);
        if (i >= pairing.pairs.size()) return;
        const Candidate& a = pop.members[index_of.at(pairing.pairs[i].first)];
        const Candidate& b = pop.members[index_of.at(pairing.pairs[i].second)];
        auto& slot = slots[i];
        try {
          slot.result = worker_(a, b, generation_index, static_cast<int>(i));
        } catch (const ScriptExhausted&) {
          slot.fatal = std::current_exception();
        } catch (const DebateAborted& e) {
          slot.skipped = true;
          slot.skip_reason = std::string("debate-aborted: ") + e.what();
        } catch (const VerdictUnparseable& e) {
          slot.skipped = true;
          slot.skip_reason = std::string("verdict-unparseable: ") + e.what();
        } catch (const ProviderExhausted& e) {
          slot.skipped = true;
          slot.skip_reason = std::string("provider-exhausted: ") + e.what();
        } catch (...) {
          slot.fatal = std::current_exception();
        }
      }
    };

    const std::size_t pool = std::min<std::size_t>(
        static_cast<std::size_t>(cfg_.max_inflight), std::max<std::size_t>(pairing.pairs.size(), 1));
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (std::size_t t = 0; t < pool; ++t) threads.emplace_back(run_worker);
    for (auto& t : threads) t.join();

    for (const auto& slot : slots) {
      if (slot.fatal) {
        persist_partial(slots, generation_index);
        std::rethrow_exception(slot.fatal);
      }
    }

    // Merge in pair-index order on this thread: apply ratings, mint
    // offspring ids, record skips.
    Population next = pop;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      auto& slot = slots[i];
      const auto& [id_a, id_b] = pairing.pairs[i];
      if (slot.skipped || !slot.result.record) {
        state.skipped.push_back({id_a, id_b,
                                 slot.skipped ? slot.skip_reason
                                              : (slot.result.note.empty() ? "no verdict"
                                                                          : slot.result.note)});
        continue;
      }
      MatchRecord record = std::move(*slot.result.record);
      Candidate& a = next.members[index_of.at(id_a)];
      Candidate& b = next.members[index_of.at(id_b)];
      RatingChange change;
      change.before_a = a.rating.value;
      change.before_b = b.rating.value;
      const auto [ra, rb] =
          update(a.rating, b.rating, record.verdict.winner, KFactor{cfg_.k_factor});
      a.rating = ra;
      b.rating = rb;
      change.after_a = ra.value;
      change.after_b = rb.value;
      record.ratings = change;

      if (slot.result.draft) {
        const bool a_won = record.verdict.winner == Side::a;
        Candidate child;
        child.id = ids.next();
        child.text = slot.result.draft->text;
        child.rating = Rating{kBaseRating};
        child.age = 0;
        child.lineage = Lineage{a_won ? id_a : id_b, a_won ? id_b : id_a,
                                slot.result.draft->mutated, generation_index};
        if (slot.result.draft->mutation_failed)
          state.warnings.push_back("mutation-failed for pair " + id_a + ":" + id_b +
                                   "; kept the unmutated offspring");
        state.offspring.push_back(std::move(child));
      } else if (!slot.result.note.empty()) {
        state.warnings.push_back(slot.result.note + " (pair " + id_a + ":" + id_b +
                                 "; match kept, no offspring)");
      }
      state.matches.push_back(std::move(record));
    }

    next = age_all(std::move(next));
    state.population = select_next_generation(std::move(next.members), state.offspring, cfg_.n,
                                              cfg_.newcomer_quota, generation_index,
                                              &state.warnings);
    state.report_row = detail::report_row_of(state.population);
    state.id_counter = ids.counter();

    if (ledger_) {
      auto after = ledger_->totals_by_tag();
      for (auto& [tag, count] : after) {
        const auto it = calls_before.find(tag);
        const long delta = count - (it == calls_before.end() ? 0 : it->second);
        if (delta != 0) state.call_totals[tag] = delta;
      }
    }
    return state;
  }

  // Runs generations completed+1 .. G against the archive, checkpointing
  // after each one, then writes the final report. `stop_after` > 0 halts
  // the run early at that generation (the archive stays resumable).
  RunReport drive(RunArchive& archive, int stop_after = 0) {
    Manifest manifest = archive.read_manifest();
    Population pop = manifest.completed_generations == 0
                         ? manifest.initial_population
                         : archive.read_generation(manifest.completed_generations).population;
    IdAllocator ids(manifest.completed_generations == 0
                        ? manifest.id_counter
                        : archive.read_generation(manifest.completed_generations).id_counter);

    const int last = stop_after > 0 ? std::min(stop_after, cfg_.generations) : cfg_.generations;
    for (int g = manifest.completed_generations + 1; g <= last; ++g) {
      pending_partial_archive_ = &archive;
      GenerationState state = play_generation(pop, g, ids);
      pending_partial_archive_ = nullptr;
      archive.write_generation(state);
      manifest.completed_generations = g;
      archive.write_manifest(manifest);
      pop = state.population;
    }
    const RunReport report = build_report(archive);
    archive.write_report(report);
    return report;
  }

  static RunReport build_report(const RunArchive& archive) {
    const Manifest manifest = archive.read_manifest();
    RunReport report;
    report.provider_calls = manifest.init_calls;
    Population last = manifest.initial_population;
    for (int g = 1; g <= manifest.completed_generations; ++g) {
      const GenerationState state = archive.read_generation(g);
      report.generations.push_back(state.report_row);
      for (const auto& [tag, count] : state.call_totals) report.provider_calls[tag] += count;
      last = state.population;
    }
    if (!last.members.empty()) {
      const Candidate& top = top_candidate(last);
      report.final_top_id = top.id;
      report.final_top_rating = top.rating.value;
    }
    return report;
  }

 private:
  void persist_partial(const std::vector<detail::PairSlot>& slots, int generation_index) {
    if (pending_partial_archive_ == nullptr) return;
    json payload;
    payload["generation_index"] = generation_index;
    auto& completed = payload["completed_matches"] = json::array();
    for (const auto& slot : slots)
      if (!slot.skipped && slot.result.record) completed.push_back(*slot.result.record);
    payload["note"] = "run halted mid-generation; resume replays this generation from the "
                      "last complete checkpoint";
    try {
      pending_partial_archive_->write_partial_generation(generation_index, payload);
    } catch (...) {
      // the original fatal error is about to propagate; nothing to add
    }
  }

  EngineConfig cfg_;
  PairWorker worker_;
  std::shared_ptr<CallLedger> ledger_;
  RunArchive* pending_partial_archive_ = nullptr;
};

// ---------------------------------------------------------------------
// LLM-backed pair worker
// ---------------------------------------------------------------------

inline PairWorker make_llm_pair_worker(std::shared_ptr<Provider> provider,
                                       std::shared_ptr<const TaskSet> tasks,
                                       const EngineConfig& config) {
  if (!provider) throw InvalidArgument("llm pair worker: provider required");
  if (!tasks) throw InvalidArgument("llm pair worker: task set required");
  const EngineConfig cfg = config.resolved();
  ArenaOptions arena;
  arena.debate_rounds = cfg.debate_rounds;
  arena.execution_temperature = cfg.temperatures.execution;
  arena.defender_temperature = cfg.temperatures.debater;
  arena.judge_temperature = cfg.temperatures.judge;
  arena.max_output_tokens = cfg.max_output_tokens;
  arena.judge_retries = cfg.retries.judge_retries;
  VariationOptions var;
  var.temperature = cfg.temperatures.variation;
  var.max_output_tokens = cfg.max_output_tokens;
  var.extract_retries = cfg.retries.extract_retries;
  var.max_request_chars = cfg.max_request_chars;

  return [provider, tasks, cfg, arena, var](const Candidate& a, const Candidate& b,
                                            int generation_index, int pair_index) {
    const TaskView task = sample_train_view(
        *tasks, derive_seed(cfg.master_seed, generation_index, pair_index, kPurposeTaskDraw),
        0);
    PairResult out;
    out.record = evaluate_pair(a, b, task, *provider, arena);
    try {
      out.draft = breed(*out.record, a.text, b.text, cfg.mutation_rate,
                        derive_seed(cfg.master_seed, generation_index, pair_index,
                                    kPurposeMutationGate),
                        *provider, var);
    } catch (const ScriptExhausted&) {
      throw;
    } catch (const ExtractionError& e) {
      out.note = std::string("crossover-failed: ") + e.what();
    } catch (const ProviderExhausted& e) {
      out.note = std::string("crossover-failed: ") + e.what();
    }
    return out;
  };
}

// Full LLM-mode run: initialize the population (filling seed shortfalls
// with prompt variations), create the archive, drive all generations.
inline RunReport run_llm(const EngineConfig& config, const std::vector<std::string>& seeds,
                         TaskSet tasks, std::shared_ptr<Provider> raw_provider,
                         const std::filesystem::path& run_dir,
                         std::shared_ptr<CallLedger> ledger = nullptr, int stop_after = 0,
                         json provider_spec = {}) {
  const EngineConfig cfg = config.resolved();
  validate(cfg);
  if (!ledger) ledger = std::make_shared<CallLedger>();
  auto provider = std::make_shared<Gateway>(std::move(raw_provider), ledger, cfg.max_inflight);

  VariationOptions var;
  var.temperature = cfg.temperatures.variation;
  var.max_output_tokens = cfg.max_output_tokens;
  var.extract_retries = cfg.retries.extract_retries;
  var.max_request_chars = cfg.max_request_chars;

  IdAllocator ids;
  Population initial = init_population(seeds, cfg.n, *provider, cfg.master_seed, ids, var);

  Manifest manifest;
  manifest.mode = "llm";
  manifest.config = cfg;
  manifest.provider_spec = std::move(provider_spec);
  manifest.tasks = std::move(tasks);
  manifest.initial_population = std::move(initial);
  manifest.id_counter = ids.counter();
  manifest.init_calls = ledger->totals_by_tag();
  RunArchive archive = RunArchive::create(run_dir, manifest);

  auto shared_tasks = std::make_shared<const TaskSet>(*manifest.tasks);
  Engine engine(cfg, make_llm_pair_worker(provider, shared_tasks, cfg), ledger);
  try {
    RunReport report = engine.drive(archive, stop_after);
    write_ledger_jsonl(*ledger, run_dir / "ledger.jsonl");
    return report;
  } catch (...) {
    write_ledger_jsonl(*ledger, run_dir / "ledger.jsonl");
    throw;
  }
}

// Continues an interrupted run from its last complete checkpoint.
inline RunReport resume_llm(const std::filesystem::path& run_dir,
                            std::shared_ptr<Provider> raw_provider,
                            std::shared_ptr<CallLedger> ledger = nullptr) {
  RunArchive archive{run_dir};
  const Manifest manifest = archive.read_manifest();
  if (manifest.mode != "llm")
    throw DataError("resume: archive mode is '" + manifest.mode + "', expected 'llm'");
  if (!manifest.tasks) throw DataError("resume: archive has no task set");
  if (!ledger) ledger = std::make_shared<CallLedger>();
  auto provider =
      std::make_shared<Gateway>(std::move(raw_provider), ledger, manifest.config.max_inflight);
  auto shared_tasks = std::make_shared<const TaskSet>(*manifest.tasks);
  Engine engine(manifest.config, make_llm_pair_worker(provider, shared_tasks, manifest.config),
                ledger);
  RunReport report = engine.drive(archive);
  write_ledger_jsonl(*ledger, run_dir / "ledger.jsonl", /*append=*/true);
  return report;
}

}  // namespace pevo
