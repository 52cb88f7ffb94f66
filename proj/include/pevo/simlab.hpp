// Copyright 2026 the pevo authors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic synthetic arena: a hidden-fitness oracle replaces the
// language model, so the whole evolutionary loop (ratings, quotas,
// breeding, checkpoints) is verifiable at desk scale. Candidates carry
// genomes serialized into their text field; the engine itself runs
// unchanged.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "pevo/engine.hpp"
#include "pevo/errors.hpp"
#include "pevo/rng.hpp"
#include "pevo/scorecard.hpp"

namespace pevo {

inline constexpr std::string_view kPurposeSimTarget = "sim-target";
inline constexpr std::string_view kPurposeSimGenesis = "sim-genesis";
inline constexpr std::string_view kPurposeSimMatch = "sim-match";
inline constexpr std::string_view kPurposeSimCrossover = "sim-crossover";
inline constexpr std::string_view kPurposeSimMutate = "sim-mutate";

struct Genome {
  std::vector<double> values;  // entries clamped to [0, 1]
};

inline std::string genome_to_text(const Genome& g) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    if (i) out << ',';
    out << g.values[i];
  }
  return out.str();
}

inline Genome genome_from_text(const std::string& text) {
  Genome g;
  std::istringstream in(text);
  std::string token;
  while (std::getline(in, token, ',')) {
    try {
      g.values.push_back(std::stod(token));
    } catch (const std::exception&) {
      throw DataError("genome_from_text: bad coordinate '" + token + "'");
    }
  }
  if (g.values.empty()) throw DataError("genome_from_text: empty genome");
  return g;
}

// Hidden skill: negative Euclidean distance to a fixed target, zero at
// the target itself.
struct HiddenFitness {
  Genome target;

  double quality(const Genome& g) const {
    if (g.values.size() != target.values.size())
      throw InvalidArgument("hidden fitness: genome dimension mismatch");
    double sq = 0.0;
    for (std::size_t i = 0; i < g.values.size(); ++i) {
      const double d = g.values[i] - target.values[i];
      sq += d * d;
    }
    return -std::sqrt(sq);
  }
};

struct LabConfig {
  int dimension = 8;
  double beta = 4.0;  // infinity means the higher quality always wins
  double bias = 0.7;  // probability a child coordinate comes from the winner
  double sigma = 0.05;
};

inline void validate(const LabConfig& lab) {
  auto bad = [](const std::string& field, const std::string& why) {
    throw ConfigError("config field 'lab." + field + "': " + why);
  };
  if (lab.dimension < 1) bad("dimension", "must be >= 1");
  if (std::isnan(lab.beta) || lab.beta < 0.0) bad("beta", "must be >= 0 (or \"inf\")");
  if (lab.bias < 0.5 || lab.bias > 1.0) bad("bias", "must be within [0.5, 1]");
  if (lab.sigma < 0.0) bad("sigma", "must be >= 0");
}

inline void to_json(json& j, const LabConfig& lab) {
  j = json{{"dimension", lab.dimension},
           {"bias", lab.bias},
           {"sigma", lab.sigma}};
  if (std::isinf(lab.beta)) j["beta"] = "inf";
  else j["beta"] = lab.beta;
}
inline void from_json(const json& j, LabConfig& lab) {
  lab = LabConfig{};
  lab.dimension = j.value("dimension", 8);
  lab.bias = j.value("bias", 0.7);
  lab.sigma = j.value("sigma", 0.05);
  if (j.contains("beta")) {
    if (j["beta"].is_string()) {
      if (j["beta"].get<std::string>() != "inf")
        throw ConfigError("config field 'lab.beta': must be a number or \"inf\"");
      lab.beta = std::numeric_limits<double>::infinity();
    } else {
      lab.beta = j["beta"].get<double>();
    }
  }
}

inline double sim_win_probability(double q_a, double q_b, double beta) {
  if (std::isinf(beta)) return q_a >= q_b ? 1.0 : 0.0;
  return 1.0 / (1.0 + std::exp(-beta * (q_a - q_b)));
}

// Noisy forced-choice judge. With infinite beta the higher quality wins
// outright, tie to A (sides were already randomized by the pairing).
inline Side sim_match_winner(double q_a, double q_b, double beta, std::uint64_t rng_seed) {
  if (!std::isfinite(q_a) || !std::isfinite(q_b))
    throw InvalidArgument("sim_match_winner: qualities must be finite");
  if (std::isinf(beta)) return q_a >= q_b ? Side::a : Side::b;
  Rng rng(rng_seed);
  return rng.uniform01() < sim_win_probability(q_a, q_b, beta) ? Side::a : Side::b;
}

// Coordinate-wise crossover biased toward the winner.
inline Genome sim_crossover(const Genome& winner, const Genome& loser, double bias,
                            std::uint64_t rng_seed) {
  if (winner.values.size() != loser.values.size())
    throw InvalidArgument("sim_crossover: genome dimension mismatch");
  Rng rng(rng_seed);
  Genome child;
  child.values.reserve(winner.values.size());
  for (std::size_t i = 0; i < winner.values.size(); ++i)
    child.values.push_back(rng.uniform01() < bias ? winner.values[i] : loser.values[i]);
  return child;
}

inline Genome sim_mutate(const Genome& g, double sigma, std::uint64_t rng_seed) {
  Genome out = g;
  if (sigma == 0.0) return out;
  Rng rng(rng_seed);
  for (auto& v : out.values) v = std::clamp(v + sigma * rng.gaussian(), 0.0, 1.0);
  return out;
}

// ---------------------------------------------------------------------
// Driving the real engine with the oracle
// ---------------------------------------------------------------------

inline PairWorker make_sim_pair_worker(const LabConfig& lab, const EngineConfig& config,
                                       HiddenFitness fitness) {
  const EngineConfig cfg = config.resolved();
  return [lab, cfg, fitness](const Candidate& a, const Candidate& b, int generation_index,
                             int pair_index) {
    const Genome ga = genome_from_text(a.text);
    const Genome gb = genome_from_text(b.text);
    const double qa = fitness.quality(ga);
    const double qb = fitness.quality(gb);
    const Side winner = sim_match_winner(
        qa, qb, lab.beta,
        derive_seed(cfg.master_seed, generation_index, pair_index, kPurposeSimMatch));

    PairResult out;
    MatchRecord record;
    record.cand_a_id = a.id;
    record.cand_b_id = b.id;
    record.task_id = "sim";
    record.input_text = "";
    record.response_a = a.text;
    record.response_b = b.text;
    record.verdict = Verdict{winner, "sim-oracle", 0};
    out.record = std::move(record);

    const Genome& wg = winner == Side::a ? ga : gb;
    const Genome& lg = winner == Side::a ? gb : ga;
    Genome child = sim_crossover(
        wg, lg, lab.bias,
        derive_seed(cfg.master_seed, generation_index, pair_index, kPurposeSimCrossover));
    OffspringDraft draft;
    Rng gate(derive_seed(cfg.master_seed, generation_index, pair_index, kPurposeMutationGate));
    if (gate.uniform01() < cfg.mutation_rate) {
      child = sim_mutate(child, lab.sigma, derive_seed(cfg.master_seed, generation_index,
                                                       pair_index, kPurposeSimMutate));
      draft.mutated = true;
    }
    draft.text = genome_to_text(child);
    out.draft = std::move(draft);
    return out;
  };
}

// Kendall tau-b: rank agreement with pairwise tie corrections.
inline double kendall_tau_b(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw InvalidArgument("kendall_tau_b: need equal-length inputs with >= 2 entries");
  long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  const std::size_t n = xs.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = xs[i] - xs[j];
      const double dy = ys[i] - ys[j];
      if (dx == 0.0) ++ties_x;
      if (dy == 0.0) ++ties_y;
      if (dx == 0.0 || dy == 0.0) continue;
      if ((dx > 0.0) == (dy > 0.0)) ++concordant;
      else ++discordant;
    }
  }
  const double n0 = static_cast<double>(n) * (n - 1) / 2.0;
  const double denom = std::sqrt((n0 - ties_x) * (n0 - ties_y));
  if (denom == 0.0) throw InvalidArgument("kendall_tau_b: degenerate (all ties)");
  return (concordant - discordant) / denom;
}

struct SimGenerationRow {
  double max_quality = 0.0;
  double mean_quality = 0.0;
};

struct SimReport {
  RunReport engine_report;
  // Index 0 is the initial population; row g is the population selected
  // at the end of generation g.
  std::vector<SimGenerationRow> quality;
  // Rank agreement between ratings and hidden quality, over the
  // population that played the final generation (ratings after its
  // matches, before selection).
  double tau_final_population = 0.0;
  // Same statistic over every candidate that played at least one match,
  // with the last rating each one held.
  double tau_all_played = 0.0;
  // Point-biserial correlation between those final ratings and a
  // correctness bit (quality above the cohort median).
  double point_biserial_all_played = 0.0;
  std::vector<std::vector<double>> rating_series;  // per generation, post-selection
};

inline void to_json(json& j, const SimGenerationRow& r) {
  j = json{{"max_quality", r.max_quality}, {"mean_quality", r.mean_quality}};
}
inline void from_json(const json& j, SimGenerationRow& r) {
  j.at("max_quality").get_to(r.max_quality);
  j.at("mean_quality").get_to(r.mean_quality);
}

inline void to_json(json& j, const SimReport& r) {
  j = json{{"engine_report", r.engine_report},
           {"quality", r.quality},
           {"tau_final_population", r.tau_final_population},
           {"tau_all_played", r.tau_all_played},
           {"point_biserial_all_played", r.point_biserial_all_played},
           {"rating_series", r.rating_series}};
}
inline void from_json(const json& j, SimReport& r) {
  j.at("engine_report").get_to(r.engine_report);
  j.at("quality").get_to(r.quality);
  j.at("tau_final_population").get_to(r.tau_final_population);
  j.at("tau_all_played").get_to(r.tau_all_played);
  j.at("point_biserial_all_played").get_to(r.point_biserial_all_played);
  j.at("rating_series").get_to(r.rating_series);
}

namespace detail {

inline SimGenerationRow quality_row(const Population& pop, const HiddenFitness& fitness) {
  SimGenerationRow row;
  double sum = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : pop.members) {
    const double q = fitness.quality(genome_from_text(c.text));
    sum += q;
    best = std::max(best, q);
  }
  row.max_quality = best;
  row.mean_quality = pop.members.empty() ? 0.0 : sum / static_cast<double>(pop.members.size());
  return row;
}

}  // namespace detail

inline HiddenFitness make_hidden_fitness(const LabConfig& lab, std::uint64_t master_seed) {
  HiddenFitness fitness;
  Rng rng(derive_seed(master_seed, 0, 0, kPurposeSimTarget));
  fitness.target.values.resize(lab.dimension);
  for (auto& v : fitness.target.values) v = rng.uniform01();
  return fitness;
}

inline Population make_sim_genesis(const LabConfig& lab, const EngineConfig& cfg,
                                   IdAllocator& ids) {
  Population pop;
  pop.generation_index = 0;
  for (int i = 0; i < cfg.n; ++i) {
    Rng rng(derive_seed(cfg.master_seed, 0, static_cast<std::uint64_t>(i), kPurposeSimGenesis));
    Genome g;
    g.values.resize(lab.dimension);
    for (auto& v : g.values) v = rng.uniform01();
    pop.members.push_back(Candidate{ids.next(), genome_to_text(g), Rating{kBaseRating}, 0, std::nullopt});
  }
  return pop;
}

inline SimReport sim_report_from_archive(const RunArchive& archive);

// Runs the engine against the oracle and derives the report from the run
// archive it leaves behind.
inline SimReport run_sim(const LabConfig& lab, const EngineConfig& config,
                         const std::filesystem::path& run_dir, int stop_after = 0) {
  const EngineConfig cfg = config.resolved();
  validate(cfg);
  validate(lab);

  const HiddenFitness fitness = make_hidden_fitness(lab, cfg.master_seed);
  IdAllocator ids;
  Population initial = make_sim_genesis(lab, cfg, ids);

  Manifest manifest;
  manifest.mode = "sim";
  manifest.config = cfg;
  manifest.lab = json(lab);
  manifest.initial_population = initial;
  manifest.id_counter = ids.counter();
  RunArchive archive = RunArchive::create(run_dir, manifest);

  Engine engine(cfg, make_sim_pair_worker(lab, cfg, fitness));
  engine.drive(archive, stop_after);
  return sim_report_from_archive(archive);
}

inline SimReport resume_sim(const std::filesystem::path& run_dir) {
  RunArchive archive{run_dir};
  const Manifest manifest = archive.read_manifest();
  if (manifest.mode != "sim")
    throw DataError("resume: archive mode is '" + manifest.mode + "', expected 'sim'");
  const LabConfig lab = manifest.lab.get<LabConfig>();
  const HiddenFitness fitness = make_hidden_fitness(lab, manifest.config.master_seed);
  Engine engine(manifest.config, make_sim_pair_worker(lab, manifest.config, fitness));
  engine.drive(archive);
  return sim_report_from_archive(archive);
}

// Post-processing over the archive: quality rows per generation, plus
// the rating/quality agreement statistics.
inline SimReport sim_report_from_archive(const RunArchive& archive) {
  const Manifest manifest = archive.read_manifest();
  const LabConfig lab = manifest.lab.get<LabConfig>();
  const HiddenFitness fitness = make_hidden_fitness(lab, manifest.config.master_seed);

  SimReport report;
  report.engine_report = Engine::build_report(archive);
  report.quality.push_back(detail::quality_row(manifest.initial_population, fitness));

  struct Tracked {
    double rating = kBaseRating;
    double quality = 0.0;
    int matches = 0;
  };
  std::map<std::string, Tracked> tracked;
  for (const auto& c : manifest.initial_population.members)
    tracked[c.id] = {c.rating.value, fitness.quality(genome_from_text(c.text)), 0};

  Population previous = manifest.initial_population;
  Population last_played;  // final-generation population with post-match ratings
  for (int g = 1; g <= manifest.completed_generations; ++g) {
    const GenerationState state = archive.read_generation(g);
    report.quality.push_back(detail::quality_row(state.population, fitness));
    std::vector<double> ratings;
    for (const auto& c : state.population.members) ratings.push_back(c.rating.value);
    report.rating_series.push_back(std::move(ratings));

    for (const auto& c : state.offspring)
      tracked[c.id] = {c.rating.value, fitness.quality(genome_from_text(c.text)), 0};
    for (const auto& m : state.matches) {
      if (m.ratings) {
        tracked[m.cand_a_id].rating = m.ratings->after_a;
        tracked[m.cand_b_id].rating = m.ratings->after_b;
      }
      tracked[m.cand_a_id].matches++;
      tracked[m.cand_b_id].matches++;
    }

    if (g == manifest.completed_generations) {
      last_played = previous;
      for (auto& c : last_played.members) c.rating.value = tracked.at(c.id).rating;
    }
    previous = state.population;
  }

  if (last_played.members.size() >= 2) {
    std::vector<double> rs, qs;
    for (const auto& c : last_played.members) {
      rs.push_back(c.rating.value);
      qs.push_back(tracked.at(c.id).quality);
    }
    try {
      report.tau_final_population = kendall_tau_b(rs, qs);
    } catch (const InvalidArgument&) {
      report.tau_final_population = 0.0;  // all-tied cohort carries no rank signal
    }
  }

  std::vector<double> rs, qs;
  for (const auto& [id, t] : tracked) {
    if (t.matches == 0) continue;
    rs.push_back(t.rating);
    qs.push_back(t.quality);
  }
  if (rs.size() >= 2) {
    try {
      report.tau_all_played = kendall_tau_b(rs, qs);
    } catch (const InvalidArgument&) {
      report.tau_all_played = 0.0;
    }
    std::vector<double> sorted_q = qs;
    std::sort(sorted_q.begin(), sorted_q.end());
    const std::size_t n = sorted_q.size();
    const double median =
        n % 2 == 1 ? sorted_q[n / 2] : 0.5 * (sorted_q[n / 2 - 1] + sorted_q[n / 2]);
    std::vector<int> bits;
    bits.reserve(n);
    for (double q : qs) bits.push_back(q > median ? 1 : 0);
    try {
      report.point_biserial_all_played = point_biserial(rs, bits);
    } catch (const InvalidArgument&) {
      report.point_biserial_all_played = 0.0;  // degenerate cohort
    }
  }
  return report;
}

}  // namespace pevo
