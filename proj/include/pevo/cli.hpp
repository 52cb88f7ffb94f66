// Copyright 2026 the pevo authors
// SPDX-License-Identifier: Apache-2.0
//
// Operator surface: configure, launch, resume, inspect, and simulate
// runs. Every human-readable table has a machine-readable twin in the
// run directory, so scripts never parse stdout.

#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pevo/engine.hpp"
#include "pevo/errors.hpp"
#include "pevo/gateway.hpp"
#include "pevo/http_provider.hpp"
#include "pevo/simlab.hpp"

namespace pevo {

struct CommandOutcome {
  int exit_code = 0;
  std::string summary;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitProvider = 3;
inline constexpr int kExitData = 4;
inline constexpr int kExitInternal = 5;

namespace cli_detail {

inline json load_json_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(std::string(what) + ": cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string(what) + ": " + path.string() + ": " + e.what());
  }
}

// Applies one `key=value` override with a dotted path into the config
// object. Values parse as JSON when possible, else as strings.
inline void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' must look like key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json* node = &config;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError("override '" + assignment + "' has an empty path part");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

struct ResolvedRun {
  EngineConfig engine;
  json provider_spec;  // {"mode": "scripted"|"http", ...}
  std::string tasks_path;
  double test_fraction = 0.0;
  std::uint64_t split_seed = 0;
  std::vector<std::string> seeds;
  std::filesystem::path run_dir = "run";
  LabConfig lab;
  bool has_lab = false;
};

inline ResolvedRun resolve_run(const json& raw, const std::set<std::string>& flag_keys) {
  ResolvedRun r;
  try {
    r.engine = raw.get<EngineConfig>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  r.engine = r.engine.resolved();
  validate(r.engine);

  if (raw.contains("run_dir")) r.run_dir = raw["run_dir"].get<std::string>();

  if (raw.contains("tasks")) {
    const auto& t = raw["tasks"];
    if (!t.is_object() || !t.contains("path"))
      throw ConfigError("config field 'tasks': expected an object with 'path'");
    r.tasks_path = t["path"].get<std::string>();
    r.test_fraction = t.value("test_fraction", 0.0);
    r.split_seed = t.value("split_seed", std::uint64_t{0});
  }

  if (raw.contains("seeds")) {
    if (!raw["seeds"].is_array())
      throw ConfigError("config field 'seeds': expected an array of prompt strings");
    for (const auto& s : raw["seeds"]) r.seeds.push_back(s.get<std::string>());
  }
  if (raw.contains("seeds_path")) {
    const json arr = load_json_file(raw["seeds_path"].get<std::string>(), "seeds file");
    if (!arr.is_array()) throw ConfigError("seeds file: expected a JSON array");
    for (const auto& s : arr) r.seeds.push_back(s.get<std::string>());
  }

  r.provider_spec = raw.contains("provider") ? raw["provider"] : json{{"mode", "http"}};
  if (!r.provider_spec.is_object() || !r.provider_spec.contains("mode"))
    throw ConfigError("config field 'provider': expected an object with 'mode'");
  const std::string mode = r.provider_spec["mode"].get<std::string>();
  if (mode != "scripted" && mode != "http")
    throw ConfigError("config field 'provider.mode': must be 'scripted' or 'http'");

  // Precedence for endpoint/model: flag > env > file. The API key only
  // ever comes from the environment.
  if (mode == "http") {
    for (auto [key, env] : {std::pair<const char*, const char*>{"endpoint", kEnvApiBase},
                            {"model", kEnvModel}}) {
      const std::string flag_key = std::string("provider.") + key;
      if (!flag_keys.count(flag_key)) {
        if (auto v = env_value(env)) r.provider_spec[key] = *v;
      }
    }
  }

  if (raw.contains("lab")) {
    r.lab = raw["lab"].get<LabConfig>();
    r.has_lab = true;
    validate(r.lab);
  }
  return r;
}

inline std::shared_ptr<Provider> build_scripted_provider(const json& spec) {
  if (spec.contains("script_path")) {
    const json script = load_json_file(spec["script_path"].get<std::string>(), "script file");
    return build_scripted_provider(script);
  }
  const std::string mode = spec.value("script_mode", spec.value("mode", "list"));
  if (mode == "list" || spec.contains("responses")) {
    if (!spec.contains("responses") || !spec["responses"].is_array())
      throw ConfigError("scripted provider: expected a 'responses' array");
    std::vector<std::string> responses;
    for (const auto& s : spec["responses"]) responses.push_back(s.get<std::string>());
    return ScriptedProvider::sequence(std::move(responses));
  }
  if (!spec.contains("rules") || !spec["rules"].is_array())
    throw ConfigError("scripted provider: expected a 'rules' array");
  std::vector<ScriptedProvider::Rule> rules;
  for (const auto& r : spec["rules"]) {
    ScriptedProvider::Rule rule;
    if (r.contains("tag")) {
      const std::string tag = r["tag"].get<std::string>();
      bool known = false;
      for (auto t : {CallTag::response, CallTag::defender, CallTag::judge, CallTag::crossover,
                     CallTag::mutation, CallTag::variation})
        if (tag == to_string(t)) {
          rule.tag = t;
          known = true;
        }
      if (!known) throw ConfigError("scripted provider: unknown call tag '" + tag + "'");
    }
    rule.contains = r.value("contains", "");
    rule.response = r.at("response").get<std::string>();
    rules.push_back(std::move(rule));
  }
  return ScriptedProvider::mapping(std::move(rules));
}

inline std::shared_ptr<Provider> build_provider(const json& spec) {
  const std::string mode = spec.value("mode", "http");
  if (mode == "scripted") {
    json inner = spec;
    inner.erase("mode");
    return build_scripted_provider(inner);
  }
  HttpProviderConfig cfg;
  cfg.base_url = spec.value("endpoint", "");
  cfg.model = spec.value("model", "");
  if (spec.contains("path")) cfg.path = spec["path"].get<std::string>();
  return std::make_shared<HttpProvider>(cfg);
}

// The call-count law: a completed match costs 2 responses, 2(d+1)
// defender turns, and 1 judge call; each successful pair adds 1
// crossover and at most 1 mutation.
inline std::string dry_run_plan(const ResolvedRun& r) {
  const int pairs_per_gen = r.engine.n / 2;
  const int byes_per_gen = r.engine.n % 2;
  const long total_pairs = static_cast<long>(pairs_per_gen) * r.engine.generations;
  const long per_match = 2 + 2 * (r.engine.debate_rounds + 1) + 1;
  const long init_fills =
      std::max<long>(0, r.engine.n - static_cast<long>(r.seeds.size()));
  const long fixed = total_pairs * (per_match + 1) + init_fills;
  const long mutation_max = r.engine.mutation_rate > 0.0 ? total_pairs : 0;

  std::string out;
  out += "plan:\n";
  out += "  generations:            " + std::to_string(r.engine.generations) + "\n";
  out += "  pairs per generation:   " + std::to_string(pairs_per_gen) + "\n";
  out += "  byes per generation:    " + std::to_string(byes_per_gen) + "\n";
  out += "  calls per match (2 + 2(d+1) + 1): " + std::to_string(per_match) + "\n";
  out += "  init variation fills:   " + std::to_string(init_fills) + "\n";
  out += "  provider-call budget:   " + std::to_string(fixed) + " to " +
         std::to_string(fixed + mutation_max) + " (excluding retries)\n";
  return out;
}

inline void write_series_csv(const RunReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "generation,max_rating,mean_rating\n";
  for (std::size_t g = 0; g < report.generations.size(); ++g)
    out << (g + 1) << ',' << json(report.generations[g].max_rating).dump() << ','
        << json(report.generations[g].mean_rating).dump() << '\n';
}

inline void write_quality_csv(const SimReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "generation,max_quality,mean_quality\n";
  for (std::size_t g = 0; g < report.quality.size(); ++g)
    out << g << ',' << json(report.quality[g].max_quality).dump() << ','
        << json(report.quality[g].mean_quality).dump() << '\n';
}

// Post-run artifacts living next to the checkpoints: the top prompt text
// and the plot-ready rating series.
inline void finalize_run_outputs(const std::filesystem::path& run_dir) {
  RunArchive archive{run_dir};
  const Manifest manifest = archive.read_manifest();
  const RunReport report = Engine::build_report(archive);
  write_series_csv(report, run_dir / "rating_series.csv");
  const Population last = manifest.completed_generations == 0
                              ? manifest.initial_population
                              : archive.read_generation(manifest.completed_generations).population;
  if (!last.members.empty()) {
    std::ofstream best(run_dir / "best_prompt.txt", std::ios::trunc);
    best << top_candidate(last).text << '\n';
  }
}

inline std::string report_table(const RunReport& report) {
  std::string out = "generation    max_rating   mean_rating  best\n";
  char line[160];
  for (std::size_t g = 0; g < report.generations.size(); ++g) {
    const auto& row = report.generations[g];
    std::snprintf(line, sizeof line, "%10zu  %12.3f  %12.3f  %s\n", g + 1, row.max_rating,
                  row.mean_rating, row.best_id.c_str());
    out += line;
  }
  return out;
}

}  // namespace cli_detail

// ---------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------

inline CommandOutcome cmd_run(const std::filesystem::path& config_path,
                              const std::vector<std::string>& overrides, bool dry_run,
                              int stop_after = 0) {
  json raw = cli_detail::load_json_file(config_path, "config");
  std::set<std::string> flag_keys;
  for (const auto& o : overrides) {
    cli_detail::apply_override(raw, o);
    flag_keys.insert(o.substr(0, o.find('=')));
  }
  cli_detail::ResolvedRun r = cli_detail::resolve_run(raw, flag_keys);
  if (r.seeds.empty()) throw ConfigError("config field 'seeds': at least one seed prompt required");
  if (r.tasks_path.empty()) throw ConfigError("config field 'tasks.path': required for run");

  std::string summary = "effective configuration:\n" + json(r.engine).dump(2) + "\n";
  if (dry_run) {
    summary += cli_detail::dry_run_plan(r);
    summary += "dry run: no provider traffic\n";
    return {kExitOk, summary};
  }

  std::shared_ptr<Provider> provider = cli_detail::build_provider(r.provider_spec);
  TaskSet tasks = load_tasks(r.tasks_path);
  if (r.test_fraction > 0.0) tasks = split_tasks(std::move(tasks), r.test_fraction, r.split_seed);

  if (RunArchive::exists(r.run_dir))
    throw ConfigError("run_dir '" + r.run_dir.string() +
                      "' already holds a run; use the resume command or a fresh directory");

  json stored_spec = r.provider_spec;
  const RunReport report =
      run_llm(r.engine, r.seeds, std::move(tasks), provider, r.run_dir, nullptr, stop_after,
              std::move(stored_spec));
  cli_detail::finalize_run_outputs(r.run_dir);

  summary += "final top candidate: " + report.final_top_id + " (rating " +
             json(report.final_top_rating).dump() + ")\n";
  summary += "best prompt text: " + (r.run_dir / "best_prompt.txt").string() + "\n";
  summary += "report: " + (r.run_dir / "report.json").string() + "\n";
  return {kExitOk, summary};
}

inline CommandOutcome cmd_resume(const std::filesystem::path& run_dir) {
  if (!RunArchive::exists(run_dir))
    throw DataError("resume: no run archive at " + run_dir.string());
  RunArchive archive{run_dir};
  const Manifest manifest = archive.read_manifest();
  if (manifest.completed_generations >= manifest.config.generations) {
    return {kExitOk, "nothing to do: run already completed " +
                         std::to_string(manifest.completed_generations) + " of " +
                         std::to_string(manifest.config.generations) + " generations\n"};
  }
  if (manifest.mode == "sim") {
    resume_sim(run_dir);
  } else {
    if (manifest.provider_spec.is_null())
      throw DataError("resume: archive has no provider specification");
    std::shared_ptr<Provider> provider = cli_detail::build_provider(manifest.provider_spec);
    resume_llm(run_dir, provider);
  }
  cli_detail::finalize_run_outputs(run_dir);
  const RunReport report = archive.read_report();
  return {kExitOk, "resumed to generation " + std::to_string(manifest.config.generations) +
                       "; final top candidate: " + report.final_top_id + "\n"};
}

inline CommandOutcome cmd_report(const std::filesystem::path& run_dir,
                                 const std::filesystem::path& out_dir = ".") {
  if (!RunArchive::exists(run_dir))
    throw DataError("report: no run archive at " + run_dir.string());
  RunArchive archive{run_dir};
  const Manifest manifest = archive.read_manifest();  // validates format version
  const RunReport report = Engine::build_report(archive);

  std::string summary;
  summary += cli_detail::report_table(report);
  std::filesystem::create_directories(out_dir);
  cli_detail::write_series_csv(report, out_dir / "rating_series.csv");
  summary += "series: " + (out_dir / "rating_series.csv").string() + "\n";

  if (manifest.mode == "sim") {
    const SimReport sim = sim_report_from_archive(archive);
    cli_detail::write_quality_csv(sim, out_dir / "quality_series.csv");
    summary += "quality series: " + (out_dir / "quality_series.csv").string() + "\n";
    summary += "final tau (rating vs quality): " + json(sim.tau_final_population).dump() + "\n";
  }

  const auto scorecard_path = run_dir / "scorecard.json";
  if (std::filesystem::exists(scorecard_path)) {
    const json sc = RunArchive::read_json(scorecard_path);
    if (sc.contains("metrics") && sc["metrics"].is_object()) {
      summary += "metrics:\n";
      for (const auto& [name, value] : sc["metrics"].items())
        summary += "  " + name + ": " + value.dump() + "\n";
    }
    if (sc.contains("trials") && sc["trials"].is_array())
      summary += "trials recorded: " + std::to_string(sc["trials"].size()) + "\n";
    // per-generation metric curves, one column per named series
    if (sc.contains("series") && sc["series"].is_object() && !sc["series"].empty()) {
      std::ofstream out(out_dir / "metric_series.csv", std::ios::trunc);
      out << "generation";
      std::size_t rows = 0;
      for (const auto& [name, values] : sc["series"].items()) {
        out << ',' << name;
        rows = std::max(rows, values.size());
      }
      out << '\n';
      for (std::size_t g = 0; g < rows; ++g) {
        out << (g + 1);
        for (const auto& [name, values] : sc["series"].items())
          out << ',' << (g < values.size() ? values[g].dump() : "");
        out << '\n';
      }
      summary += "metric series: " + (out_dir / "metric_series.csv").string() + "\n";
    }
  }
  return {kExitOk, summary};
}

inline CommandOutcome cmd_simulate(const std::filesystem::path& config_path,
                                   const std::vector<std::string>& overrides) {
  json raw = cli_detail::load_json_file(config_path, "config");
  std::set<std::string> flag_keys;
  for (const auto& o : overrides) {
    cli_detail::apply_override(raw, o);
    flag_keys.insert(o.substr(0, o.find('=')));
  }
  cli_detail::ResolvedRun r = cli_detail::resolve_run(raw, flag_keys);
  if (!r.has_lab) throw ConfigError("config field 'lab': required for simulate");
  if (RunArchive::exists(r.run_dir))
    throw ConfigError("run_dir '" + r.run_dir.string() +
                      "' already holds a run; use a fresh directory");

  const SimReport report = run_sim(r.lab, r.engine, r.run_dir);
  RunArchive::write_json(r.run_dir / "sim_report.json", json(report));
  cli_detail::write_series_csv(report.engine_report, r.run_dir / "rating_series.csv");
  cli_detail::write_quality_csv(report, r.run_dir / "quality_series.csv");

  std::string summary = "simulation complete\n";
  summary += cli_detail::report_table(report.engine_report);
  summary += "final max quality: " + json(report.quality.back().max_quality).dump() + "\n";
  summary += "tau (rating vs quality, final population): " +
             json(report.tau_final_population).dump() + "\n";
  summary += "sim report: " + (r.run_dir / "sim_report.json").string() + "\n";
  return {kExitOk, summary};
}

}  // namespace pevo
