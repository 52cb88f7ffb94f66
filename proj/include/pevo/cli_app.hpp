// Copyright 2026 the pevo authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pevo/cli.hpp"

namespace pevo {

// Full argument surface; returns the process exit code. Streams are
// injectable so tests can run commands in-process.
inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"evolutionary prompt optimization with debate verdicts and Elo selection",
               "pevo"};
  app.require_subcommand(1);

  std::string config_path;
  std::string run_dir;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
  bool dry_run = false;
  int stop_after = 0;

  auto* run = app.add_subcommand("run", "launch an optimization run");
  run->add_option("config", config_path, "config file (JSON)")->required();
  run->add_option("--set", overrides, "override a config field, dotted path (key=value)");
  run->add_flag("--dry-run", dry_run, "validate config and print the plan; no provider traffic");
  run->add_option("--stop-after", stop_after, "halt after this many generations (resumable)");

  auto* resume = app.add_subcommand("resume", "continue a run from its last checkpoint");
  resume->add_option("run_dir", run_dir, "run directory")->required();

  auto* report = app.add_subcommand("report", "render tables and series for a run");
  report->add_option("run_dir", run_dir, "run directory")->required();
  report->add_option("--out", out_dir, "directory for series files (default: .)");

  auto* simulate = app.add_subcommand("simulate", "run the provider-free simulation lab");
  simulate->add_option("config", config_path, "config file (JSON)")->required();
  simulate->add_option("--set", overrides, "override a config field, dotted path (key=value)");

  std::vector<const char*> argv;
  argv.push_back("pevo");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    CommandOutcome outcome;
    if (*run) outcome = cmd_run(config_path, overrides, dry_run, stop_after);
    else if (*resume) outcome = cmd_resume(run_dir);
    else if (*report) outcome = cmd_report(run_dir, out_dir);
    else outcome = cmd_simulate(config_path, overrides);
    out << outcome.summary;
    return outcome.exit_code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.error_class());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace pevo
