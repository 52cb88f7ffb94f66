// Copyright 2026 the pevo authors
// SPDX-License-Identifier: Apache-2.0
//
// Task ingestion and sampling. Gold labels ride along for post-hoc
// scoring only; the optimization path sees TaskView, which has no gold
// member at all.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pevo/errors.hpp"
#include "pevo/rng.hpp"

namespace pevo {

enum class TaskSplit { train, test };

struct TaskInstance {
  std::string id;
  std::string input_text;
  std::optional<std::string> gold;
  TaskSplit split = TaskSplit::train;
};

// Gold-stripped view handed to the arena/variation/engine path.
struct TaskView {
  std::string id;
  std::string input_text;
};

inline TaskView view_of(const TaskInstance& t) { return TaskView{t.id, t.input_text}; }

struct TaskSet {
  std::string name;
  std::vector<TaskInstance> instances;

  std::vector<std::size_t> train_indices() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < instances.size(); ++i)
      if (instances[i].split == TaskSplit::train) idx.push_back(i);
    return idx;
  }
};

// One JSON object per line: {"id"?, "input", "gold"?}. Missing ids are
// assigned sequentially; everything loads as train until split is applied.
inline TaskSet load_tasks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("load_tasks: cannot open " + path.string());
  TaskSet ts;
  ts.name = path.stem().string();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("load_tasks: malformed record at line " + std::to_string(line_no) +
                      ": " + e.what());
    }
    if (!j.is_object() || !j.contains("input") || !j["input"].is_string())
      throw DataError("load_tasks: malformed record at line " + std::to_string(line_no) +
                      ": expected object with string field 'input'");
    TaskInstance t;
    t.input_text = j["input"].get<std::string>();
    if (t.input_text.empty())
      throw DataError("load_tasks: malformed record at line " + std::to_string(line_no) +
                      ": 'input' must be non-empty");
    if (j.contains("id"))
      t.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
    else
      t.id = "task-" + std::to_string(line_no);
    if (j.contains("gold") && !j["gold"].is_null()) {
      t.gold = j["gold"].is_string() ? j["gold"].get<std::string>() : j["gold"].dump();
    }
    ts.instances.push_back(std::move(t));
  }
  if (ts.instances.empty()) throw DataError("load_tasks: no records in " + path.string());
  for (std::size_t i = 0; i < ts.instances.size(); ++i)
    for (std::size_t k = i + 1; k < ts.instances.size(); ++k)
      if (ts.instances[i].id == ts.instances[k].id)
        throw DataError("load_tasks: duplicate task id '" + ts.instances[i].id + "'");
  return ts;
}

// Seeded shuffle, then ceil(fraction * count) instances become test.
inline TaskSet split_tasks(TaskSet ts, double test_fraction, std::uint64_t seed) {
  if (ts.instances.size() < 2)
    throw InvalidArgument("split_tasks: at least 2 instances required");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw InvalidArgument("split_tasks: test_fraction must be in (0, 1)");
  const auto count = ts.instances.size();
  const auto test_count = static_cast<std::size_t>(
      std::ceil(test_fraction * static_cast<double>(count)));
  if (test_count == 0 || test_count >= count)
    throw InvalidArgument("split_tasks: fraction leaves an empty split");
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  for (std::size_t i = 0; i < count; ++i)
    ts.instances[order[i]].split = i < test_count ? TaskSplit::test : TaskSplit::train;
  return ts;
}

// Uniform with replacement over the train split; fully determined by
// (rng_seed, draw_index), independent of any other draws.
inline const TaskInstance& sample_train(const TaskSet& ts, std::uint64_t rng_seed,
                                        std::uint64_t draw_index) {
  const auto train = ts.train_indices();
  if (train.empty()) throw InvalidState("sample_train: train split is empty");
  Rng rng(splitmix64(rng_seed ^ splitmix64(draw_index + 0x51ED270B8A9C6B15ull)));
  return ts.instances[train[rng.below(train.size())]];
}

inline TaskView sample_train_view(const TaskSet& ts, std::uint64_t rng_seed,
                                  std::uint64_t draw_index) {
  return view_of(sample_train(ts, rng_seed, draw_index));
}

}  // namespace pevo
