// Copyright 2026 the pevo authors
// SPDX-License-Identifier: Apache-2.0
//
// Population bookkeeping: candidate identity, aging, random pairing,
// and the quota-based generational selection.

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <iterator>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pevo/errors.hpp"
#include "pevo/gateway.hpp"
#include "pevo/rating.hpp"
#include "pevo/rng.hpp"
#include "pevo/variation.hpp"

namespace pevo {

struct Lineage {
  std::string parent_winner_id;
  std::string parent_loser_id;
  bool mutated = false;
  int created_generation = 0;
};

struct Candidate {
  std::string id;
  std::string text;
  Rating rating{kBaseRating};
  int age = 0;
  std::optional<Lineage> lineage;
};

struct Population {
  std::vector<Candidate> members;
  int generation_index = 0;
};

struct Pairing {
  // Unordered pairs with a fixed side assignment: first = side A.
  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<std::string> byes;
};

// Zero-padded sequential ids; lexicographic order equals creation order.
class IdAllocator {
 public:
  explicit IdAllocator(std::uint64_t start = 0) : next_(start) {}

  std::string next() {
    char buf[24];
    std::snprintf(buf, sizeof buf, "p%06llu",
                  static_cast<unsigned long long>(next_++));
    return buf;
  }

  std::uint64_t counter() const { return next_; }

 private:
  std::uint64_t next_;
};

// Ranking used everywhere a candidate order is needed: rating descending,
// then younger first, then id ascending.
inline bool ranks_before(const Candidate& x, const Candidate& y) {
  if (x.rating.value != y.rating.value) return x.rating.value > y.rating.value;
  if (x.age != y.age) return x.age < y.age;
  return x.id < y.id;
}

// Builds the generation-0 population: every candidate starts at the base
// rating with age 0. A seed shortfall is filled with prompt variations,
// targets cycling round-robin over the seed list; a seed surplus is
// truncated in input order.
inline Population init_population(const std::vector<std::string>& seed_prompts, int n,
                                  Provider& variation_source,
                                  [[maybe_unused]] std::uint64_t rng_seed,
                                  IdAllocator& ids,
                                  const VariationOptions& opts = {}) {
  if (seed_prompts.empty()) throw InvalidArgument("init_population: seed list is empty");
  if (n < 2) throw InvalidArgument("init_population: population size must be >= 2");
  for (const auto& s : seed_prompts)
    if (s.empty()) throw InvalidArgument("init_population: seed prompt must be non-empty");

  Population pop;
  pop.generation_index = 0;
  const auto take = std::min<std::size_t>(seed_prompts.size(), static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < take; ++i)
    pop.members.push_back(Candidate{ids.next(), seed_prompts[i], Rating{kBaseRating}, 0, std::nullopt});
  std::size_t target = 0;
  while (pop.members.size() < static_cast<std::size_t>(n)) {
    const std::string& seed_text = seed_prompts[target % seed_prompts.size()];
    ++target;
    std::string varied;
    try {
      varied = vary_seed(seed_text, variation_source, opts);
    } catch (const ProviderError& e) {
      throw ProviderError(std::string("init_population: variation fill failed: ") + e.what());
    }
    pop.members.push_back(Candidate{ids.next(), varied, Rating{kBaseRating}, 0, std::nullopt});
  }
  return pop;
}

// Seeded shuffle then adjacent grouping; the last shuffled member sits out
// when the count is odd.
inline Pairing pair_random(const Population& pop, std::uint64_t rng_seed) {
  if (pop.members.empty()) throw InvalidState("pair_random: population is empty");
  std::vector<std::size_t> order(pop.members.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(rng_seed);
  rng.shuffle(order);
  Pairing out;
  const std::size_t paired = order.size() - (order.size() % 2);
  for (std::size_t i = 0; i < paired; i += 2)
    out.pairs.emplace_back(pop.members[order[i]].id, pop.members[order[i + 1]].id);
  if (order.size() % 2 == 1) out.byes.push_back(pop.members[order.back()].id);
  return out;
}

inline Population age_all(Population pop) {
  for (auto& c : pop.members) ++c.age;
  return pop;
}

// Quota selection: the top min(n_new, |offspring|) offspring enter first,
// then the union of veterans and unselected offspring fills the rest by
// rating. A pool smaller than n admits everyone and records a warning.
inline Population select_next_generation(std::vector<Candidate> veterans,
                                         std::vector<Candidate> offspring, int n, int n_new,
                                         int generation_index,
                                         std::vector<std::string>* warnings = nullptr) {
  if (n_new > n) throw InvalidArgument("select_next_generation: n_new must be <= n");
  if (n_new < 0 || n < 1) throw InvalidArgument("select_next_generation: bad quota arguments");

  std::sort(offspring.begin(), offspring.end(), ranks_before);
  const auto quota = std::min<std::size_t>(static_cast<std::size_t>(n_new), offspring.size());

  Population next;
  next.generation_index = generation_index;
  next.members.assign(offspring.begin(), offspring.begin() + quota);

  std::vector<Candidate> rest(std::move(veterans));
  rest.insert(rest.end(), std::make_move_iterator(offspring.begin() + quota),
              std::make_move_iterator(offspring.end()));
  std::sort(rest.begin(), rest.end(), ranks_before);
  for (auto& c : rest) {
    if (next.members.size() >= static_cast<std::size_t>(n)) break;
    next.members.push_back(std::move(c));
  }
  if (next.members.size() < static_cast<std::size_t>(n) && warnings)
    warnings->push_back("selection pool smaller than n: kept " +
                        std::to_string(next.members.size()) + " of " + std::to_string(n));
  return next;
}

inline const Candidate& top_candidate(const Population& pop) {
  if (pop.members.empty()) throw InvalidState("top_candidate: population is empty");
  const Candidate* best = &pop.members.front();
  for (const auto& c : pop.members)
    if (ranks_before(c, *best)) best = &c;
  return *best;
}

}  // namespace pevo
