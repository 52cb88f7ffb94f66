// Copyright 2026 the pevo authors
// SPDX-License-Identifier: Apache-2.0
//
// Elo arithmetic: logistic expected score on the base-10 / 400-point
// scale and the zero-sum K-step update. No clamps, no floors.

#pragma once

#include <cmath>
#include <utility>

#include "pevo/errors.hpp"

namespace pevo {

struct Rating {
  double value = 1000.0;
};

inline constexpr double kBaseRating = 1000.0;

struct KFactor {
  double value = 32.0;
};

enum class Side { a, b };

inline const char* to_string(Side s) { return s == Side::a ? "A" : "B"; }

// Win probability of `a` against `b`: 1 / (1 + 10^((r_b - r_a)/400)).
inline double expected_score(Rating a, Rating b) {
  if (!std::isfinite(a.value) || !std::isfinite(b.value))
    throw InvalidArgument("expected_score: rating must be finite");
  return 1.0 / (1.0 + std::pow(10.0, (b.value - a.value) / 400.0));
}

// Post-match ratings. Zero-sum: the winner gains exactly what the loser
// sheds, K * (1 - expected).
inline std::pair<Rating, Rating> update(Rating a, Rating b, Side winner, KFactor k) {
  if (!std::isfinite(a.value) || !std::isfinite(b.value))
    throw InvalidArgument("update: rating must be finite");
  if (!(k.value > 0.0)) throw InvalidArgument("update: k_factor must be positive");
  const double e_a = expected_score(a, b);
  const double e_b = 1.0 - e_a;
  const double s_a = winner == Side::a ? 1.0 : 0.0;
  const double s_b = 1.0 - s_a;
  return {Rating{a.value + k.value * (s_a - e_a)},
          Rating{b.value + k.value * (s_b - e_b)}};
}

}  // namespace pevo
