// Copyright 2026 the pevo authors
// SPDX-License-Identifier: Apache-2.0
//
// Post-hoc evaluation: accuracy, binary F1, the position-swapped
// pairwise winrate protocol, and the point-biserial correlation between
// ratings and correctness. Nothing here feeds back into optimization.

#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pevo/errors.hpp"
#include "pevo/gateway.hpp"
#include "pevo/rating.hpp"
#include "pevo/rng.hpp"
#include "pevo/variation.hpp"

namespace pevo {

struct LabeledPrediction {
  std::string task_id;
  std::string predicted;
  std::string gold;
};

inline std::string normalize_label(std::string_view s) {
  std::string t = trim_copy(s);
  for (auto& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return t;
}

inline double accuracy(const std::vector<LabeledPrediction>& preds) {
  if (preds.empty()) throw InvalidArgument("accuracy: empty prediction list");
  std::size_t hits = 0;
  for (const auto& p : preds)
    if (normalize_label(p.predicted) == normalize_label(p.gold)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

struct F1Breakdown {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long junk_predictions = 0;  // predictions outside the binary label set
};

// 2TP / (2TP + FP + FN), zero when the denominator vanishes. A prediction
// outside the binary label set counts as the non-gold class (always
// wrong) and is tallied rather than aborting the scoring.
inline double f1_binary(const std::vector<LabeledPrediction>& preds,
                        const std::string& positive_label, F1Breakdown* breakdown = nullptr) {
  if (preds.empty()) throw InvalidArgument("f1_binary: empty prediction list");
  const std::string pos = normalize_label(positive_label);
  std::optional<std::string> neg;
  for (const auto& p : preds) {
    const std::string g = normalize_label(p.gold);
    if (g == pos) continue;
    if (!neg) neg = g;
    else if (*neg != g)
      throw InvalidArgument("f1_binary: gold labels are not binary ('" + *neg + "' vs '" + g +
                            "')");
  }
  F1Breakdown acc;
  for (const auto& p : preds) {
    const bool gold_pos = normalize_label(p.gold) == pos;
    const std::string pr = normalize_label(p.predicted);
    bool pred_pos;
    if (pr == pos) {
      pred_pos = true;
    } else if (neg && pr == *neg) {
      pred_pos = false;
    } else {
      ++acc.junk_predictions;
      pred_pos = !gold_pos;  // junk lands on the non-gold class
    }
    if (pred_pos && gold_pos) ++acc.tp;
    else if (pred_pos && !gold_pos) ++acc.fp;
    else if (!pred_pos && gold_pos) ++acc.fn;
  }
  if (breakdown) *breakdown = acc;
  const double denom = 2.0 * acc.tp + acc.fp + acc.fn;
  return denom == 0.0 ? 0.0 : 2.0 * acc.tp / denom;
}

// ---------------------------------------------------------------------
// Winrate protocol
// ---------------------------------------------------------------------

struct WinrateTrial {
  int trial_index = 0;
  std::size_t task_index = 0;
  Side candidate_position = Side::a;
  Side judge_verdict = Side::a;
  bool candidate_won = false;
};

struct WinrateExclusion {
  int trial_index = 0;
  std::string reason;
};

struct WinrateResult {
  double winrate = 0.0;
  int wins = 0;
  int valid_trials = 0;
  std::vector<WinrateTrial> trials;
  std::vector<WinrateExclusion> excluded;
};

struct WinrateOptions {
  // Pairwise judge template; placeholders {task}, {output_a}, {output_b}.
  // Supply a template file to use an external judge prompt verbatim.
  std::string judge_template =
      "You are comparing two responses to the same task.\n\nTASK:\n{task}\n\n"
      "Output A:\n{output_a}\n\nOutput B:\n{output_b}\n\n"
      "Decide which output is better overall. You must pick exactly one. "
      "Declare it with exactly one of the markers <winner>A</winner> or <winner>B</winner>.";
  std::vector<std::string> task_texts;  // aligned with the output lists; may be empty
  double judge_temperature = 0.0;
  int max_output_tokens = 4096;
  int judge_retries = 1;  // one retry, then the trial is excluded
};

namespace detail {

inline void replace_all(std::string& s, std::string_view what, std::string_view with) {
  std::size_t pos = 0;
  while ((pos = s.find(what, pos)) != std::string::npos) {
    s.replace(pos, what.size(), with);
    pos += with.size();
  }
}

inline bool parse_winner_marker(const std::string& text, Side& out) {
  const bool has_a = text.find("<winner>A</winner>") != std::string::npos;
  const bool has_b = text.find("<winner>B</winner>") != std::string::npos;
  if (has_a == has_b) return false;
  out = has_a ? Side::a : Side::b;
  return true;
}

}  // namespace detail

// Pairwise judging with positions swapped across half the trials: task
// indices are sampled with replacement, and the candidate occupies
// position A on even trials and position B on odd trials, so any even
// trial count splits positions exactly in half.
inline WinrateResult winrate_protocol(const std::vector<std::string>& candidate_outputs,
                                      const std::vector<std::string>& opponent_outputs,
                                      int trials, Provider& judge_provider,
                                      std::uint64_t rng_seed, const WinrateOptions& opts = {}) {
  if (candidate_outputs.empty() || candidate_outputs.size() != opponent_outputs.size())
    throw InvalidArgument("winrate_protocol: output lists must be aligned and non-empty");
  if (trials <= 0 || trials % 2 != 0)
    throw InvalidArgument("winrate_protocol: trial count must be even and positive");
  if (!opts.task_texts.empty() && opts.task_texts.size() != candidate_outputs.size())
    throw InvalidArgument("winrate_protocol: task_texts must align with the output lists");

  Rng rng(rng_seed);
  WinrateResult result;
  for (int trial = 0; trial < trials; ++trial) {
    const std::size_t task_index = rng.below(candidate_outputs.size());
    const bool candidate_at_a = trial % 2 == 0;
    const std::string& out_a =
        candidate_at_a ? candidate_outputs[task_index] : opponent_outputs[task_index];
    const std::string& out_b =
        candidate_at_a ? opponent_outputs[task_index] : candidate_outputs[task_index];

    std::string prompt = opts.judge_template;
    detail::replace_all(prompt, "{task}",
                        opts.task_texts.empty() ? std::string() : opts.task_texts[task_index]);
    detail::replace_all(prompt, "{output_a}", out_a);
    detail::replace_all(prompt, "{output_b}", out_b);

    CompletionRequest req;
    req.user_text = prompt;
    req.temperature = opts.judge_temperature;
    req.max_output_tokens = opts.max_output_tokens;
    req.call_tag = CallTag::judge;

    bool decided = false;
    Side verdict = Side::a;
    for (int attempt = 0; attempt <= opts.judge_retries && !decided; ++attempt)
      decided = detail::parse_winner_marker(judge_provider.complete(req).text, verdict);
    if (!decided) {
      result.excluded.push_back({trial, "unparseable judge verdict"});
      continue;
    }
    WinrateTrial t;
    t.trial_index = trial;
    t.task_index = task_index;
    t.candidate_position = candidate_at_a ? Side::a : Side::b;
    t.judge_verdict = verdict;
    t.candidate_won = verdict == t.candidate_position;
    if (t.candidate_won) ++result.wins;
    ++result.valid_trials;
    result.trials.push_back(t);
  }
  if (result.valid_trials == 0)
    throw DataError("winrate_protocol: every trial was excluded");
  result.winrate = static_cast<double>(result.wins) / result.valid_trials;
  return result;
}

// Point-biserial correlation: (M1 - M0) / s_n * sqrt(p q) with the
// population standard deviation.
inline double point_biserial(const std::vector<double>& ratings,
                             const std::vector<int>& correct) {
  if (ratings.size() != correct.size() || ratings.size() < 2)
    throw InvalidArgument("point_biserial: need equal-length inputs with >= 2 entries");
  double sum = 0.0;
  long positives = 0;
  for (std::size_t i = 0; i < ratings.size(); ++i) {
    sum += ratings[i];
    if (correct[i] != 0) ++positives;
  }
  const auto n = static_cast<double>(ratings.size());
  if (positives == 0 || positives == static_cast<long>(ratings.size()))
    throw InvalidArgument("point_biserial: both outcome classes must be present");
  const double mean = sum / n;
  double var = 0.0, sum1 = 0.0, sum0 = 0.0;
  for (std::size_t i = 0; i < ratings.size(); ++i) {
    var += (ratings[i] - mean) * (ratings[i] - mean);
    (correct[i] != 0 ? sum1 : sum0) += ratings[i];
  }
  var /= n;
  if (var == 0.0) throw InvalidArgument("point_biserial: ratings have zero variance");
  const double p = positives / n;
  const double m1 = sum1 / positives;
  const double m0 = sum0 / (n - positives);
  return (m1 - m0) / std::sqrt(var) * std::sqrt(p * (1.0 - p));
}

}  // namespace pevo
