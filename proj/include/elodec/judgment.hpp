#pragma once

// Judgment phase: compare a freshly explored sequence against earlier ones,
// update the two leaf scores, and re-aggregate their ancestors bottom-up.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "elodec/budget.hpp"
#include "elodec/elo.hpp"
#include "elodec/environment.hpp"
#include "elodec/judges.hpp"
#include "elodec/random.hpp"
#include "elodec/tree.hpp"

namespace elodec {

struct JudgmentConfig {
  std::uint32_t comparisons_per_new_sequence = 1;
  // Only honoured for judges reporting is_deterministic_symmetric().
  bool single_trial = false;
};

struct JudgmentEvent {
  NodeId new_leaf{};
  NodeId opponent_leaf{};
  ComparisonOutcome outcome_for_new = ComparisonOutcome::draw();
  double new_elo_before = 0.0;
  double new_elo_after = 0.0;
  double opponent_elo_before = 0.0;
  double opponent_elo_after = 0.0;
  std::uint32_t judge_calls_consumed = 0;
};

struct JudgmentFailure {
  NodeId new_leaf{};
  NodeId opponent_leaf{};
  std::string message;
  std::uint32_t judge_calls_consumed = 0;
};

struct JudgmentOutcome {
  std::vector<JudgmentEvent> events;
  std::vector<JudgmentFailure> failures;
};

// Compares `new_leaf` against up to `comparisons_per_new_sequence` opponents
// drawn uniformly without replacement from all other leaves. A comparison is
// only started when the ledger can pay for all of its trials. Judge failures
// leave scores untouched and are reported in `failures`.
JudgmentOutcome judge_new_sequence(DecisionTree& tree, NodeId new_leaf, Judge& judge,
                                   const Environment& env, const JudgmentConfig& config,
                                   CallLedger& ledger, Rng& opponent_rng, Rng& judge_rng);

// Re-aggregates every stale ancestor of `from_leaf` (parent up to root) as the
// softmax-weighted mean of its children at the node's annealed temperature,
// bumping each recomputed node's update count. Returns how many nodes were
// recomputed; 0 when nothing below changed since the last call.
std::size_t propagate_up(DecisionTree& tree, NodeId from_leaf);

struct TournamentResult {
  std::vector<double> mean_rank;   // 1 = best; ties share the average rank
  std::vector<double> mean_score;  // summed outcomes per trial, averaged
  std::size_t flagged_pairings = 0;
};

// Round-robin double comparisons over `candidates`, repeated `trials` times
// with independent random streams. Throws std::invalid_argument for fewer than
// two candidates or zero trials. A judge failure scores that pairing 0.5 each
// and is counted in `flagged_pairings`.
TournamentResult ranking_tournament(std::span<const Candidate> candidates, Judge& judge,
                                    const TaskContext& context, std::uint32_t trials,
                                    std::uint64_t seed);

// Average (fractional) ranks of `scores`, highest score ranked 1.
std::vector<double> fractional_ranks_descending(std::span<const double> scores);

}  // namespace elodec
