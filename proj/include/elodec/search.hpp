#pragma once

// The explore / judge loop and the result type shared with the baseline
// searchers.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "elodec/budget.hpp"
#include "elodec/environment.hpp"
#include "elodec/exploration.hpp"
#include "elodec/judges.hpp"
#include "elodec/judgment.hpp"
#include "elodec/tree.hpp"

namespace elodec {

struct RoundRecord {
  std::uint32_t index = 0;
  std::vector<NodeId> walk;
  NodeId expanded_from{};
  NodeId new_leaf{};
  bool truncated = false;
  std::vector<JudgmentEvent> judgments;
  std::vector<JudgmentFailure> judge_failures;
};

struct SearchResult {
  SearchResult(std::string method_name, DecisionTree search_tree)
      : method(std::move(method_name)), tree(std::move(search_tree)) {}

  std::string method;
  DecisionTree tree;
  // Completed sequences in creation order (budget-truncated ones excluded).
  std::vector<DecisionSequence> sequences;
  std::optional<DecisionSequence> selected;
  // Multi-sequence baselines pass when any reported sequence succeeds; the
  // Elo search is judged on its selection alone.
  bool pass_on_any = false;
  bool truncated = false;
  LedgerSnapshot ledger;
  std::vector<RoundRecord> rounds;
  // Searcher decisions as short lines, e.g. "complete 7", "jump 2".
  std::vector<std::string> trace;
  std::vector<std::string> judge_errors;
};

enum class FinalSelection { kElo, kRandom };

struct EloSearchConfig {
  EloConfig elo;
  Budget budget;
  JudgmentConfig judgment;
  FinalSelection final_selection = FinalSelection::kElo;

  void validate() const;
};

// Alternates exploration and judgment for up to max_explorations rounds or
// until the call budget runs out, then picks the final sequence.
SearchResult run_elo_search(const Environment& env, ActionSampler& sampler, Judge& judge,
                            const EloSearchConfig& config, std::uint64_t seed);

// Leaves that ended on their own (terminal or at the step cap), oldest first.
std::vector<NodeId> completed_leaves(const DecisionTree& tree);

// Completed leaf with the largest score; the earliest created wins ties.
// Throws NotFound when no leaf has completed.
DecisionSequence select_optimum(const DecisionTree& tree);

// Uniformly random completed leaf. Throws NotFound when none has completed.
DecisionSequence select_random(const DecisionTree& tree, Rng& rng);

// First sequence whose last step finished the task, else the first one.
std::optional<std::size_t> first_finished_or_first(const DecisionTree& tree,
                                                   const std::vector<DecisionSequence>& sequences);

}  // namespace elodec
