#pragma once

// Top-down exploration: softmax selection over a node's extendable children
// plus a rejection choice, and rollout of a fresh sequence wherever the walk
// rejects.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "elodec/budget.hpp"
#include "elodec/elo.hpp"
#include "elodec/environment.hpp"
#include "elodec/random.hpp"
#include "elodec/tree.hpp"

namespace elodec {

// tau0 / (1 + sqrt(ln(M + 1))). Throws std::invalid_argument if tau0 <= 0.
double anneal_temperature(std::uint64_t update_count, double tau0);

struct SelectionEntry {
  std::optional<NodeId> choice;  // std::nullopt is the rejection choice
  double probability = 0.0;
};

// Children first in the given order, rejection last.
struct SelectionDistribution {
  std::vector<SelectionEntry> entries;

  double rejection_probability() const { return entries.back().probability; }
};

SelectionDistribution selection_distribution(std::span<const std::pair<NodeId, double>> children,
                                             double rejection_score, double tau);

std::optional<NodeId> sample_choice(const SelectionDistribution& distribution, Rng& rng);

struct ExplorationPolicy {
  EloConfig config;
  std::uint32_t max_steps = 12;

  void validate() const;
};

// A node can still grow: not terminal and above the step cap.
bool is_extendable(const DecisionTree& tree, NodeId id, std::uint32_t max_steps);

// Takes one environment step from `from` and attaches the child. Returns
// std::nullopt when the ledger is exhausted.
std::optional<NodeId> expand_one(DecisionTree& tree, NodeId from, const Environment& env,
                                 ActionSampler& sampler, CallLedger& ledger, Rng& rng);

struct RolloutResult {
  NodeId leaf{};
  bool truncated = false;  // ran out of budget before terminal / step cap
};

// Rolls out from `from` until a terminal state, the step cap, or budget
// exhaustion, then attaches the whole path. Returns std::nullopt when not a
// single step could be paid for. With `diversify` the sampler is told which
// actions already leave `from`; independent rollouts switch it off.
std::optional<RolloutResult> rollout(DecisionTree& tree, NodeId from, const Environment& env,
                                     ActionSampler& sampler, std::uint32_t max_steps,
                                     CallLedger& ledger, Rng& rng, bool diversify = true);

struct ExplorationResult {
  DecisionSequence sequence;
  NodeId expanded_from{};
  std::vector<NodeId> walk;  // nodes descended through, root first
  bool truncated = false;
};

// One exploration round: descends from the root by sampling the selection
// distribution of each visited node at its annealed temperature, and rolls
// out a new sequence at the first rejection. Terminal and capped children are
// never descended into. Returns std::nullopt if the ledger cannot pay for a
// single step.
std::optional<ExplorationResult> explore_once(DecisionTree& tree, const Environment& env,
                                              ActionSampler& sampler,
                                              const ExplorationPolicy& policy,
                                              CallLedger& ledger, Rng& selection_rng,
                                              Rng& sampler_rng);

}  // namespace elodec
