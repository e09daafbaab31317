#include "elodec/search.hpp"

#include <stdexcept>

#include "elodec/errors.hpp"

namespace elodec {

void EloSearchConfig::validate() const {
  elo.validate();
  budget.validate();
}

std::vector<NodeId> completed_leaves(const DecisionTree& tree) {
  std::vector<NodeId> out;
  for (NodeId leaf : tree.leaves()) {
    if (!tree.node(leaf).truncated) out.push_back(leaf);
  }
  return out;
}

DecisionSequence select_optimum(const DecisionTree& tree) {
  const std::vector<NodeId> leaves = completed_leaves(tree);
  if (leaves.empty()) throw NotFound("no completed sequence to select");
  NodeId best = leaves.front();
  for (NodeId leaf : leaves) {
    if (tree.node(leaf).elo_score > tree.node(best).elo_score) best = leaf;
  }
  return tree.sequence_of(best);
}

DecisionSequence select_random(const DecisionTree& tree, Rng& rng) {
  const std::vector<NodeId> leaves = completed_leaves(tree);
  if (leaves.empty()) throw NotFound("no completed sequence to select");
  return tree.sequence_of(leaves[uniform_index(rng, leaves.size())]);
}

std::optional<std::size_t> first_finished_or_first(const DecisionTree& tree,
                                                   const std::vector<DecisionSequence>& sequences) {
  if (sequences.empty()) return std::nullopt;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    if (tree.node(sequences[i].leaf).finished_successfully) return i;
  }
  return 0;
}

SearchResult run_elo_search(const Environment& env, ActionSampler& sampler, Judge& judge,
                            const EloSearchConfig& config, std::uint64_t seed) {
  config.validate();
  SearchResult result(config.final_selection == FinalSelection::kElo ? "elo" : "elo-rand",
                      DecisionTree(env.initial_state(), config.elo));
  DecisionTree& tree = result.tree;
  CallLedger ledger(config.budget.max_calls);
  const ExplorationPolicy policy{config.elo, config.budget.max_steps_per_sequence};

  Rng selection_rng = make_stream(seed, Stream::kSelection);
  Rng sampler_rng = make_stream(seed, Stream::kSampler);
  Rng opponent_rng = make_stream(seed, Stream::kOpponent);
  Rng judge_rng = make_stream(seed, Stream::kJudge);

  for (std::uint32_t round = 0; round < config.budget.max_explorations; ++round) {
    const auto explored = explore_once(tree, env, sampler, policy, ledger, selection_rng, sampler_rng);
    if (!explored) break;
    RoundRecord record;
    record.index = round;
    record.walk = explored->walk;
    record.expanded_from = explored->expanded_from;
    record.new_leaf = explored->sequence.leaf;
    record.truncated = explored->truncated;
    if (!explored->truncated) {
      JudgmentOutcome judged = judge_new_sequence(tree, explored->sequence.leaf, judge, env,
                                                  config.judgment, ledger, opponent_rng, judge_rng);
      record.judgments = std::move(judged.events);
      record.judge_failures = std::move(judged.failures);
      for (const JudgmentFailure& f : record.judge_failures) result.judge_errors.push_back(f.message);
    }
    result.truncated = result.truncated || explored->truncated;
    result.rounds.push_back(std::move(record));
    if (explored->truncated) break;
  }

  for (NodeId leaf : completed_leaves(tree)) result.sequences.push_back(tree.sequence_of(leaf));
  if (!result.sequences.empty()) {
    if (config.final_selection == FinalSelection::kElo) {
      result.selected = select_optimum(tree);
    } else {
      Rng pick = make_stream(seed, Stream::kFinalSelection);
      result.selected = select_random(tree, pick);
    }
  }
  result.ledger = ledger.snapshot();
  return result;
}

}  // namespace elodec
