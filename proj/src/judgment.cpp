#include "elodec/judgment.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "elodec/errors.hpp"
#include "elodec/exploration.hpp"

namespace elodec {

JudgmentOutcome judge_new_sequence(DecisionTree& tree, NodeId new_leaf, Judge& judge,
                                   const Environment& env, const JudgmentConfig& config,
                                   CallLedger& ledger, Rng& opponent_rng, Rng& judge_rng) {
  if (!tree.node(new_leaf).is_leaf()) throw std::invalid_argument("new sequence must end in a leaf");
  JudgmentOutcome out;

  std::vector<NodeId> pool = tree.leaves();
  pool.erase(std::remove(pool.begin(), pool.end(), new_leaf), pool.end());
  if (pool.empty()) return out;

  const TaskContext context = env.task_context();
  const Candidate fresh = make_candidate(tree.trail(tree.sequence_of(new_leaf)), env);
  const std::uint32_t trial_cost =
      config.single_trial && judge.is_deterministic_symmetric() ? 1 : 2;
  const std::size_t rounds =
      std::min<std::size_t>(config.comparisons_per_new_sequence, pool.size());

  for (std::size_t i = 0; i < rounds; ++i) {
    if (!ledger.can_afford(trial_cost)) break;
    // Partial Fisher-Yates: opponents without replacement.
    const std::size_t pick = i + uniform_index(opponent_rng, pool.size() - i);
    std::swap(pool[i], pool[pick]);
    const NodeId opponent = pool[i];
    const Candidate other = make_candidate(tree.trail(tree.sequence_of(opponent)), env);

    std::uint32_t spent = 0;
    PairwiseResult result;
    try {
      result = double_compare(judge, context, fresh, other, judge_rng, &ledger,
                              config.single_trial, &spent);
    } catch (const JudgeError& e) {
      out.failures.push_back({new_leaf, opponent, e.what(), spent});
      continue;
    }

    JudgmentEvent event;
    event.new_leaf = new_leaf;
    event.opponent_leaf = opponent;
    event.outcome_for_new = result.outcome_for_a;
    event.new_elo_before = tree.node(new_leaf).elo_score;
    event.opponent_elo_before = tree.node(opponent).elo_score;
    const auto [fresh_after, other_after] = update_pair(
        event.new_elo_before, event.opponent_elo_before, result.outcome_for_a, tree.config());
    event.new_elo_after = fresh_after;
    event.opponent_elo_after = other_after;
    event.judge_calls_consumed = result.calls;

    tree.set_elo(new_leaf, fresh_after);
    tree.set_elo(opponent, other_after);
    tree.increment_update_count(new_leaf);
    tree.increment_update_count(opponent);
    propagate_up(tree, new_leaf);
    propagate_up(tree, opponent);
    out.events.push_back(event);
  }
  return out;
}

std::size_t propagate_up(DecisionTree& tree, NodeId from_leaf) {
  const double tau0 = tree.config().default_temperature_tau0;
  std::size_t recomputed = 0;
  for (std::optional<NodeId> cur = tree.node(from_leaf).parent; cur; cur = tree.node(*cur).parent) {
    const DecisionNode& node = tree.node(*cur);
    if (!node.stale) continue;
    std::vector<double> scores;
    scores.reserve(node.children.size());
    for (NodeId c : node.children) scores.push_back(tree.node(c).elo_score);
    const double tau = anneal_temperature(node.update_count, tau0);
    const NodeId id = *cur;
    tree.set_elo(id, aggregate_children_elo(scores, tau));
    tree.increment_update_count(id);
    tree.clear_stale(id);
    ++recomputed;
  }
  return recomputed;
}

std::vector<double> fractional_ranks_descending(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return scores[x] > scores[y]; });
  std::vector<double> ranks(scores.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

TournamentResult ranking_tournament(std::span<const Candidate> candidates, Judge& judge,
                                    const TaskContext& context, std::uint32_t trials,
                                    std::uint64_t seed) {
  if (candidates.size() < 2) throw std::invalid_argument("a tournament needs two candidates");
  if (trials == 0) throw std::invalid_argument("a tournament needs at least one trial");
  const std::size_t n = candidates.size();
  TournamentResult result;
  result.mean_rank.assign(n, 0.0);
  result.mean_score.assign(n, 0.0);

  for (std::uint32_t t = 0; t < trials; ++t) {
    Rng rng = make_stream(seed, Stream::kTournament, t);
    std::vector<double> score(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double for_i = 0.5;
        try {
          for_i = double_compare(judge, context, candidates[i], candidates[j], rng, nullptr, false)
                      .outcome_for_a.value();
        } catch (const JudgeError&) {
          ++result.flagged_pairings;
        }
        score[i] += for_i;
        score[j] += 1.0 - for_i;
      }
    }
    const std::vector<double> ranks = fractional_ranks_descending(score);
    for (std::size_t i = 0; i < n; ++i) {
      result.mean_rank[i] += ranks[i] / trials;
      result.mean_score[i] += score[i] / trials;
    }
  }
  return result;
}

}  // namespace elodec
