#include "elodec/exploration.hpp"

#include <cmath>
#include <stdexcept>

namespace elodec {

double anneal_temperature(std::uint64_t update_count, double tau0) {
  if (!(tau0 > 0.0) || !std::isfinite(tau0)) {
    throw std::invalid_argument("tau0 must be positive");
  }
  return tau0 / (1.0 + std::sqrt(std::log(static_cast<double>(update_count) + 1.0)));
}

SelectionDistribution selection_distribution(std::span<const std::pair<NodeId, double>> children,
                                             double rejection_score, double tau) {
  std::vector<double> scores;
  scores.reserve(children.size() + 1);
  for (const auto& [id, score] : children) scores.push_back(score);
  scores.push_back(rejection_score);
  const std::vector<double> probs = softmax(scores, tau);

  SelectionDistribution out;
  out.entries.reserve(probs.size());
  for (std::size_t i = 0; i < children.size(); ++i) {
    out.entries.push_back({children[i].first, probs[i]});
  }
  out.entries.push_back({std::nullopt, probs.back()});
  return out;
}

std::optional<NodeId> sample_choice(const SelectionDistribution& distribution, Rng& rng) {
  const double u = uniform01(rng);
  double cumulative = 0.0;
  for (const SelectionEntry& e : distribution.entries) {
    cumulative += e.probability;
    if (u < cumulative) return e.choice;
  }
  // u landed in the rounding slack above the final cumulative sum.
  return distribution.entries.back().choice;
}

void ExplorationPolicy::validate() const {
  config.validate();
  if (max_steps == 0) throw std::invalid_argument("max_steps must be at least 1");
}

bool is_extendable(const DecisionTree& tree, NodeId id, std::uint32_t max_steps) {
  const DecisionNode& n = tree.node(id);
  return !n.state.is_terminal && n.depth < max_steps;
}

namespace {

std::vector<Action> child_actions(const DecisionTree& tree, NodeId id) {
  std::vector<Action> out;
  for (NodeId c : tree.node(id).children) out.push_back(*tree.node(c).incoming_action);
  return out;
}

}  // namespace

std::optional<NodeId> expand_one(DecisionTree& tree, NodeId from, const Environment& env,
                                 ActionSampler& sampler, CallLedger& ledger, Rng& rng) {
  if (!ledger.consume(CallKind::kEnvironmentStep)) return std::nullopt;
  const State state = tree.node(from).state;
  const Trail history = tree.trail_to(from);
  const std::vector<Action> tried = child_actions(tree, from);
  const Action action = sampler.propose(state, history, tried, rng);
  const PathStep step = env.step(state, action);
  return tree.append_path(from, std::span<const PathStep>(&step, 1));
}

std::optional<RolloutResult> rollout(DecisionTree& tree, NodeId from, const Environment& env,
                                     ActionSampler& sampler, std::uint32_t max_steps,
                                     CallLedger& ledger, Rng& rng, bool diversify) {
  if (!is_extendable(tree, from, max_steps)) {
    throw std::invalid_argument("rollout requested from a node that cannot grow");
  }
  Trail history = tree.trail_to(from);
  const std::vector<Action> tried = diversify ? child_actions(tree, from) : std::vector<Action>{};
  State state = tree.node(from).state;
  std::uint32_t depth = tree.node(from).depth;

  std::vector<PathStep> path;
  bool truncated = false;
  while (!state.is_terminal && depth < max_steps) {
    if (!ledger.consume(CallKind::kEnvironmentStep)) {
      truncated = true;
      break;
    }
    // Sibling diversification applies only to the first step out of `from`.
    std::span<const Action> tried_here =
        path.empty() ? std::span<const Action>(tried) : std::span<const Action>();
    const Action action = sampler.propose(state, history, tried_here, rng);
    PathStep step = env.step(state, action);
    state = step.state;
    history.push_back(step);
    path.push_back(std::move(step));
    ++depth;
  }
  if (path.empty()) return std::nullopt;
  const NodeId leaf = tree.append_path(from, path);
  if (truncated) tree.mark_truncated(leaf);
  return RolloutResult{leaf, truncated};
}

std::optional<ExplorationResult> explore_once(DecisionTree& tree, const Environment& env,
                                              ActionSampler& sampler,
                                              const ExplorationPolicy& policy,
                                              CallLedger& ledger, Rng& selection_rng,
                                              Rng& sampler_rng) {
  if (ledger.exhausted()) return std::nullopt;
  ExplorationResult result;
  NodeId current = tree.root();
  for (;;) {
    result.walk.push_back(current);
    const DecisionNode& node = tree.node(current);
    std::vector<std::pair<NodeId, double>> candidates;
    for (NodeId c : node.children) {
      if (is_extendable(tree, c, policy.max_steps)) {
        candidates.emplace_back(c, tree.node(c).elo_score);
      }
    }
    std::optional<NodeId> choice;
    if (!candidates.empty()) {
      const double tau =
          anneal_temperature(node.update_count, policy.config.default_temperature_tau0);
      choice = sample_choice(
          selection_distribution(candidates, policy.config.rejection_score, tau), selection_rng);
    }
    if (!choice) break;
    current = *choice;
  }

  const auto rolled =
      rollout(tree, current, env, sampler, policy.max_steps, ledger, sampler_rng);
  if (!rolled) return std::nullopt;
  result.expanded_from = current;
  result.sequence = tree.sequence_of(rolled->leaf);
  result.truncated = rolled->truncated;
  return result;
}

}  // namespace elodec
