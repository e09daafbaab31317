#include "elodec/baselines.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "elodec/errors.hpp"
#include "elodec/exploration.hpp"

namespace elodec {

namespace {

void check_steps(const Budget& budget) {
  if (budget.max_steps_per_sequence == 0) throw std::invalid_argument("max_steps must be positive");
}

void finish(SearchResult& result, const CallLedger& ledger) {
  result.pass_on_any = true;
  if (const auto pick = first_finished_or_first(result.tree, result.sequences)) {
    result.selected = result.sequences[*pick];
  }
  result.ledger = ledger.snapshot();
}

bool open_for_expansion(const DecisionTree& tree, NodeId id, const BaselineConfig& config) {
  return is_extendable(tree, id, config.budget.max_steps_per_sequence) &&
         tree.node(id).children.size() < config.breadth;
}

// Deepest node on the root path of `from` (excluding `from`) that can take
// another child; failing that, the deepest such node anywhere, newest first.
std::optional<NodeId> deepest_open_ancestor(const DecisionTree& tree, NodeId from,
                                            const BaselineConfig& config) {
  for (auto cur = tree.node(from).parent; cur; cur = tree.node(*cur).parent) {
    if (open_for_expansion(tree, *cur, config)) return cur;
  }
  std::optional<NodeId> found;
  for (const DecisionNode& n : tree.nodes()) {
    if (open_for_expansion(tree, n.id, config) && (!found || n.depth >= tree.node(*found).depth)) {
      found = n.id;
    }
  }
  return found;
}

std::string describe(std::string_view what, NodeId id) {
  return std::string(what) + " " + std::to_string(to_index(id));
}

// Shared depth-first driver. `on_complete` returns where to resume after a
// sequence ended, or std::nullopt to stop.
template <typename OnComplete>
void depth_first(SearchResult& result, const Environment& env, ActionSampler& sampler,
                 const BaselineConfig& config, CallLedger& ledger, Rng& sampler_rng,
                 OnComplete on_complete) {
  DecisionTree& tree = result.tree;
  NodeId current = tree.root();
  while (result.sequences.size() < config.target_sequences) {
    if (!is_extendable(tree, current, config.budget.max_steps_per_sequence)) {
      result.sequences.push_back(tree.sequence_of(current));
      result.trace.push_back(describe("complete", current));
      if (result.sequences.size() >= config.target_sequences) break;
      const auto next = on_complete(current);
      if (!next) break;
      current = *next;
      continue;
    }
    const auto child = expand_one(tree, current, env, sampler, ledger, sampler_rng);
    if (!child) {
      result.truncated = true;
      if (current != tree.root() && tree.node(current).is_leaf()) tree.mark_truncated(current);
      break;
    }
    current = *child;
  }
}

}  // namespace

void BaselineConfig::validate() const {
  budget.validate();
  if (breadth == 0 || keep_per_level == 0 || target_sequences == 0 || cot_k == 0) {
    throw std::invalid_argument("baseline settings must be positive");
  }
}

SearchResult cot_search(const Environment& env, ActionSampler& sampler, const Budget& budget,
                        std::uint64_t seed) {
  SearchResult result = cot_at_k_search(1, env, sampler, budget, seed);
  result.method = "cot";
  result.pass_on_any = false;
  return result;
}

SearchResult cot_at_k_search(std::uint32_t k, const Environment& env, ActionSampler& sampler,
                             const Budget& budget, std::uint64_t seed) {
  if (k == 0) throw std::invalid_argument("cot@k needs k >= 1");
  check_steps(budget);
  SearchResult result("cot@" + std::to_string(k), DecisionTree(env.initial_state(), EloConfig{}));
  CallLedger ledger(budget.max_calls);
  for (std::uint32_t i = 0; i < k; ++i) {
    Rng rng = make_stream(seed, Stream::kSampler, i);
    const auto rolled = rollout(result.tree, result.tree.root(), env, sampler,
                                budget.max_steps_per_sequence, ledger, rng, /*diversify=*/false);
    if (!rolled || rolled->truncated) {
      result.truncated = true;
      break;
    }
    result.sequences.push_back(result.tree.sequence_of(rolled->leaf));
    result.trace.push_back(describe("complete", rolled->leaf));
  }
  finish(result, ledger);
  return result;
}

SearchResult bfs_search(const Environment& env, ActionSampler& sampler, Judge& judge,
                        const BaselineConfig& config, std::uint64_t seed) {
  config.validate();
  SearchResult result("bfs", DecisionTree(env.initial_state(), EloConfig{}));
  DecisionTree& tree = result.tree;
  CallLedger ledger(config.budget.max_calls);
  Rng sampler_rng = make_stream(seed, Stream::kSampler);
  Rng judge_rng = make_stream(seed, Stream::kJudge);
  const TaskContext context = env.task_context();
  const std::uint32_t cap = config.budget.max_steps_per_sequence;

  std::vector<NodeId> frontier{tree.root()};
  bool stop = false;
  while (!frontier.empty() && !stop) {
    std::vector<NodeId> next;
    for (NodeId node : frontier) {
      for (std::uint32_t j = 0; j < config.breadth && !stop; ++j) {
        const auto child = expand_one(tree, node, env, sampler, ledger, sampler_rng);
        if (!child) {
          result.truncated = true;
          stop = true;
        } else if (!is_extendable(tree, *child, cap)) {
          result.sequences.push_back(tree.sequence_of(*child));
          result.trace.push_back(describe("complete", *child));
          stop = result.sequences.size() >= config.target_sequences;
        } else {
          next.push_back(*child);
        }
      }
      if (stop) break;
    }
    if (stop || next.size() <= config.keep_per_level) {
      frontier = std::move(next);
      continue;
    }

    std::vector<Candidate> candidates;
    for (NodeId n : next) candidates.push_back(make_candidate(tree.trail_to(n), env, /*in_progress=*/true));
    std::vector<double> score(next.size(), 0.0);
    for (std::size_t i = 0; i < next.size() && !stop; ++i) {
      for (std::size_t j = i + 1; j < next.size(); ++j) {
        if (!ledger.can_afford(2)) {
          result.truncated = true;
          stop = true;
          break;
        }
        double for_i = 0.5;
        try {
          for_i = double_compare(judge, context, candidates[i], candidates[j], judge_rng, &ledger,
                                 false)
                      .outcome_for_a.value();
        } catch (const JudgeError& e) {
          result.judge_errors.push_back(e.what());
        }
        score[i] += for_i;
        score[j] += 1.0 - for_i;
      }
    }
    if (stop) break;
    std::vector<std::size_t> order(next.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return score[x] > score[y]; });
    frontier.clear();
    for (std::size_t i = 0; i < config.keep_per_level; ++i) {
      frontier.push_back(next[order[i]]);
      result.trace.push_back(describe("keep", next[order[i]]));
    }
  }
  // Kept states left hanging by the budget are partial sequences.
  if (result.truncated) {
    for (NodeId leaf : tree.leaves()) {
      if (is_extendable(tree, leaf, cap)) tree.mark_truncated(leaf);
    }
  }
  finish(result, ledger);
  return result;
}

SearchResult dfs_search(const Environment& env, ActionSampler& sampler,
                        const BaselineConfig& config, std::uint64_t seed) {
  config.validate();
  SearchResult result("dfs", DecisionTree(env.initial_state(), EloConfig{}));
  CallLedger ledger(config.budget.max_calls);
  Rng sampler_rng = make_stream(seed, Stream::kSampler);
  depth_first(result, env, sampler, config, ledger, sampler_rng, [&](NodeId done) {
    const auto back = deepest_open_ancestor(result.tree, done, config);
    if (back) result.trace.push_back(describe("backtrack", *back));
    return back;
  });
  finish(result, ledger);
  return result;
}

SearchResult dfsdt_search(const Environment& env, ActionSampler& sampler, Judge& judge,
                          const BaselineConfig& config, std::uint64_t seed) {
  config.validate();
  SearchResult result("dfsdt", DecisionTree(env.initial_state(), EloConfig{}));
  DecisionTree& tree = result.tree;
  CallLedger ledger(config.budget.max_calls);
  Rng sampler_rng = make_stream(seed, Stream::kSampler);
  Rng judge_rng = make_stream(seed, Stream::kJudge);
  Rng jump_rng = make_stream(seed, Stream::kBaseline);
  const TaskContext context = env.task_context();
  std::optional<NodeId> best;

  depth_first(result, env, sampler, config, ledger, sampler_rng, [&](NodeId done) -> std::optional<NodeId> {
    const auto back = deepest_open_ancestor(tree, done, config);
    bool won = true;
    if (best && ledger.can_afford(2)) {
      const Candidate fresh = make_candidate(tree.trail(tree.sequence_of(done)), env);
      const Candidate incumbent = make_candidate(tree.trail(tree.sequence_of(*best)), env);
      try {
        won = double_compare(judge, context, fresh, incumbent, judge_rng, &ledger, false)
                  .outcome_for_a == ComparisonOutcome::win();
      } catch (const JudgeError& e) {
        result.judge_errors.push_back(e.what());
        won = false;
      }
    }
    if (won) best = done;
    if (won || !back) {
      if (back) result.trace.push_back(describe("backtrack", *back));
      return back;
    }
    std::vector<NodeId> shallower;
    for (const DecisionNode& n : tree.nodes()) {
      if (n.depth < tree.node(*back).depth && open_for_expansion(tree, n.id, config)) {
        shallower.push_back(n.id);
      }
    }
    const NodeId target = shallower.empty() ? *back : shallower[uniform_index(jump_rng, shallower.size())];
    result.trace.push_back(describe("jump", target));
    return target;
  });
  finish(result, ledger);
  return result;
}

}  // namespace elodec
