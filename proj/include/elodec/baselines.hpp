#pragma once

// Reference searchers sharing the environment, judge and budget contracts of
// the Elo search: single and repeated greedy rollouts, breadth-first and
// depth-first expansion, and a depth-first variant that abandons branches
// when the judge dislikes what they produced.

#include <cstdint>

#include "elodec/budget.hpp"
#include "elodec/environment.hpp"
#include "elodec/judges.hpp"
#include "elodec/search.hpp"

namespace elodec {

struct BaselineConfig {
  Budget budget;
  std::uint32_t breadth = 2;          // children expanded per state
  std::uint32_t keep_per_level = 3;   // breadth-first pruning width
  std::uint32_t target_sequences = 3;
  std::uint32_t cot_k = 3;

  void validate() const;
};

// One rollout from the root. A zero call budget yields an empty, truncated
// result.
SearchResult cot_search(const Environment& env, ActionSampler& sampler, const Budget& budget,
                        std::uint64_t seed);

// k rollouts from the root, each blind to the others. The first rollout is
// identical to cot_search under the same seed.
SearchResult cot_at_k_search(std::uint32_t k, const Environment& env, ActionSampler& sampler,
                             const Budget& budget, std::uint64_t seed);

// Level by level: every kept state gets `breadth` children; children that
// ended are collected, the rest are pruned to `keep_per_level` by a
// round-robin of double comparisons over their partial trails.
SearchResult bfs_search(const Environment& env, ActionSampler& sampler, Judge& judge,
                        const BaselineConfig& config, std::uint64_t seed);

// Goes deep first; after each ended sequence resumes from the deepest
// ancestor that still has fewer than `breadth` children.
SearchResult dfs_search(const Environment& env, ActionSampler& sampler,
                        const BaselineConfig& config, std::uint64_t seed);

// Depth-first, but every ended sequence after the first is compared with the
// best so far: a win resumes at the deepest open ancestor, anything else
// jumps to a uniformly chosen open node shallower than that ancestor.
SearchResult dfsdt_search(const Environment& env, ActionSampler& sampler, Judge& judge,
                          const BaselineConfig& config, std::uint64_t seed);

}  // namespace elodec
