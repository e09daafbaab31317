#include "elodec/baselines.hpp"

#include <gtest/gtest.h>

#include <algorithm>

#include "elodec/toy_world.hpp"
#include "support.hpp"

namespace elodec {
namespace {

using testing::PerfectJudge;
using testing::PositionJudge;

BaselineConfig baseline(std::uint64_t calls) {
  BaselineConfig c;
  c.budget.max_calls = calls;
  return c;
}

std::vector<std::string> leaf_states(const SearchResult& r) {
  std::vector<std::string> out;
  for (const DecisionSequence& s : r.sequences) out.push_back(r.tree.node(s.leaf).state.payload);
  return out;
}

TEST(Cot, OrderedSamplerTakesCanonicalPath) {
  ToyWorld world(3, 3, testing::ascending_table(3, 3), 1);
  ToySampler sampler(3, ToySampler::Mode::kOrdered);
  const SearchResult r = cot_search(world, sampler, Budget{}, 1);
  EXPECT_EQ(leaf_states(r), std::vector<std::string>{"toy:0.0.0"});
  EXPECT_FALSE(r.pass_on_any);
  EXPECT_EQ(r.selected, r.sequences.front());
}

TEST(Cot, ZeroBudgetIsEmptyAndFlagged) {
  ToyWorld world(2, 2, testing::ascending_table(2, 2), 1);
  ToySampler sampler(2, ToySampler::Mode::kOrdered);
  Budget b;
  b.max_calls = 0;
  const SearchResult r = cot_search(world, sampler, b, 1);
  EXPECT_TRUE(r.sequences.empty());
  EXPECT_FALSE(r.selected);
  EXPECT_TRUE(r.truncated);
}

TEST(CotAtK, FirstRolloutMatchesCotAndPassIsAny) {
  ToyWorld world(3, 3, testing::ascending_table(3, 3), 1);
  ToySampler s1(3, ToySampler::Mode::kUniform), s2(3, ToySampler::Mode::kUniform);
  const SearchResult one = cot_search(world, s1, Budget{}, 9);
  const SearchResult three = cot_at_k_search(3, world, s2, Budget{}, 9);
  ASSERT_EQ(three.sequences.size(), 3u);
  EXPECT_EQ(leaf_states(three).front(), leaf_states(one).front());
  EXPECT_TRUE(three.pass_on_any);
  EXPECT_EQ(three.method, "cot@3");
}

TEST(CotAtK, OneEqualsCot) {
  ToyWorld world(3, 3, testing::ascending_table(3, 3), 1);
  ToySampler s1(3, ToySampler::Mode::kUniform), s2(3, ToySampler::Mode::kUniform);
  EXPECT_EQ(leaf_states(cot_search(world, s1, Budget{}, 4)), leaf_states(cot_at_k_search(1, world, s2, Budget{}, 4)));
}

TEST(Dfs, EnumeratesInDepthFirstOrder) {
  ToyWorld world(2, 2, testing::ascending_table(2, 2), 1);
  ToySampler sampler(2, ToySampler::Mode::kOrdered);
  const SearchResult r = dfs_search(world, sampler, baseline(100), 1);
  EXPECT_EQ(leaf_states(r), (std::vector<std::string>{"toy:0.0", "toy:0.1", "toy:1.0"}));
  // Two steps down, one sibling, then one step each for the second branch.
  EXPECT_EQ(r.ledger.environment_steps, 5u);
  EXPECT_TRUE(r.pass_on_any);
}

TEST(Dfs, BudgetForOneRollout) {
  ToyWorld world(2, 2, testing::ascending_table(2, 2), 1);
  ToySampler sampler(2, ToySampler::Mode::kOrdered);
  const SearchResult r = dfs_search(world, sampler, baseline(2), 1);
  EXPECT_EQ(r.sequences.size(), 1u);
  EXPECT_TRUE(r.truncated);
}

TEST(Dfs, SameSeedSameTraversal) {
  ToyWorld world(3, 3, testing::ascending_table(3, 3), 1);
  ToySampler s1(3, ToySampler::Mode::kUniform), s2(3, ToySampler::Mode::kUniform);
  EXPECT_EQ(dfs_search(world, s1, baseline(100), 6).trace, dfs_search(world, s2, baseline(100), 6).trace);
}

TEST(Bfs, DepthOneWorldKeepsAtMostThree) {
  ToyWorld world(3, 1, {0.1, 0.2, 0.3}, 1);
  ToySampler sampler(3, ToySampler::Mode::kOrdered);
  PerfectJudge judge;
  BaselineConfig cfg = baseline(100);
  cfg.breadth = 3;
  const SearchResult r = bfs_search(world, sampler, judge, cfg, 1);
  EXPECT_EQ(r.tree.node(r.tree.root()).children.size(), 3u);
  EXPECT_EQ(r.sequences.size(), 3u);
}

TEST(Bfs, NoiseFreeJudgeKeepsTrueTopThree) {
  ToyWorld world(2, 3, testing::ascending_table(2, 3), 1);
  ToySampler sampler(2, ToySampler::Mode::kOrdered);
  PerfectJudge judge;
  const SearchResult r = bfs_search(world, sampler, judge, baseline(1000), 1);
  // Level two holds 0.0, 0.1, 1.0, 1.1; partial utility grows with the index.
  std::vector<std::string> kept;
  for (const std::string& line : r.trace) {
    if (line.rfind("keep ", 0) == 0) kept.push_back(r.tree.node(NodeId{static_cast<std::uint32_t>(std::stoul(line.substr(5)))}).state.payload);
  }
  ASSERT_EQ(kept.size(), 3u);
  std::sort(kept.begin(), kept.end());
  EXPECT_EQ(kept, (std::vector<std::string>{"toy:0.1", "toy:1.0", "toy:1.1"}));
}

TEST(Bfs, TinyBudgetIsTruncated) {
  ToyWorld world(2, 3, testing::ascending_table(2, 3), 1);
  ToySampler sampler(2, ToySampler::Mode::kOrdered);
  PerfectJudge judge;
  const SearchResult r = bfs_search(world, sampler, judge, baseline(1), 1);
  EXPECT_TRUE(r.truncated);
  EXPECT_TRUE(r.sequences.empty());
}

TEST(Dfsdt, NoiseFreeJudgeStaysOnImprovingBranch) {
  ToyWorld world(2, 2, {0.0, 0.1, 0.2, 0.3}, 1);
  ToySampler sampler(2, ToySampler::Mode::kOrdered);
  PerfectJudge judge;
  const SearchResult r = dfsdt_search(world, sampler, judge, baseline(100), 1);
  EXPECT_EQ(leaf_states(r), (std::vector<std::string>{"toy:0.0", "toy:0.1", "toy:1.0"}));
  EXPECT_EQ(std::count_if(r.trace.begin(), r.trace.end(), [](const std::string& l) { return l.rfind("jump", 0) == 0; }), 0);
}

TEST(Dfsdt, LosingEveryComparisonJumps) {
  ToyWorld world(2, 3, testing::ascending_table(2, 3), 1);
  ToySampler sampler(2, ToySampler::Mode::kOrdered);
  PositionJudge judge(Winner::kSecond);  // double comparison then always draws
  const SearchResult r = dfsdt_search(world, sampler, judge, baseline(100), 1);
  const auto jumps = std::count_if(r.trace.begin(), r.trace.end(), [](const std::string& l) { return l.rfind("jump", 0) == 0; });
  EXPECT_EQ(jumps, 1);
  EXPECT_EQ(r.sequences.size(), 3u);
}

TEST(Dfsdt, StopsAtThreeSequences) {
  ToyWorld world(3, 3, testing::ascending_table(3, 3), 1);
  ToySampler sampler(3, ToySampler::Mode::kUniform);
  PerfectJudge judge;
  const SearchResult r = dfsdt_search(world, sampler, judge, baseline(1000), 2);
  EXPECT_EQ(r.sequences.size(), 3u);
  EXPECT_LT(r.ledger.used(), 1000u);
}

}  // namespace
}  // namespace elodec
