#include "elodec/search.hpp"

#include <gtest/gtest.h>

#include "elodec/errors.hpp"
#include "elodec/toy_world.hpp"
#include "support.hpp"

namespace elodec {
namespace {

using testing::BrokenJudge;
using testing::PerfectJudge;

EloSearchConfig config_with(std::uint64_t calls, std::uint32_t explorations = 20) {
  EloSearchConfig c;
  c.budget.max_calls = calls;
  c.budget.max_explorations = explorations;
  return c;
}

TEST(EloSearch, SingleExplorationIsOneRolloutWithoutJudging) {
  ToyWorld world(3, 3, testing::ascending_table(3, 3), 1);
  ToySampler sampler(3, ToySampler::Mode::kUniform);
  PerfectJudge judge;
  const SearchResult r = run_elo_search(world, sampler, judge, config_with(100, 1), 5);
  EXPECT_EQ(r.sequences.size(), 1u);
  EXPECT_EQ(judge.calls, 0u);
  EXPECT_EQ(r.ledger.environment_steps, 3u);
  ASSERT_TRUE(r.selected);
  EXPECT_EQ(*r.selected, r.sequences.front());
}

TEST(EloSearch, BudgetForOneRolloutBehavesLikeCot) {
  ToyWorld world(3, 3, testing::ascending_table(3, 3), 1);
  ToySampler sampler(3, ToySampler::Mode::kUniform);
  PerfectJudge judge;
  const SearchResult r = run_elo_search(world, sampler, judge, config_with(3), 5);
  EXPECT_EQ(r.sequences.size(), 1u);
  EXPECT_EQ(r.ledger.used(), 3u);
  EXPECT_EQ(judge.calls, 0u);
}

TEST(EloSearch, LedgerMatchesTreeAndRounds) {
  ToyWorld world(3, 3, testing::ascending_table(3, 3), 1);
  ToySampler sampler(3, ToySampler::Mode::kUniform);
  OracleJudge judge(0.1);
  const SearchResult r = run_elo_search(world, sampler, judge, config_with(100), 8);
  EXPECT_LE(r.ledger.used(), 100u);
  EXPECT_EQ(r.ledger.environment_steps, r.tree.size() - 1);
  std::uint64_t judge_calls = 0;
  for (const RoundRecord& round : r.rounds) {
    for (const JudgmentEvent& e : round.judgments) judge_calls += e.judge_calls_consumed;
  }
  EXPECT_EQ(judge_calls, r.ledger.judge_trials);
  EXPECT_NO_THROW(r.tree.audit());
}

TEST(EloSearch, SameSeedSameResult) {
  ToyWorld world(3, 3, testing::ascending_table(3, 3), 1);
  ToySampler s1(3, ToySampler::Mode::kUniform), s2(3, ToySampler::Mode::kUniform);
  OracleJudge j1(0.2), j2(0.2);
  const SearchResult a = run_elo_search(world, s1, j1, config_with(100), 42);
  const SearchResult b = run_elo_search(world, s2, j2, config_with(100), 42);
  ASSERT_EQ(a.tree.size(), b.tree.size());
  for (std::size_t i = 0; i < a.tree.size(); ++i) {
    EXPECT_EQ(a.tree.nodes()[i].elo_score, b.tree.nodes()[i].elo_score);
    EXPECT_EQ(a.tree.nodes()[i].state, b.tree.nodes()[i].state);
  }
  EXPECT_EQ(a.selected, b.selected);
}

TEST(EloSearch, LargerBudgetExtendsSmallerRun) {
  // Separate random streams keep the first rounds identical across budgets.
  ToyWorld world(3, 3, testing::ascending_table(3, 3), 1);
  ToySampler s1(3, ToySampler::Mode::kUniform), s2(3, ToySampler::Mode::kUniform);
  OracleJudge j1(0.2), j2(0.2);
  const SearchResult small = run_elo_search(world, s1, j1, config_with(40), 3);
  const SearchResult large = run_elo_search(world, s2, j2, config_with(200), 3);
  ASSERT_LE(small.rounds.size(), large.rounds.size());
  for (std::size_t i = 0; i + 1 < small.rounds.size(); ++i) {
    EXPECT_EQ(small.rounds[i].new_leaf, large.rounds[i].new_leaf);
    EXPECT_EQ(small.rounds[i].walk, large.rounds[i].walk);
  }
}

TEST(EloSearch, NoiseFreeJudgeFindsOptimumOnSmallWorld) {
  ToyWorld world(3, 2, testing::ascending_table(3, 2), 1);
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ToySampler sampler(3, ToySampler::Mode::kUniform);
    PerfectJudge judge;
    EloSearchConfig cfg = config_with(10000);
    cfg.judgment.comparisons_per_new_sequence = 8;
    const SearchResult r = run_elo_search(world, sampler, judge, cfg, seed);
    const Trail best = r.tree.trail(*r.selected);
    hits += world.true_utility(best) == 1.0;
  }
  EXPECT_GE(hits, 18);
}

TEST(EloSearch, JudgeErrorsAreRecordedNotFatal) {
  ToyWorld world(2, 2, testing::ascending_table(2, 2), 1);
  ToySampler sampler(2, ToySampler::Mode::kUniform);
  BrokenJudge judge;
  const SearchResult r = run_elo_search(world, sampler, judge, config_with(60, 5), 1);
  EXPECT_EQ(r.judge_errors.size(), 4u);
  for (const DecisionNode& n : r.tree.nodes()) EXPECT_EQ(n.elo_score, 0.0);
}

TEST(EloSearch, RandomSelectionUsesCompletedLeaves) {
  ToyWorld world(3, 3, testing::ascending_table(3, 3), 1);
  ToySampler sampler(3, ToySampler::Mode::kUniform);
  OracleJudge judge(0.1);
  EloSearchConfig cfg = config_with(100);
  cfg.final_selection = FinalSelection::kRandom;
  const SearchResult r = run_elo_search(world, sampler, judge, cfg, 4);
  EXPECT_EQ(r.method, "elo-rand");
  ASSERT_TRUE(r.selected);
  EXPECT_FALSE(r.tree.node(r.selected->leaf).truncated);
}

TEST(SelectOptimum, ArgmaxWithEarliestTieBreak) {
  ToyWorld world(3, 1, {0, 0.5, 1}, 1);
  DecisionTree tree(world.initial_state(), EloConfig{});
  std::vector<NodeId> leaves;
  for (std::uint32_t k = 1; k <= 3; ++k) {
    leaves.push_back(tree.append_path(tree.root(), std::vector<PathStep>{world.step(world.initial_state(), ToyWorld::choice(k))}));
  }
  tree.set_elo(leaves[0], 25);
  tree.set_elo(leaves[1], -25);
  tree.set_elo(leaves[2], 0);
  EXPECT_EQ(select_optimum(tree).leaf, leaves[0]);
  for (NodeId l : leaves) tree.set_elo(l, tree.node(l).elo_score + 1000);
  EXPECT_EQ(select_optimum(tree).leaf, leaves[0]);
  tree.set_elo(leaves[2], tree.node(leaves[0]).elo_score);
  EXPECT_EQ(select_optimum(tree).leaf, leaves[0]);
  tree.mark_truncated(leaves[0]);
  EXPECT_EQ(select_optimum(tree).leaf, leaves[2]);
}

TEST(SelectOptimum, EmptyTreeIsNotFound) {
  DecisionTree tree(State{"s", false}, EloConfig{});
  EXPECT_THROW(select_optimum(tree), NotFound);
  Rng rng(1);
  EXPECT_THROW(select_random(tree, rng), NotFound);
}

}  // namespace
}  // namespace elodec
