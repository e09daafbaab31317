#include "elodec/config.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <set>

#include "elodec/errors.hpp"
#include "elodec/suite.hpp"

namespace elodec {
namespace {

using Json = nlohmann::json;

std::string message_of(const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

TEST(Config, DefaultsRoundTripByteIdentical) {
  const std::string text = serialize_config(RunConfig{});
  EXPECT_EQ(serialize_config(parse_config(text)), text);
}

TEST(Config, CustomValuesRoundTrip) {
  RunConfig c;
  c.elo.update_step_k = 32.0;
  c.budget.max_calls = 77;
  c.budget.max_explorations = 9;
  c.judgment.comparisons_per_new_sequence = 3;
  c.baselines.breadth = 4;
  c.judge.kind = JudgeSpec::Kind::kReplay;
  c.judge.verdicts = {{Winner::kFirst, ""}, {std::nullopt, "timeout"}, {Winner::kAbstain, ""}};
  c.judge.remote.index_base = 1;
  c.judge.remote.legacy_functions = true;
  c.suite.methods = {"elo", "cot@5"};
  c.suite.budgets = {10, 20};
  c.suite.parallel = 3;
  const std::string text = serialize_config(c);
  const RunConfig back = parse_config(text);
  EXPECT_EQ(back.elo.update_step_k, 32.0);
  EXPECT_EQ(back.budget.max_calls, 77u);
  EXPECT_EQ(back.budget.max_explorations, 9u);
  EXPECT_EQ(back.judgment.comparisons_per_new_sequence, 3u);
  EXPECT_EQ(back.judge.kind, JudgeSpec::Kind::kReplay);
  ASSERT_EQ(back.judge.verdicts.size(), 3u);
  EXPECT_FALSE(back.judge.verdicts[1].winner.has_value());
  EXPECT_EQ(back.judge.verdicts[1].error, "timeout");
  EXPECT_EQ(back.judge.remote.index_base, 1);
  EXPECT_EQ(back.suite.methods, (std::vector<std::string>{"elo", "cot@5"}));
  EXPECT_EQ(serialize_config(back), text);
}

TEST(Config, MissingSectionsKeepDefaults) {
  const RunConfig c = parse_config(R"({"format": "elodec.config", "version": 1, "budget": {"max_calls": 5}})");
  const RunConfig d;
  EXPECT_EQ(c.budget.max_calls, 5u);
  EXPECT_EQ(c.budget.max_steps_per_sequence, d.budget.max_steps_per_sequence);
  EXPECT_EQ(c.elo.elo_coefficient_r, d.elo.elo_coefficient_r);
  EXPECT_EQ(c.suite.budgets, d.suite.budgets);
}

TEST(Config, VersionAndFormatAreChecked) {
  EXPECT_THROW(parse_config(R"({"format": "elodec.config", "version": 2})"), VersionMismatch);
  EXPECT_THROW(parse_config(R"({"format": "elodec.world", "version": 1})"), FormatError);
  EXPECT_THROW(parse_config(R"({"version": 1})"), FormatError);
  EXPECT_THROW(parse_config("{not json"), FormatError);
}

TEST(Config, BadFieldsAreNamed) {
  const std::string wrong_type = message_of([] {
    parse_config(R"({"format": "elodec.config", "version": 1, "budget": {"max_calls": "many"}})");
  });
  EXPECT_NE(wrong_type.find("max_calls"), std::string::npos) << wrong_type;
  const std::string bad_section = message_of(
      [] { parse_config(R"({"format": "elodec.config", "version": 1, "elo": [1, 2]})"); });
  EXPECT_NE(bad_section.find("elo"), std::string::npos) << bad_section;
  const std::string bad_kind = message_of(
      [] { parse_config(R"({"format": "elodec.config", "version": 1, "judge": {"kind": "psychic"}})"); });
  EXPECT_NE(bad_kind.find("psychic"), std::string::npos) << bad_kind;
}

TEST(Config, InvalidValuesAreFormatErrors) {
  EXPECT_THROW(parse_config(R"({"format": "elodec.config", "version": 1, "suite": {"parallel": 0}})"),
               FormatError);
  EXPECT_THROW(parse_config(R"({"format": "elodec.config", "version": 1, "judge": {"sigma": 0}})"),
               FormatError);
  EXPECT_THROW(
      parse_config(R"({"format": "elodec.config", "version": 1, "budget": {"max_steps_per_sequence": 0}})"),
      FormatError);
}

TEST(JudgeKind, NamesRoundTrip) {
  for (auto kind : {JudgeSpec::Kind::kOracle, JudgeSpec::Kind::kReplay, JudgeSpec::Kind::kRemote}) {
    EXPECT_EQ(judge_kind_from_string(to_string(kind)), kind);
  }
  EXPECT_THROW(judge_kind_from_string("coin"), std::invalid_argument);
}

TEST(Worlds, ToyRoundTrip) {
  ToySpec toy = random_toy(3, 2, 5);
  toy.success_threshold = 0.75;
  toy.sampler = ToySampler::Mode::kOrdered;
  const std::string text = serialize_world(toy);
  const auto worlds = parse_worlds(text);
  ASSERT_EQ(worlds.size(), 1u);
  const auto& back = std::get<ToySpec>(worlds[0]);
  EXPECT_EQ(back.table, toy.table);
  EXPECT_EQ(back.success_threshold, 0.75);
  EXPECT_EQ(back.sampler, ToySampler::Mode::kOrdered);
  EXPECT_EQ(serialize_world(back), text);
}

TEST(Worlds, ToolRoundTrip) {
  const ToolTask task = generate_suite("easy", 1, 3).tasks.at(0);
  const std::string text = serialize_world(task);
  EXPECT_EQ(serialize_world(parse_worlds(text).at(0)), text);
}

TEST(Worlds, SuiteDocumentYieldsEveryTask) {
  const TaskSuite suite = generate_suite("medium", 4, 9);
  const auto worlds = parse_worlds(serialize_suite(suite));
  ASSERT_EQ(worlds.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(world_id(worlds[i]), suite.tasks[i].id);
}

TEST(Worlds, BrokenToyIsAFormatError) {
  Json doc = Json::parse(serialize_world(random_toy(2, 2, 1)));
  doc["world"]["table"] = Json::array({0.1, 0.2});
  EXPECT_THROW(parse_worlds(doc.dump()), FormatError);
  doc = Json::parse(serialize_world(random_toy(2, 2, 1)));
  doc["world"]["kind"] = "maze";
  EXPECT_THROW(parse_worlds(doc.dump()), FormatError);
}

TEST(RandomToy, ScaledAdditiveTable) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ToySpec toy = random_toy(3, 3, seed);
    ASSERT_EQ(toy.table.size(), 27u);
    const auto [lo, hi] = std::minmax_element(toy.table.begin(), toy.table.end());
    EXPECT_DOUBLE_EQ(*lo, 0.0);
    EXPECT_DOUBLE_EQ(*hi, 1.0);
    EXPECT_EQ(std::count(toy.table.begin(), toy.table.end(), 1.0), 1);
    // Additivity: swapping the last choice shifts every prefix by the same amount.
    for (std::size_t prefix = 1; prefix < 9; ++prefix) {
      for (std::size_t last = 1; last < 3; ++last) {
        EXPECT_NEAR(toy.table[3 * prefix + last] - toy.table[3 * prefix],
                    toy.table[last] - toy.table[0], 1e-12);
      }
    }
  }
  EXPECT_EQ(random_toy(3, 3, 4).table, random_toy(3, 3, 4).table);
  EXPECT_NE(random_toy(3, 3, 4).table, random_toy(3, 3, 5).table);
  EXPECT_THROW(random_toy(1, 3, 1), std::invalid_argument);
}

TEST(MakeWorld, BuildsBothKinds) {
  const World toy = make_world(random_toy(2, 2, 1));
  EXPECT_FALSE(toy.env->initial_state().is_terminal);
  const World tool = make_world(generate_suite("easy", 1, 1).tasks.at(0));
  EXPECT_FALSE(tool.env->task_context().query.empty());
}

}  // namespace
}  // namespace elodec
