#pragma once

// Run configuration, world descriptions and the factories that turn them
// into live environments, samplers and judges. Both are persisted as JSON
// (docs/formats.md) and embedded in every run record.

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "elodec/baselines.hpp"
#include "elodec/budget.hpp"
#include "elodec/elo.hpp"
#include "elodec/judges.hpp"
#include "elodec/judgment.hpp"
#include "elodec/remote_judge.hpp"
#include "elodec/suite.hpp"
#include "elodec/tool_world.hpp"
#include "elodec/toy_world.hpp"

namespace elodec {

struct ToySpec {
  std::string id = "toy";
  std::uint32_t branching = 3;
  std::uint32_t depth = 3;
  std::vector<double> table;
  std::uint64_t seed = 0;
  double success_threshold = std::numeric_limits<double>::quiet_NaN();
  ToySampler::Mode sampler = ToySampler::Mode::kUniform;
};

using WorldSpec = std::variant<ToySpec, ToolTask>;

const std::string& world_id(const WorldSpec& world);

// Additive toy table: each level adds a per-choice weight drawn from the
// seed, and the totals are min-max scaled to [0, 1]. Prefix quality therefore
// predicts final quality, and the optimum is unique with probability 1.
ToySpec random_toy(std::uint32_t branching, std::uint32_t depth, std::uint64_t seed);

struct World {
  std::unique_ptr<Environment> env;
  std::unique_ptr<ActionSampler> sampler;
};

World make_world(const WorldSpec& spec);

struct JudgeSpec {
  enum class Kind { kOracle, kReplay, kRemote };
  Kind kind = Kind::kOracle;
  double sigma = 1.0;
  double first_position_bias = 0.0;
  std::vector<ReplayJudge::Record> verdicts;  // replay only
  RemoteJudgeConfig remote;
};

std::string_view to_string(JudgeSpec::Kind kind);
JudgeSpec::Kind judge_kind_from_string(std::string_view text);

// Remote judges talk HTTP(S) through the process-wide request gate.
std::unique_ptr<Judge> make_judge(const JudgeSpec& spec);

struct SuiteSettings {
  std::string suite_path;
  std::vector<std::string> methods = {"cot", "cot@3", "bfs", "dfs", "dfsdt", "elo", "elo-rand"};
  std::vector<std::uint64_t> budgets = {30, 60, 90, 120, 150, 180, 210, 240, 270, 300};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::uint32_t parallel = 1;
  std::uint32_t rank_trials = 10;
  std::uint64_t rank_budget = 0;  // 0: the largest budget of the grid
};

struct RunConfig {
  EloConfig elo;
  Budget budget;
  JudgmentConfig judgment;
  BaselineConfig baselines;  // its budget is ignored; `budget` applies
  JudgeSpec judge;
  SuiteSettings suite;

  void validate() const;
};

// Missing sections and fields keep their defaults. Throws FormatError /
// VersionMismatch.
RunConfig parse_config(const std::string& json_text);
RunConfig read_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

// World documents hold one world; suite documents hold many tool tasks.
// Accepts either and returns every world inside.
std::vector<WorldSpec> read_worlds(const std::string& path);
std::vector<WorldSpec> parse_worlds(const std::string& json_text);
std::string serialize_world(const WorldSpec& world);

}  // namespace elodec
