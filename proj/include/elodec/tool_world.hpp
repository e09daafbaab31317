#pragma once

// Synthetic tool-use world with hidden utilities and injected faults, plus a
// stochastic agent that plays the role of the action-generating model.
//
// Actions are JSON tool calls {"name": ..., "arguments": {...}}; the special
// name "Finish" submits the final answer. Faults are returned as observations
// tagged ERROR[<category>] so searchers can see and recover from them.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "elodec/environment.hpp"

namespace elodec {

enum class ParamKind { kString, kNumber, kBoolean };

struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::kString;
  bool required = true;
};

struct FailureMode {
  enum class Kind { kNone, kUnavailable, kFlaky };
  Kind kind = Kind::kNone;
  double probability = 0.0;  // only meaningful for kFlaky

  static FailureMode none() { return {}; }
  static FailureMode unavailable() { return {Kind::kUnavailable, 1.0}; }
  static FailureMode flaky(double p) { return {Kind::kFlaky, p}; }
};

struct ToolSpec {
  std::string name;
  std::string description;
  std::vector<ParamSpec> parameters;
  FailureMode failure;
  // Value added by a successful call. Tools sharing a non-empty `group` are
  // alternatives: a group contributes the best value among its called tools.
  double utility_contribution = 0.0;
  std::string group;
};

// Behaviour of the simulated agent. Visible to the agent, unlike utilities.
struct AgentProfile {
  double hallucination_rate = 0.1;
  double param_error_rate = 0.15;
  // Chance of repeating the previous call verbatim right after it failed.
  double loop_rate = 0.5;
  double finish_base = 0.05;
  double finish_per_success = 0.2;
  // Weight multiplier for tools not yet called successfully.
  double novelty_weight = 3.0;
  // Weight multiplier for tools already tried as a sibling action.
  double sibling_penalty = 0.25;
  std::map<std::string, double> tool_priors;  // default weight 1
  std::vector<std::string> hallucinated_names;
};

struct ToolTask {
  std::string id;
  std::string tier;
  std::string description;
  std::string query;
  std::vector<ToolSpec> tools;
  double finish_bonus = 1.0;
  double success_threshold = 0.0;
  std::uint64_t fault_seed = 0;
  AgentProfile agent;

  // Throws std::invalid_argument: empty id/query, no tools, duplicate or
  // reserved tool names, probabilities outside [0, 1].
  void validate() const;
};

enum class FailureCategory { kUnavailableTool, kToolCallError, kHallucinatedTool, kDecisionFailure };

std::string_view to_string(FailureCategory category);

// Category -> fixed flag. Fixed means a later step repaired the fault: the
// same tool later succeeded (unavailable / call error), or any real tool
// succeeded after the last hallucinated call.
using FailureReport = std::map<FailureCategory, bool>;

class SyntheticToolWorld final : public Environment {
 public:
  static constexpr std::string_view kFinishName = "Finish";

  explicit SyntheticToolWorld(ToolTask task);

  std::string_view kind() const override { return "tool"; }
  TaskContext task_context() const override;
  State initial_state() const override;
  PathStep step(const State& state, const Action& action) const override;
  bool is_finish_action(const Action& action) const override;

  // Best contribution per group over successful calls, plus the finish bonus
  // when the trail ends with Finish.
  double true_utility(const Trail& trail) const override;
  // Finished and at or above the task's success threshold.
  bool is_success(const Trail& trail) const override;
  std::pair<double, double> utility_bounds() const override;
  ActionDescription describe_action(const Action& action) const override;

  // Throws std::invalid_argument for a trail produced by another world.
  FailureReport classify_failure(const Trail& trail) const;

  const ToolTask& task() const { return task_; }

  static Action tool_call(const std::string& name, const std::string& arguments_json);
  static Action finish();

 private:
  ToolTask task_;
};

// Stochastic agent over one task's tool catalogue. With hallucination_rate 0
// it only ever names tools that exist.
class SimulatedAgent final : public ActionSampler {
 public:
  explicit SimulatedAgent(const ToolTask& task);

  Action propose(const State& state, const Trail& history, std::span<const Action> tried,
                 Rng& rng) override;

 private:
  std::vector<ToolSpec> tools_;
  AgentProfile profile_;
};

// Contract for plugging real tool backends in place of the synthetic results.
// No implementation ships with the library.
class ToolBackend {
 public:
  struct Response {
    int http_status = 200;
    std::string body;
  };
  virtual ~ToolBackend() = default;
  virtual Response invoke(const std::string& tool_name, const std::string& arguments_json) = 0;
};

}  // namespace elodec
