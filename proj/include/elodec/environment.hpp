#pragma once

// Contracts between the search engine and a task world.
//
// An Environment is a deterministic transition function plus oracle hooks
// (true utility, success rule) that only judges and metrics may consult.
// An ActionSampler stands in for the action-generating model.

#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "elodec/random.hpp"
#include "elodec/tree.hpp"

namespace elodec {

struct TaskContext {
  std::string task_description;
  std::string query;
};

struct ActionDescription {
  std::string name;
  std::string arguments;
};

class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string_view kind() const = 0;
  virtual TaskContext task_context() const = 0;
  virtual State initial_state() const = 0;

  // Deterministic in (state, action, environment seed). Faults come back as
  // observations, never as exceptions. Throws std::invalid_argument only when
  // asked to step from a terminal state.
  virtual PathStep step(const State& state, const Action& action) const = 0;

  virtual bool is_finish_action(const Action& action) const = 0;

  // Oracle-only hooks. Searchers must not call these.
  virtual double true_utility(const Trail& trail) const = 0;
  virtual bool is_success(const Trail& trail) const = 0;
  virtual std::pair<double, double> utility_bounds() const = 0;

  virtual ActionDescription describe_action(const Action& action) const {
    return {action.payload, ""};
  }
};

class ActionSampler {
 public:
  virtual ~ActionSampler() = default;

  // `history` is the trail from the root to `state`; `tried` lists actions
  // already expanded from `state` in the search tree, so samplers can
  // diversify siblings.
  virtual Action propose(const State& state, const Trail& history,
                         std::span<const Action> tried, Rng& rng) = 0;
};

}  // namespace elodec
