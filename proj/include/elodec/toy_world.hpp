#pragma once

// Fully enumerable verification world: `depth` levels of `branching` choices.
// The depth-th choice completes the sequence; each of the branching^depth
// complete sequences has an entry in the utility table (first choice most
// significant).

#include <cstdint>
#include <limits>
#include <vector>

#include "elodec/environment.hpp"

namespace elodec {

class ToyWorld final : public Environment {
 public:
  // Throws std::invalid_argument if branching < 2, depth < 1, or the table
  // does not hold exactly branching^depth finite values. A NaN threshold means
  // "only sequences reaching the table maximum succeed".
  ToyWorld(std::uint32_t branching, std::uint32_t depth, std::vector<double> utility_table,
           std::uint64_t seed, double success_threshold = std::numeric_limits<double>::quiet_NaN());

  std::string_view kind() const override { return "toy"; }
  TaskContext task_context() const override;
  State initial_state() const override;
  PathStep step(const State& state, const Action& action) const override;
  bool is_finish_action(const Action&) const override { return false; }

  // Complete trails read the table; partial trails score the mean over
  // their completions.
  double true_utility(const Trail& trail) const override;
  bool is_success(const Trail& trail) const override;
  std::pair<double, double> utility_bounds() const override;

  std::uint32_t branching() const { return branching_; }
  std::uint32_t depth() const { return depth_; }
  std::size_t sequence_count() const { return table_.size(); }
  const std::vector<double>& utility_table() const { return table_; }

  static Action choice(std::uint32_t one_based);
  // Choices (0-based) encoded in a toy state; throws std::invalid_argument for
  // a state from another world.
  static std::vector<std::uint32_t> choices_of(const State& state);

 private:
  std::uint32_t branching_;
  std::uint32_t depth_;
  std::vector<double> table_;
  std::uint64_t seed_;
  double success_threshold_;
};

// Proposes toy choices. kUniform draws uniformly among choices not yet tried
// from this state (all choices once every one was tried); kOrdered always
// takes the lowest untried choice.
class ToySampler final : public ActionSampler {
 public:
  enum class Mode { kUniform, kOrdered };
  ToySampler(std::uint32_t branching, Mode mode);

  Action propose(const State& state, const Trail& history, std::span<const Action> tried,
                 Rng& rng) override;

 private:
  std::uint32_t branching_;
  Mode mode_;
};

}  // namespace elodec
