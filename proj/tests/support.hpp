#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "elodec/environment.hpp"
#include "elodec/errors.hpp"
#include "elodec/judges.hpp"
#include "elodec/toy_world.hpp"

namespace elodec::testing {

// Proposes the scripted actions in order, then repeats the last one.
class ScriptedSampler final : public ActionSampler {
 public:
  explicit ScriptedSampler(std::vector<Action> script) : script_(std::move(script)) {}
  Action propose(const State&, const Trail&, std::span<const Action>, Rng&) override {
    const Action a = script_[std::min(next_, script_.size() - 1)];
    ++next_;
    return a;
  }

 private:
  std::vector<Action> script_;
  std::size_t next_ = 0;
};

// Always prefers the candidate with the larger hidden utility; abstains on
// ties. Order-independent, so single-trial comparisons are allowed.
class PerfectJudge final : public Judge {
 public:
  JudgeVerdict compare(const TaskContext&, const Candidate& first, const Candidate& second,
                       Rng&) override {
    ++calls;
    JudgeVerdict v;
    if (first.utility > second.utility) v.winner = Winner::kFirst;
    if (second.utility > first.utility) v.winner = Winner::kSecond;
    return v;
  }
  bool is_deterministic_symmetric() const override { return true; }
  std::size_t calls = 0;
};

// Always picks the first or the second presented candidate.
class PositionJudge final : public Judge {
 public:
  explicit PositionJudge(Winner always) : always_(always) {}
  JudgeVerdict compare(const TaskContext&, const Candidate&, const Candidate&, Rng&) override {
    return JudgeVerdict{always_, {}, {}};
  }

 private:
  Winner always_;
};

// Fails every comparison.
class BrokenJudge final : public Judge {
 public:
  JudgeVerdict compare(const TaskContext&, const Candidate&, const Candidate&, Rng&) override {
    throw JudgeError("judge offline");
  }
};

// Toy table whose i-th entry is i / (n - 1), so later sequences are better.
inline std::vector<double> ascending_table(std::uint32_t branching, std::uint32_t depth) {
  std::size_t n = 1;
  for (std::uint32_t d = 0; d < depth; ++d) n *= branching;
  std::vector<double> table(n);
  for (std::size_t i = 0; i < n; ++i) table[i] = static_cast<double>(i) / static_cast<double>(n - 1);
  return table;
}

std::string fixture_path(const std::string& name);
std::string read_fixture(const std::string& name);

}  // namespace elodec::testing
