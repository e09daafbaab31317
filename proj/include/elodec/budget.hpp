#pragma once

#include <cstdint>

namespace elodec {

struct Budget {
  // Every environment step and every judge trial costs one call.
  std::uint64_t max_calls = 100;
  std::uint32_t max_steps_per_sequence = 12;
  std::uint32_t max_explorations = 20;

  void validate() const;
};

enum class CallKind { kEnvironmentStep, kJudgeTrial };

struct LedgerSnapshot {
  std::uint64_t max_calls = 0;
  std::uint64_t environment_steps = 0;
  std::uint64_t judge_trials = 0;

  std::uint64_t used() const { return environment_steps + judge_trials; }
  friend bool operator==(const LedgerSnapshot&, const LedgerSnapshot&) = default;
};

// Call accounting for one search run. Never lets usage exceed max_calls.
class CallLedger {
 public:
  explicit CallLedger(std::uint64_t max_calls) : max_calls_(max_calls) {}

  bool can_afford(std::uint64_t calls) const { return used() + calls <= max_calls_; }
  bool exhausted() const { return used() >= max_calls_; }
  std::uint64_t remaining() const { return max_calls_ - used(); }
  std::uint64_t used() const { return environment_steps_ + judge_trials_; }

  // Returns false, consuming nothing, when no call is left.
  bool consume(CallKind kind);

  LedgerSnapshot snapshot() const { return {max_calls_, environment_steps_, judge_trials_}; }

 private:
  std::uint64_t max_calls_;
  std::uint64_t environment_steps_ = 0;
  std::uint64_t judge_trials_ = 0;
};

}  // namespace elodec
