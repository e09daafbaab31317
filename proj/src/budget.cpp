#include "elodec/budget.hpp"

#include <stdexcept>

namespace elodec {

void Budget::validate() const {
  if (max_calls == 0 || max_steps_per_sequence == 0 || max_explorations == 0) {
    throw std::invalid_argument("budget limits must all be positive");
  }
}

bool CallLedger::consume(CallKind kind) {
  if (exhausted()) return false;
  if (kind == CallKind::kEnvironmentStep) {
    ++environment_steps_;
  } else {
    ++judge_trials_;
  }
  return true;
}

}  // namespace elodec
