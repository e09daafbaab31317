#include "elodec/elo.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace elodec {

namespace {

void require_positive(double value, const char* name) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw std::invalid_argument(std::string(name) + " must be a positive finite number");
  }
}

void require_finite(double value, const char* name) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument(std::string(name) + " must be finite");
  }
}

}  // namespace

void EloConfig::validate() const {
  require_positive(elo_coefficient_r, "elo_coefficient_r");
  require_positive(update_step_k, "update_step_k");
  require_positive(default_temperature_tau0, "default_temperature_tau0");
  require_finite(initial_score, "initial_score");
  require_finite(rejection_score, "rejection_score");
}

ExpectedScore::ExpectedScore(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument("expected score outside [0, 1]");
  }
}

ComparisonOutcome ComparisonOutcome::from_value(double value) {
  if (value == 0.0 || value == 0.5 || value == 1.0) return ComparisonOutcome(value);
  throw std::invalid_argument("comparison outcome must be 0, 0.5 or 1");
}

ExpectedScore expected_score(double v_x, double v_y, const EloConfig& config) {
  require_finite(v_x, "v_x");
  require_finite(v_y, "v_y");
  const double z = (v_x - v_y) / config.elo_coefficient_r;
  return ExpectedScore(1.0 / (1.0 + std::exp(-z)));
}

std::pair<double, double> update_pair(double v_x, double v_y,
                                      ComparisonOutcome outcome_x,
                                      const EloConfig& config) {
  const double expected_x = expected_score(v_x, v_y, config).value();
  // R_y - E_y = (1 - R_x) - (1 - E_x), so one delta serves both sides.
  const double delta = config.update_step_k * (outcome_x.value() - expected_x);
  return {v_x + delta, v_y - delta};
}

ComparisonOutcome double_comparison_outcome(std::optional<int> first_trial_winner,
                                            std::optional<int> second_trial_winner,
                                            int a, int b) {
  auto check = [&](const std::optional<int>& winner) {
    if (winner && *winner != a && *winner != b) {
      throw std::invalid_argument("trial winner is not one of the compared contestants");
    }
  };
  check(first_trial_winner);
  check(second_trial_winner);
  if (first_trial_winner == a && second_trial_winner == a) return ComparisonOutcome::win();
  if (first_trial_winner == b && second_trial_winner == b) return ComparisonOutcome::loss();
  return ComparisonOutcome::draw();
}

}  // namespace elodec
