#pragma once

// Pairwise rating arithmetic shared by the search, judgment and ranking code.
//
// Expected score uses the logistic form 1 / (1 + exp(-(v_x - v_y) / r)) with
// the coefficient r applied literally (no base-10 / 400-point rescaling).

#include <optional>
#include <utility>

namespace elodec {

struct EloConfig {
  double elo_coefficient_r = 173.72;
  double update_step_k = 50.0;
  double initial_score = 0.0;
  // Score of the rejection pseudo-choice during exploration. Never updated.
  double rejection_score = 0.0;
  double default_temperature_tau0 = 100.0;

  // Throws std::invalid_argument when r, K or tau0 is not a positive finite
  // number, or when either score is non-finite.
  void validate() const;
};

// Probability in [0, 1] that the first contestant beats the second.
class ExpectedScore {
 public:
  explicit ExpectedScore(double value);
  double value() const { return value_; }

 private:
  double value_;
};

// Result of one (possibly double) comparison from the first contestant's
// perspective. Only 0, 0.5 and 1 are representable.
class ComparisonOutcome {
 public:
  static ComparisonOutcome win() { return ComparisonOutcome(1.0); }
  static ComparisonOutcome draw() { return ComparisonOutcome(0.5); }
  static ComparisonOutcome loss() { return ComparisonOutcome(0.0); }
  // Throws std::invalid_argument for anything but 0, 0.5 or 1.
  static ComparisonOutcome from_value(double value);

  double value() const { return value_; }
  ComparisonOutcome complement() const { return ComparisonOutcome(1.0 - value_); }

  friend bool operator==(ComparisonOutcome, ComparisonOutcome) = default;

 private:
  explicit ComparisonOutcome(double value) : value_(value) {}
  double value_;
};

ExpectedScore expected_score(double v_x, double v_y, const EloConfig& config);

// Applies one paired update. The second contestant's result is always the
// complement of `outcome_x`; the pair's score sum is conserved.
std::pair<double, double> update_pair(double v_x, double v_y,
                                      ComparisonOutcome outcome_x,
                                      const EloConfig& config);

// Maps two order-swapped trials to an outcome for contestant `a`: a win only
// when `a` took both trials, a loss when `b` took both, a draw otherwise.
// std::nullopt marks an abstained trial, which counts as lost by both.
// Throws std::invalid_argument if a winner is neither `a` nor `b`.
ComparisonOutcome double_comparison_outcome(std::optional<int> first_trial_winner,
                                            std::optional<int> second_trial_winner,
                                            int a, int b);

}  // namespace elodec
