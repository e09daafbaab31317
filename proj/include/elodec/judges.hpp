#pragma once

// Pairwise judges. Every judge answers one ordered question: which of two
// presented candidates is better. Order swapping is the caller's job.

#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "elodec/budget.hpp"
#include "elodec/elo.hpp"
#include "elodec/environment.hpp"
#include "elodec/random.hpp"

namespace elodec {

enum class Winner { kFirst, kSecond, kAbstain };

std::string_view to_string(Winner winner);
// Throws FormatError on anything but FIRST / SECOND / ABSTAIN.
Winner winner_from_string(std::string_view text);

struct JudgeVerdict {
  Winner winner = Winner::kAbstain;
  std::chrono::nanoseconds latency{0};
  std::optional<std::string> raw;
};

// What a judge is shown. `utility` is the environment's hidden value for the
// trail; only the oracle judge reads it.
struct Candidate {
  std::string rendering;
  double utility = 0.0;
};

class Judge {
 public:
  virtual ~Judge() = default;
  // Throws JudgeError on timeouts, transport failures or unusable replies.
  virtual JudgeVerdict compare(const TaskContext& context, const Candidate& first,
                               const Candidate& second, Rng& rng) = 0;
  // True only for judges whose verdict cannot depend on presentation order,
  // which allows single-trial comparisons when configured.
  virtual bool is_deterministic_symmetric() const { return false; }
};

// One draw from Normal(true_utility, sigma). Throws std::invalid_argument if
// sigma <= 0.
double oracle_performance_sample(double true_utility, double sigma, Rng& rng);

// Compares Gaussian performance samples around each candidate's hidden
// utility. Samples are drawn in a canonical candidate order so that swapping
// the presentation under the same seed mirrors the verdict.
class OracleJudge final : public Judge {
 public:
  // `first_position_bias` is added to the first-presented candidate's sample
  // (0 for an unbiased judge).
  explicit OracleJudge(double sigma, double first_position_bias = 0.0);

  JudgeVerdict compare(const TaskContext& context, const Candidate& first,
                       const Candidate& second, Rng& rng) override;

  double sigma() const { return sigma_; }

 private:
  double sigma_;
  double first_position_bias_;
};

// Plays back scripted verdicts, one per call. An exhausted script or an
// error record raises JudgeError.
class ReplayJudge final : public Judge {
 public:
  struct Record {
    std::optional<Winner> winner;  // std::nullopt: scripted judge error
    std::string error;
  };

  explicit ReplayJudge(std::vector<Record> script);
  // Replay fixture documents (see docs/formats.md). Throw FormatError.
  static std::vector<Record> parse_script(const std::string& json_text);
  static std::vector<Record> read_script(const std::string& path);

  JudgeVerdict compare(const TaskContext& context, const Candidate& first,
                       const Candidate& second, Rng& rng) override;

  std::size_t consumed() const;

 private:
  mutable std::mutex mu_;
  std::vector<Record> script_;
  std::size_t cursor_ = 0;
};

// Renders a trail as the text a judge sees: one numbered block per step with
// the action name, its arguments and the observation. Partial trails
// (`in_progress`) end with an "(in progress)" marker.
std::string render_sequence_for_judge(const Trail& trail, const Environment& env,
                                      bool in_progress = false);

Candidate make_candidate(const Trail& trail, const Environment& env, bool in_progress = false);

struct PairwiseResult {
  ComparisonOutcome outcome_for_a = ComparisonOutcome::draw();
  std::uint32_t calls = 0;
};

// Runs the order-swapped pair of trials (a first, then b first) and folds
// them into an outcome for `a`. With `single_trial` set and a symmetric judge
// only the first trial runs. Each trial is charged to `ledger` when given; the
// caller checks affordability first. Throws JudgeError; `calls_spent` then
// holds the trials charged before the failure.
PairwiseResult double_compare(Judge& judge, const TaskContext& context, const Candidate& a,
                              const Candidate& b, Rng& rng, CallLedger* ledger,
                              bool single_trial, std::uint32_t* calls_spent = nullptr);

}  // namespace elodec
