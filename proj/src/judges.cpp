#include "elodec/judges.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "elodec/errors.hpp"
#include "json_util.hpp"

namespace elodec {

std::string_view to_string(Winner winner) {
  switch (winner) {
    case Winner::kFirst:
      return "FIRST";
    case Winner::kSecond:
      return "SECOND";
    case Winner::kAbstain:
      return "ABSTAIN";
  }
  return "ABSTAIN";
}

Winner winner_from_string(std::string_view text) {
  if (text == "FIRST") return Winner::kFirst;
  if (text == "SECOND") return Winner::kSecond;
  if (text == "ABSTAIN") return Winner::kAbstain;
  throw FormatError("unknown verdict '" + std::string(text) + "'");
}

double oracle_performance_sample(double true_utility, double sigma, Rng& rng) {
  if (!(sigma > 0.0)) throw std::invalid_argument("oracle sigma must be positive");
  std::normal_distribution<double> noise(0.0, 1.0);
  return true_utility + sigma * noise(rng);
}

OracleJudge::OracleJudge(double sigma, double first_position_bias)
    : sigma_(sigma), first_position_bias_(first_position_bias) {
  if (!(sigma > 0.0)) throw std::invalid_argument("oracle sigma must be positive");
}

JudgeVerdict OracleJudge::compare(const TaskContext& /*context*/, const Candidate& first,
                                  const Candidate& second, Rng& rng) {
  const bool first_is_canonical =
      first.rendering != second.rendering ? first.rendering < second.rendering
                                          : first.utility <= second.utility;
  const Candidate& lead = first_is_canonical ? first : second;
  const Candidate& trail = first_is_canonical ? second : first;
  const double lead_draw = oracle_performance_sample(lead.utility, sigma_, rng);
  const double trail_draw = oracle_performance_sample(trail.utility, sigma_, rng);

  const double first_perf = (first_is_canonical ? lead_draw : trail_draw) + first_position_bias_;
  const double second_perf = first_is_canonical ? trail_draw : lead_draw;
  JudgeVerdict verdict;
  if (first_perf > second_perf) {
    verdict.winner = Winner::kFirst;
  } else if (second_perf > first_perf) {
    verdict.winner = Winner::kSecond;
  } else {
    verdict.winner = Winner::kAbstain;
  }
  return verdict;
}

ReplayJudge::ReplayJudge(std::vector<Record> script) : script_(std::move(script)) {}

std::vector<ReplayJudge::Record> ReplayJudge::parse_script(const std::string& json_text) {
  const auto doc = detail::parse_document(json_text, "elodec.replay-verdicts", 1);
  const auto verdicts = detail::field<detail::Json>(doc, "verdicts", "replay verdicts");
  if (!verdicts.is_array()) throw FormatError("replay verdicts: 'verdicts' must be an array");
  std::vector<Record> out;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const auto& v = verdicts[i];
    const std::string where = "replay verdict #" + std::to_string(i);
    if (v.is_string()) {
      out.push_back({winner_from_string(v.get<std::string>()), ""});
    } else if (v.is_object()) {
      out.push_back({std::nullopt, detail::field<std::string>(v, "error", where)});
    } else {
      throw FormatError(where + ": expected a verdict string or an error object");
    }
  }
  return out;
}

std::vector<ReplayJudge::Record> ReplayJudge::read_script(const std::string& path) {
  return parse_script(detail::read_text_file(path));
}

JudgeVerdict ReplayJudge::compare(const TaskContext&, const Candidate&, const Candidate&, Rng&) {
  std::lock_guard lock(mu_);
  if (cursor_ >= script_.size()) throw JudgeError("replay script exhausted");
  const Record& record = script_[cursor_++];
  if (!record.winner) throw JudgeError("scripted judge error: " + record.error);
  JudgeVerdict verdict;
  verdict.winner = *record.winner;
  return verdict;
}

std::size_t ReplayJudge::consumed() const {
  std::lock_guard lock(mu_);
  return cursor_;
}

std::string render_sequence_for_judge(const Trail& trail, const Environment& env,
                                      bool in_progress) {
  std::string out;
  for (std::size_t i = 0; i < trail.size(); ++i) {
    const ActionDescription action = env.describe_action(trail[i].action);
    if (i > 0) out += "\n";
    out += "Step " + std::to_string(i + 1) + "\n";
    out += "Action: " + action.name + "\n";
    out += "Arguments: " + action.arguments + "\n";
    out += "Observation: " + trail[i].observation + "\n";
  }
  if (in_progress) out += "(in progress)\n";
  return out;
}

Candidate make_candidate(const Trail& trail, const Environment& env, bool in_progress) {
  return Candidate{render_sequence_for_judge(trail, env, in_progress), env.true_utility(trail)};
}

PairwiseResult double_compare(Judge& judge, const TaskContext& context, const Candidate& a,
                              const Candidate& b, Rng& rng, CallLedger* ledger,
                              bool single_trial, std::uint32_t* calls_spent) {
  std::uint32_t calls = 0;
  if (calls_spent) *calls_spent = 0;
  auto trial = [&](const Candidate& first, const Candidate& second) {
    if (ledger && !ledger->consume(CallKind::kJudgeTrial)) {
      throw JudgeError("call budget exhausted during comparison");
    }
    ++calls;
    if (calls_spent) *calls_spent = calls;
    return judge.compare(context, first, second, rng).winner;
  };

  constexpr int kA = 0;
  constexpr int kB = 1;
  auto as_id = [](Winner w, int first_id, int second_id) -> std::optional<int> {
    if (w == Winner::kFirst) return first_id;
    if (w == Winner::kSecond) return second_id;
    return std::nullopt;
  };

  const std::optional<int> w1 = as_id(trial(a, b), kA, kB);
  if (single_trial && judge.is_deterministic_symmetric()) {
    // A symmetric judge would repeat itself on the swapped order.
    return {double_comparison_outcome(w1, w1, kA, kB), calls};
  }
  const std::optional<int> w2 = as_id(trial(b, a), kB, kA);
  return {double_comparison_outcome(w1, w2, kA, kB), calls};
}

}  // namespace elodec
