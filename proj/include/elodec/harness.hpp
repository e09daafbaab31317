#pragma once

// Experiment orchestration: single runs with full records, replay, suite
// grids, aggregate metrics and their CSV exports.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "elodec/config.hpp"
#include "elodec/search.hpp"
#include "elodec/tool_world.hpp"

namespace elodec {

// Known methods: "elo", "elo-rand", "cot", "cot@<k>", "bfs", "dfs", "dfsdt".
bool is_known_method(const std::string& method);

struct RunRecord {
  RunRecord(WorldSpec world_spec, RunConfig run_config, std::uint64_t run_seed, SearchResult search)
      : world(std::move(world_spec)),
        config(std::move(run_config)),
        seed(run_seed),
        result(std::move(search)) {}

  WorldSpec world;
  RunConfig config;  // effective configuration, budget included
  std::uint64_t seed;
  SearchResult result;
  bool passed = false;
  // Failure classification of the selected sequence (tool worlds only).
  std::optional<FailureReport> failures;
  double wall_time_ms = 0.0;

  const std::string& task_id() const { return world_id(world); }
  const std::string& method() const { return result.method; }
  // No selection, truncation or judge errors.
  bool flagged() const {
    return !result.selected || result.truncated || !result.judge_errors.empty();
  }
};

// Runs one method on one world. Throws std::invalid_argument for an unknown
// method or invalid configuration.
RunRecord run_method(const WorldSpec& world, const std::string& method, const RunConfig& config,
                     std::uint64_t seed);

// Versioned JSON. `parse_run_record` throws FormatError / VersionMismatch
// naming the offending field.
std::string serialize_run_record(const RunRecord& record);
RunRecord parse_run_record(const std::string& json_text);
void write_run_record(const std::string& path, const RunRecord& record);
RunRecord read_run_record(const std::string& path);

// Standalone tree documents (also embedded in run records).
std::string serialize_tree(const DecisionTree& tree);
DecisionTree parse_tree(const std::string& json_text);

// Indented listing: id, depth, score, update count, flags, action.
std::string format_tree(const DecisionTree& tree);

struct ReplayReport {
  bool identical = false;
  std::string stored;    // record text without wall time
  std::string replayed;
  std::string first_difference;  // human-readable, empty when identical
};

// Re-executes the record's (world, method, config, seed) and byte-compares
// the serialized records with wall time cleared.
ReplayReport replay_run(const RunRecord& record);

// --- suites ---------------------------------------------------------------

struct RunSummary {
  std::string task_id;
  std::string method;
  std::uint64_t budget = 0;
  std::uint64_t seed = 0;
  bool passed = false;
  bool has_selection = false;
  double selected_score = 0.0;
  std::optional<Candidate> selected_candidate;
  std::optional<FailureReport> failures;
  LedgerSnapshot ledger;
  std::string error;  // non-empty when the cell failed
};

RunSummary summarize(const RunRecord& record, const Environment& env);

struct PassRatePoint {
  std::string method;
  std::uint64_t budget = 0;
  std::size_t runs = 0;
  std::size_t passed = 0;
  double pass_rate = 0.0;
};

struct RankRow {
  std::string method;
  std::uint64_t budget = 0;
  std::size_t cells = 0;
  double mean_rank = 0.0;
};

struct BucketRow {
  std::uint32_t index = 0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t runs = 0;
  std::size_t passed = 0;
  double pass_rate = 0.0;  // 0 for an empty bucket
};

struct FailureRow {
  std::string method;
  FailureCategory category = FailureCategory::kDecisionFailure;
  std::size_t runs = 0;
  std::size_t occurrences = 0;
  double incidence = 0.0;
  std::size_t fixed = 0;
  double fix_ratio = 0.0;  // 0 when the category never occurred
};

struct SuiteMetrics {
  std::size_t total_runs = 0;
  std::size_t passed_runs = 0;
  double pass_rate = 0.0;
  std::size_t failed_cells = 0;
  std::vector<PassRatePoint> pass_rates;  // method-major, budgets ascending
  std::vector<RankRow> ranks;
  std::vector<BucketRow> buckets;         // always 10
  double bucket_spearman = 0.0;           // NaN with fewer than two non-empty buckets
  double bucket_score_min = 0.0;
  double bucket_score_max = 0.0;
  std::vector<FailureRow> failures;
};

// Pass rates per (method, budget) in first-seen method order.
std::vector<PassRatePoint> pass_rate_curve(const std::vector<RunSummary>& runs);

// Min-max normalizes the selected scores of `method` runs and splits [0, 1]
// into 10 equal buckets (the last one closed).
std::vector<BucketRow> elo_buckets(const std::vector<RunSummary>& runs, const std::string& method,
                                   double* score_min = nullptr, double* score_max = nullptr);

std::vector<FailureRow> failure_table(const std::vector<RunSummary>& runs);

// Tournaments among methods' selected sequences per (task, seed) at `budget`;
// a method without a selection shares the bottom ranks.
std::vector<RankRow> preference_ranks(const std::vector<RunSummary>& runs,
                                      const std::vector<WorldSpec>& worlds, const JudgeSpec& judge,
                                      std::uint64_t budget, std::uint32_t trials);

// Spearman correlation with average ranks for ties; NaN when either side is
// constant or fewer than two points are given.
double spearman(std::span<const double> x, std::span<const double> y);

struct SuiteOutcome {
  SuiteMetrics metrics;
  std::vector<RunSummary> runs;
};

// Runs every (task, method, budget, seed) cell, up to config.suite.parallel
// at a time. A cell failure is recorded in its summary and never aborts the
// suite. `on_record`, when set, is called (serialized) with every record.
SuiteOutcome run_suite(const std::vector<WorldSpec>& worlds, const RunConfig& config,
                       const std::function<void(const RunRecord&)>& on_record = {});

SuiteMetrics compute_metrics(const std::vector<RunSummary>& runs, const std::vector<WorldSpec>& worlds,
                             const RunConfig& config);

std::string serialize_metrics(const SuiteMetrics& metrics);
SuiteMetrics parse_metrics(const std::string& json_text);

// Comma-separated tables with a fixed header line.
std::string pass_rates_csv(const std::vector<PassRatePoint>& rows);
std::string preference_ranks_csv(const std::vector<RankRow>& rows);
std::string elo_buckets_csv(const std::vector<BucketRow>& rows);
std::string failures_csv(const std::vector<FailureRow>& rows);

// Writes metrics.json and the four CSV files into `dir` (created if needed).
void export_metrics(const std::string& dir, const SuiteMetrics& metrics);

}  // namespace elodec
