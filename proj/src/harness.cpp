#include "elodec/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>

#include "config_codec.hpp"
#include "elodec/baselines.hpp"
#include "elodec/errors.hpp"
#include "json_util.hpp"

namespace elodec {

namespace {

using detail::field;
using detail::field_or;
using detail::Json;

constexpr std::string_view kRecordFormat = "elodec.run-record";
constexpr std::string_view kTreeFormat = "elodec.tree";
constexpr std::string_view kMetricsFormat = "elodec.suite-metrics";
constexpr int kVersion = 1;
constexpr std::uint32_t kBuckets = 10;

constexpr FailureCategory kCategories[] = {FailureCategory::kUnavailableTool, FailureCategory::kToolCallError,
                                           FailureCategory::kHallucinatedTool,
                                           FailureCategory::kDecisionFailure};

std::optional<std::uint32_t> cot_k(const std::string& method) {
  if (method.rfind("cot@", 0) != 0 || method.size() == 4) return std::nullopt;
  const std::string digits = method.substr(4);
  if (!std::all_of(digits.begin(), digits.end(), ::isdigit) || digits.size() > 4) return std::nullopt;
  const auto k = static_cast<std::uint32_t>(std::stoul(digits));
  if (k == 0) return std::nullopt;
  return k;
}

FailureCategory category_from_string(const std::string& text, const std::string& where) {
  for (FailureCategory c : kCategories) {
    if (to_string(c) == text) return c;
  }
  throw FormatError(where + ": unknown failure category '" + text + "'");
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

Json elo_config_to_json(const EloConfig& c) {
  return Json{{"elo_coefficient_r", c.elo_coefficient_r},
              {"update_step_k", c.update_step_k},
              {"initial_score", c.initial_score},
              {"rejection_score", c.rejection_score},
              {"default_temperature_tau0", c.default_temperature_tau0}};
}

EloConfig elo_config_from_json(const Json& j, const std::string& where) {
  EloConfig c;
  c.elo_coefficient_r = field<double>(j, "elo_coefficient_r", where);
  c.update_step_k = field<double>(j, "update_step_k", where);
  c.initial_score = field<double>(j, "initial_score", where);
  c.rejection_score = field<double>(j, "rejection_score", where);
  c.default_temperature_tau0 = field<double>(j, "default_temperature_tau0", where);
  return c;
}

Json optional_id(std::optional<NodeId> id) { return id ? Json(to_index(*id)) : Json(nullptr); }

Json tree_to_json(const DecisionTree& tree) {
  Json j;
  j["elo"] = elo_config_to_json(tree.config());
  j["nodes"] = Json::array();
  for (const DecisionNode& n : tree.nodes()) {
    Json nj;
    nj["id"] = to_index(n.id);
    nj["parent"] = optional_id(n.parent);
    nj["action"] = n.incoming_action ? Json(n.incoming_action->payload) : Json(nullptr);
    nj["observation"] = n.observation;
    nj["state"] = n.state.payload;
    nj["terminal"] = n.state.is_terminal;
    nj["elo"] = n.elo_score;
    nj["updates"] = n.update_count;
    nj["children"] = Json::array();
    for (NodeId c : n.children) nj["children"].push_back(to_index(c));
    nj["finished"] = n.finished_successfully;
    nj["truncated"] = n.truncated;
    nj["stale"] = n.stale;
    nj["depth"] = n.depth;
    j["nodes"].push_back(nj);
  }
  return j;
}

DecisionTree tree_from_json(const Json& j, const std::string& where) {
  const EloConfig config = elo_config_from_json(field<Json>(j, "elo", where), where + " elo");
  const Json nodes = field<Json>(j, "nodes", where);
  if (!nodes.is_array()) throw FormatError(where + ": 'nodes' must be an array");
  std::vector<DecisionNode> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Json& nj = nodes[i];
    const std::string w = where + " node #" + std::to_string(i);
    DecisionNode n;
    n.id = NodeId{field<std::uint32_t>(nj, "id", w)};
    if (!nj.contains("parent")) detail::throw_missing("parent", w);
    if (!nj["parent"].is_null()) n.parent = NodeId{field<std::uint32_t>(nj, "parent", w)};
    if (!nj.contains("action")) detail::throw_missing("action", w);
    if (!nj["action"].is_null()) n.incoming_action = Action{field<std::string>(nj, "action", w)};
    n.observation = field<std::string>(nj, "observation", w);
    n.state = State{field<std::string>(nj, "state", w), field<bool>(nj, "terminal", w)};
    n.elo_score = field<double>(nj, "elo", w);
    n.update_count = field<std::uint64_t>(nj, "updates", w);
    for (std::uint32_t c : field<std::vector<std::uint32_t>>(nj, "children", w)) n.children.push_back(NodeId{c});
    n.finished_successfully = field<bool>(nj, "finished", w);
    n.truncated = field<bool>(nj, "truncated", w);
    n.stale = field<bool>(nj, "stale", w);
    n.depth = field<std::uint32_t>(nj, "depth", w);
    out.push_back(std::move(n));
  }
  try {
    return DecisionTree::from_nodes(std::move(out), config);
  } catch (const std::exception& e) {
    throw FormatError(where + ": inconsistent tree: " + e.what());
  }
}

NodeId leaf_from_json(const Json& v, const DecisionTree& tree, const std::string& where) {
  if (!v.is_number_unsigned()) throw FormatError(where + ": expected a node id");
  const NodeId id{v.get<std::uint32_t>()};
  if (!tree.contains(id)) throw FormatError(where + ": unknown node " + std::to_string(to_index(id)));
  return id;
}

Json rounds_to_json(const std::vector<RoundRecord>& rounds) {
  Json out = Json::array();
  for (const RoundRecord& r : rounds) {
    Json rj;
    rj["index"] = r.index;
    rj["walk"] = Json::array();
    for (NodeId n : r.walk) rj["walk"].push_back(to_index(n));
    rj["expanded_from"] = to_index(r.expanded_from);
    rj["new_leaf"] = to_index(r.new_leaf);
    rj["truncated"] = r.truncated;
    rj["judgments"] = Json::array();
    for (const JudgmentEvent& e : r.judgments) {
      rj["judgments"].push_back(Json{{"new_leaf", to_index(e.new_leaf)},
                                     {"opponent_leaf", to_index(e.opponent_leaf)},
                                     {"outcome_for_new", e.outcome_for_new.value()},
                                     {"new_elo_before", e.new_elo_before},
                                     {"new_elo_after", e.new_elo_after},
                                     {"opponent_elo_before", e.opponent_elo_before},
                                     {"opponent_elo_after", e.opponent_elo_after},
                                     {"judge_calls", e.judge_calls_consumed}});
    }
    rj["judge_failures"] = Json::array();
    for (const JudgmentFailure& f : r.judge_failures) {
      rj["judge_failures"].push_back(Json{{"new_leaf", to_index(f.new_leaf)},
                                          {"opponent_leaf", to_index(f.opponent_leaf)},
                                          {"message", f.message},
                                          {"judge_calls", f.judge_calls_consumed}});
    }
    out.push_back(rj);
  }
  return out;
}

std::vector<RoundRecord> rounds_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw FormatError(where + ": 'rounds' must be an array");
  std::vector<RoundRecord> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = where + " round #" + std::to_string(i);
    const Json& rj = j[i];
    RoundRecord r;
    r.index = field<std::uint32_t>(rj, "index", w);
    for (std::uint32_t n : field<std::vector<std::uint32_t>>(rj, "walk", w)) r.walk.push_back(NodeId{n});
    r.expanded_from = NodeId{field<std::uint32_t>(rj, "expanded_from", w)};
    r.new_leaf = NodeId{field<std::uint32_t>(rj, "new_leaf", w)};
    r.truncated = field<bool>(rj, "truncated", w);
    for (const Json& e : field<Json>(rj, "judgments", w)) {
      JudgmentEvent ev;
      ev.new_leaf = NodeId{field<std::uint32_t>(e, "new_leaf", w)};
      ev.opponent_leaf = NodeId{field<std::uint32_t>(e, "opponent_leaf", w)};
      try {
        ev.outcome_for_new = ComparisonOutcome::from_value(field<double>(e, "outcome_for_new", w));
      } catch (const std::invalid_argument& err) {
        throw FormatError(w + ": " + err.what());
      }
      ev.new_elo_before = field<double>(e, "new_elo_before", w);
      ev.new_elo_after = field<double>(e, "new_elo_after", w);
      ev.opponent_elo_before = field<double>(e, "opponent_elo_before", w);
      ev.opponent_elo_after = field<double>(e, "opponent_elo_after", w);
      ev.judge_calls_consumed = field<std::uint32_t>(e, "judge_calls", w);
      r.judgments.push_back(ev);
    }
    for (const Json& f : field<Json>(rj, "judge_failures", w)) {
      r.judge_failures.push_back({NodeId{field<std::uint32_t>(f, "new_leaf", w)},
                                  NodeId{field<std::uint32_t>(f, "opponent_leaf", w)},
                                  field<std::string>(f, "message", w),
                                  field<std::uint32_t>(f, "judge_calls", w)});
    }
    out.push_back(std::move(r));
  }
  return out;
}

Json record_to_json(const RunRecord& r) {
  Json j;
  j["format"] = kRecordFormat;
  j["version"] = kVersion;
  j["task_id"] = r.task_id();
  j["method"] = r.method();
  j["seed"] = r.seed;
  j["passed"] = r.passed;
  j["flagged"] = r.flagged();
  j["truncated"] = r.result.truncated;
  j["pass_on_any"] = r.result.pass_on_any;
  j["wall_time_ms"] = r.wall_time_ms;
  const LedgerSnapshot& l = r.result.ledger;
  j["ledger"] = Json{{"max_calls", l.max_calls},
                     {"environment_steps", l.environment_steps},
                     {"judge_trials", l.judge_trials},
                     {"used", l.used()}};
  j["selected"] = r.result.selected ? Json(to_index(r.result.selected->leaf)) : Json(nullptr);
  j["sequences"] = Json::array();
  for (const DecisionSequence& s : r.result.sequences) j["sequences"].push_back(to_index(s.leaf));
  if (r.failures) {
    Json f = Json::object();
    for (const auto& [cat, fixed] : *r.failures) f[std::string(to_string(cat))] = fixed;
    j["failures"] = f;
  } else {
    j["failures"] = nullptr;
  }
  j["judge_errors"] = r.result.judge_errors;
  j["trace"] = r.result.trace;
  j["rounds"] = rounds_to_json(r.result.rounds);
  j["config"] = detail::config_to_json(r.config);
  j["world"] = detail::world_to_json(r.world);
  j["tree"] = tree_to_json(r.result.tree);
  return j;
}

bool passes(const SearchResult& result, const Environment& env) {
  if (!result.selected) return false;
  if (!result.pass_on_any) return env.is_success(result.tree.trail(*result.selected));
  return std::any_of(result.sequences.begin(), result.sequences.end(),
                     [&](const DecisionSequence& s) { return env.is_success(result.tree.trail(s)); });
}

std::string first_difference(const std::string& a, const std::string& b) {
  std::size_t line = 1;
  std::size_t start = 0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (a[i] != b[i]) {
      const std::size_t end_a = a.find('\n', i);
      const std::size_t end_b = b.find('\n', i);
      return "line " + std::to_string(line) + ": stored '" + a.substr(start, end_a - start) +
             "' vs replayed '" + b.substr(start, end_b - start) + "'";
    }
    if (a[i] == '\n') {
      ++line;
      start = i + 1;
    }
  }
  if (a.size() != b.size()) return "lengths differ after line " + std::to_string(line);
  return "";
}

}  // namespace

bool is_known_method(const std::string& method) {
  static const std::set<std::string> fixed = {"elo", "elo-rand", "cot", "bfs", "dfs", "dfsdt"};
  return fixed.contains(method) || cot_k(method).has_value();
}

RunRecord run_method(const WorldSpec& world_spec, const std::string& method, const RunConfig& config,
                     std::uint64_t seed) {
  if (!is_known_method(method)) throw std::invalid_argument("unknown method '" + method + "'");
  config.validate();
  World world = make_world(world_spec);
  const Environment& env = *world.env;
  BaselineConfig baseline = config.baselines;
  baseline.budget = config.budget;
  auto judge = [&] { return make_judge(config.judge); };

  const auto started = std::chrono::steady_clock::now();
  std::optional<SearchResult> result;
  if (method == "elo" || method == "elo-rand") {
    EloSearchConfig ec{config.elo, config.budget, config.judgment,
                       method == "elo" ? FinalSelection::kElo : FinalSelection::kRandom};
    result.emplace(run_elo_search(env, *world.sampler, *judge(), ec, seed));
  } else if (method == "cot") {
    result.emplace(cot_search(env, *world.sampler, config.budget, seed));
  } else if (const auto k = cot_k(method)) {
    result.emplace(cot_at_k_search(*k, env, *world.sampler, config.budget, seed));
  } else if (method == "bfs") {
    result.emplace(bfs_search(env, *world.sampler, *judge(), baseline, seed));
  } else if (method == "dfs") {
    result.emplace(dfs_search(env, *world.sampler, baseline, seed));
  } else {
    result.emplace(dfsdt_search(env, *world.sampler, *judge(), baseline, seed));
  }
  const auto elapsed = std::chrono::steady_clock::now() - started;

  RunRecord record(world_spec, config, seed, std::move(*result));
  record.passed = passes(record.result, env);
  if (const auto* tool = dynamic_cast<const SyntheticToolWorld*>(&env)) {
    record.failures = tool->classify_failure(
        record.result.selected ? record.result.tree.trail(*record.result.selected) : Trail{});
  }
  record.wall_time_ms = std::chrono::duration<double, std::milli>(elapsed).count();
  return record;
}

std::string serialize_run_record(const RunRecord& record) {
  return detail::dump_document(record_to_json(record));
}

RunRecord parse_run_record(const std::string& json_text) {
  const Json doc = detail::parse_document(json_text, kRecordFormat, kVersion);
  const std::string where = "run record";
  RunConfig config = detail::config_from_json(field<Json>(doc, "config", where), where + " config");
  WorldSpec world = detail::world_from_json(field<Json>(doc, "world", where), where + " world");
  DecisionTree tree = tree_from_json(field<Json>(doc, "tree", where), where + " tree");

  SearchResult result(field<std::string>(doc, "method", where), std::move(tree));
  const DecisionTree& t = result.tree;
  result.truncated = field<bool>(doc, "truncated", where);
  result.pass_on_any = field<bool>(doc, "pass_on_any", where);
  const Json ledger = field<Json>(doc, "ledger", where);
  result.ledger.max_calls = field<std::uint64_t>(ledger, "max_calls", where + " ledger");
  result.ledger.environment_steps = field<std::uint64_t>(ledger, "environment_steps", where + " ledger");
  result.ledger.judge_trials = field<std::uint64_t>(ledger, "judge_trials", where + " ledger");
  if (result.ledger.used() > result.ledger.max_calls) {
    throw FormatError(where + " ledger: usage exceeds max_calls");
  }
  try {
    for (const Json& v : field<Json>(doc, "sequences", where)) {
      result.sequences.push_back(t.sequence_of(leaf_from_json(v, t, where + " sequences")));
    }
    const Json selected = field<Json>(doc, "selected", where);
    if (!selected.is_null()) result.selected = t.sequence_of(leaf_from_json(selected, t, where + " selected"));
  } catch (const std::invalid_argument& e) {
    throw FormatError(where + ": " + e.what());
  }
  result.judge_errors = field<std::vector<std::string>>(doc, "judge_errors", where);
  result.trace = field<std::vector<std::string>>(doc, "trace", where);
  result.rounds = rounds_from_json(field<Json>(doc, "rounds", where), where);

  RunRecord record(std::move(world), std::move(config), field<std::uint64_t>(doc, "seed", where),
                   std::move(result));
  if (record.task_id() != field<std::string>(doc, "task_id", where)) {
    throw FormatError(where + ": task_id does not match the embedded world");
  }
  record.passed = field<bool>(doc, "passed", where);
  record.wall_time_ms = field<double>(doc, "wall_time_ms", where);
  const Json failures = field<Json>(doc, "failures", where);
  if (!failures.is_null()) {
    FailureReport report;
    for (const auto& [key, value] : failures.items()) {
      if (!value.is_boolean()) throw FormatError(where + " failures: '" + key + "' must be a boolean");
      report[category_from_string(key, where + " failures")] = value.get<bool>();
    }
    record.failures = report;
  }
  return record;
}

void write_run_record(const std::string& path, const RunRecord& record) {
  detail::write_text_file(path, serialize_run_record(record));
}

RunRecord read_run_record(const std::string& path) {
  try {
    return parse_run_record(detail::read_text_file(path));
  } catch (const VersionMismatch& e) {
    throw VersionMismatch(path + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::string serialize_tree(const DecisionTree& tree) {
  Json doc;
  doc["format"] = kTreeFormat;
  doc["version"] = kVersion;
  const Json body = tree_to_json(tree);
  for (const auto& [k, v] : body.items()) doc[k] = v;
  return detail::dump_document(doc);
}

DecisionTree parse_tree(const std::string& json_text) {
  return tree_from_json(detail::parse_document(json_text, kTreeFormat, kVersion), "tree");
}

std::string format_tree(const DecisionTree& tree) {
  std::string out;
  std::vector<NodeId> stack{tree.root()};
  while (!stack.empty()) {
    const DecisionNode& n = tree.node(stack.back());
    stack.pop_back();
    char line[160];
    std::snprintf(line, sizeof line, "#%u depth=%u elo=%.3f updates=%llu", to_index(n.id), n.depth,
                  n.elo_score, static_cast<unsigned long long>(n.update_count));
    out += std::string(2 * n.depth, ' ') + line;
    if (n.state.is_terminal) out += " terminal";
    if (n.finished_successfully) out += " finished";
    if (n.truncated) out += " truncated";
    out += n.incoming_action ? "  " + n.incoming_action->payload : "  (root)";
    out += "\n";
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

ReplayReport replay_run(const RunRecord& record) {
  RunRecord fresh = run_method(record.world, record.method(), record.config, record.seed);
  RunRecord stored_copy = parse_run_record(serialize_run_record(record));
  stored_copy.wall_time_ms = 0.0;
  fresh.wall_time_ms = 0.0;
  ReplayReport report;
  report.stored = serialize_run_record(stored_copy);
  report.replayed = serialize_run_record(fresh);
  report.identical = report.stored == report.replayed;
  if (!report.identical) report.first_difference = first_difference(report.stored, report.replayed);
  return report;
}

RunSummary summarize(const RunRecord& record, const Environment& env) {
  RunSummary s;
  s.task_id = record.task_id();
  s.method = record.method();
  s.budget = record.config.budget.max_calls;
  s.seed = record.seed;
  s.passed = record.passed;
  s.failures = record.failures;
  s.ledger = record.result.ledger;
  if (record.result.selected) {
    s.has_selection = true;
    s.selected_score = record.result.tree.node(record.result.selected->leaf).elo_score;
    s.selected_candidate = make_candidate(record.result.tree.trail(*record.result.selected), env);
  }
  return s;
}

std::vector<PassRatePoint> pass_rate_curve(const std::vector<RunSummary>& runs) {
  std::vector<std::string> methods;
  std::map<std::pair<std::string, std::uint64_t>, PassRatePoint> cells;
  for (const RunSummary& r : runs) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    PassRatePoint& p = cells[{r.method, r.budget}];
    p.method = r.method;
    p.budget = r.budget;
    ++p.runs;
    if (r.passed) ++p.passed;
  }
  std::vector<PassRatePoint> out;
  for (const std::string& m : methods) {
    for (auto& [key, p] : cells) {
      if (key.first != m) continue;
      p.pass_rate = static_cast<double>(p.passed) / static_cast<double>(p.runs);
      out.push_back(p);
    }
  }
  return out;
}

std::vector<BucketRow> elo_buckets(const std::vector<RunSummary>& runs, const std::string& method,
                                   double* score_min, double* score_max) {
  std::vector<const RunSummary*> chosen;
  for (const RunSummary& r : runs) {
    if (r.method == method && r.has_selection && r.error.empty()) chosen.push_back(&r);
  }
  double lo = 0.0;
  double hi = 0.0;
  if (!chosen.empty()) {
    lo = hi = chosen.front()->selected_score;
    for (const RunSummary* r : chosen) {
      lo = std::min(lo, r->selected_score);
      hi = std::max(hi, r->selected_score);
    }
  }
  if (score_min) *score_min = lo;
  if (score_max) *score_max = hi;
  std::vector<BucketRow> rows(kBuckets);
  for (std::uint32_t i = 0; i < kBuckets; ++i) {
    rows[i].index = i;
    rows[i].lower = static_cast<double>(i) / kBuckets;
    rows[i].upper = static_cast<double>(i + 1) / kBuckets;
  }
  for (const RunSummary* r : chosen) {
    const double norm = hi > lo ? (r->selected_score - lo) / (hi - lo) : 0.0;
    const auto idx = std::min<std::uint32_t>(kBuckets - 1, static_cast<std::uint32_t>(norm * kBuckets));
    ++rows[idx].runs;
    if (r->passed) ++rows[idx].passed;
  }
  for (BucketRow& b : rows) {
    b.pass_rate = b.runs ? static_cast<double>(b.passed) / static_cast<double>(b.runs) : 0.0;
  }
  return rows;
}

std::vector<FailureRow> failure_table(const std::vector<RunSummary>& runs) {
  std::vector<std::string> methods;
  for (const RunSummary& r : runs) {
    if (r.failures && std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
      methods.push_back(r.method);
    }
  }
  std::vector<FailureRow> out;
  for (const std::string& m : methods) {
    for (FailureCategory c : kCategories) {
      FailureRow row;
      row.method = m;
      row.category = c;
      for (const RunSummary& r : runs) {
        if (r.method != m || !r.failures) continue;
        ++row.runs;
        const auto it = r.failures->find(c);
        if (it == r.failures->end()) continue;
        ++row.occurrences;
        if (it->second) ++row.fixed;
      }
      row.incidence = row.runs ? static_cast<double>(row.occurrences) / static_cast<double>(row.runs) : 0.0;
      row.fix_ratio = row.occurrences ? static_cast<double>(row.fixed) / static_cast<double>(row.occurrences) : 0.0;
      out.push_back(row);
    }
  }
  return out;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman needs equally long inputs");
  const std::size_t n = x.size();
  if (n < 2) return std::nan("");
  const std::vector<double> rx = fractional_ranks_descending(x);
  const std::vector<double> ry = fractional_ranks_descending(y);
  const double mean = (static_cast<double>(n) + 1.0) / 2.0;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nan("");
  return sxy / std::sqrt(sxx * syy);
}

std::vector<RankRow> preference_ranks(const std::vector<RunSummary>& runs,
                                      const std::vector<WorldSpec>& worlds, const JudgeSpec& judge_spec,
                                      std::uint64_t budget, std::uint32_t trials) {
  std::map<std::string, const WorldSpec*> by_id;
  for (const WorldSpec& w : worlds) by_id[world_id(w)] = &w;

  std::vector<std::string> methods;
  std::map<std::pair<std::string, std::uint64_t>, std::vector<const RunSummary*>> groups;
  for (const RunSummary& r : runs) {
    if (r.budget != budget) continue;
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    groups[{r.task_id, r.seed}].push_back(&r);
  }
  std::map<std::string, std::pair<double, std::size_t>> totals;
  for (const auto& [key, members] : groups) {
    const auto world = by_id.find(key.first);
    if (world == by_id.end()) throw std::invalid_argument("no world for task " + key.first);
    std::vector<Candidate> candidates;
    std::vector<const RunSummary*> ranked;
    std::vector<const RunSummary*> missing;
    for (const RunSummary* r : members) {
      if (r->selected_candidate) {
        candidates.push_back(*r->selected_candidate);
        ranked.push_back(r);
      } else {
        missing.push_back(r);
      }
    }
    std::vector<double> ranks(ranked.size(), 1.0);
    if (ranked.size() >= 2) {
      auto judge = make_judge(judge_spec);
      const TaskContext context = make_world(*world->second).env->task_context();
      ranks = ranking_tournament(candidates, *judge, context, trials,
                                 mix64(key.second ^ stable_hash(key.first)))
                  .mean_rank;
    }
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      auto& t = totals[ranked[i]->method];
      t.first += ranks[i];
      ++t.second;
    }
    const double shared = (static_cast<double>(ranked.size() + 1) + static_cast<double>(members.size())) / 2.0;
    for (const RunSummary* r : missing) {
      auto& t = totals[r->method];
      t.first += shared;
      ++t.second;
    }
  }
  std::vector<RankRow> out;
  for (const std::string& m : methods) {
    const auto& t = totals[m];
    out.push_back({m, budget, t.second, t.second ? t.first / static_cast<double>(t.second) : 0.0});
  }
  return out;
}

SuiteMetrics compute_metrics(const std::vector<RunSummary>& runs, const std::vector<WorldSpec>& worlds,
                             const RunConfig& config) {
  SuiteMetrics m;
  for (const RunSummary& r : runs) {
    ++m.total_runs;
    if (r.passed) ++m.passed_runs;
    if (!r.error.empty()) ++m.failed_cells;
  }
  m.pass_rate = m.total_runs ? static_cast<double>(m.passed_runs) / static_cast<double>(m.total_runs) : 0.0;
  m.pass_rates = pass_rate_curve(runs);

  std::uint64_t rank_budget = config.suite.rank_budget;
  if (rank_budget == 0) {
    for (const RunSummary& r : runs) rank_budget = std::max(rank_budget, r.budget);
  }
  m.ranks = preference_ranks(runs, worlds, config.judge, rank_budget, config.suite.rank_trials);

  m.buckets = elo_buckets(runs, "elo", &m.bucket_score_min, &m.bucket_score_max);
  std::vector<double> xs;
  std::vector<double> ys;
  for (const BucketRow& b : m.buckets) {
    if (b.runs == 0) continue;
    xs.push_back(b.index);
    ys.push_back(b.pass_rate);
  }
  m.bucket_spearman = spearman(xs, ys);
  m.failures = failure_table(runs);
  return m;
}

SuiteOutcome run_suite(const std::vector<WorldSpec>& worlds, const RunConfig& config,
                       const std::function<void(const RunRecord&)>& on_record) {
  if (worlds.empty()) throw std::invalid_argument("suite has no tasks");
  const SuiteSettings& s = config.suite;
  if (s.methods.empty() || s.budgets.empty() || s.seeds.empty()) {
    throw std::invalid_argument("suite grid needs methods, budgets and seeds");
  }
  for (const std::string& m : s.methods) {
    if (!is_known_method(m)) throw std::invalid_argument("unknown method '" + m + "'");
  }
  config.validate();

  struct Cell {
    std::size_t world;
    std::string method;
    std::uint64_t budget;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (std::size_t w = 0; w < worlds.size(); ++w) {
    for (const std::string& m : s.methods) {
      for (std::uint64_t b : s.budgets) {
        for (std::uint64_t seed : s.seeds) cells.push_back({w, m, b, seed});
      }
    }
  }

  SuiteOutcome outcome;
  outcome.runs.resize(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex record_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& c = cells[i];
      RunSummary& out = outcome.runs[i];
      out.task_id = world_id(worlds[c.world]);
      out.method = c.method;
      out.budget = c.budget;
      out.seed = c.seed;
      try {
        RunConfig cell_config = config;
        cell_config.budget.max_calls = c.budget;
        const RunRecord record = run_method(worlds[c.world], c.method, cell_config, c.seed);
        const World world = make_world(worlds[c.world]);
        out = summarize(record, *world.env);
        if (on_record) {
          std::lock_guard lock(record_mu);
          on_record(record);
        }
      } catch (const std::exception& e) {
        out.error = e.what();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(s.parallel, cells.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  outcome.metrics = compute_metrics(outcome.runs, worlds, config);
  return outcome;
}

std::string serialize_metrics(const SuiteMetrics& m) {
  Json doc;
  doc["format"] = kMetricsFormat;
  doc["version"] = kVersion;
  doc["total_runs"] = m.total_runs;
  doc["passed_runs"] = m.passed_runs;
  doc["pass_rate"] = m.pass_rate;
  doc["failed_cells"] = m.failed_cells;
  doc["pass_rates"] = Json::array();
  for (const PassRatePoint& p : m.pass_rates) {
    doc["pass_rates"].push_back(Json{{"method", p.method}, {"budget", p.budget}, {"runs", p.runs},
                                     {"passed", p.passed}, {"pass_rate", p.pass_rate}});
  }
  doc["preference_ranks"] = Json::array();
  for (const RankRow& r : m.ranks) {
    doc["preference_ranks"].push_back(
        Json{{"method", r.method}, {"budget", r.budget}, {"cells", r.cells}, {"mean_rank", r.mean_rank}});
  }
  doc["elo_buckets"] = Json::array();
  for (const BucketRow& b : m.buckets) {
    doc["elo_buckets"].push_back(Json{{"index", b.index}, {"lower", b.lower}, {"upper", b.upper},
                                      {"runs", b.runs}, {"passed", b.passed}, {"pass_rate", b.pass_rate}});
  }
  doc["bucket_spearman"] = std::isnan(m.bucket_spearman) ? Json(nullptr) : Json(m.bucket_spearman);
  doc["bucket_score_min"] = m.bucket_score_min;
  doc["bucket_score_max"] = m.bucket_score_max;
  doc["failures"] = Json::array();
  for (const FailureRow& f : m.failures) {
    doc["failures"].push_back(Json{{"method", f.method},
                                   {"category", to_string(f.category)},
                                   {"runs", f.runs},
                                   {"occurrences", f.occurrences},
                                   {"incidence", f.incidence},
                                   {"fixed", f.fixed},
                                   {"fix_ratio", f.fix_ratio}});
  }
  return detail::dump_document(doc);
}

SuiteMetrics parse_metrics(const std::string& json_text) {
  const Json doc = detail::parse_document(json_text, kMetricsFormat, kVersion);
  const std::string w = "suite metrics";
  SuiteMetrics m;
  m.total_runs = field<std::size_t>(doc, "total_runs", w);
  m.passed_runs = field<std::size_t>(doc, "passed_runs", w);
  m.pass_rate = field<double>(doc, "pass_rate", w);
  m.failed_cells = field<std::size_t>(doc, "failed_cells", w);
  for (const Json& p : field<Json>(doc, "pass_rates", w)) {
    m.pass_rates.push_back({field<std::string>(p, "method", w), field<std::uint64_t>(p, "budget", w),
                            field<std::size_t>(p, "runs", w), field<std::size_t>(p, "passed", w),
                            field<double>(p, "pass_rate", w)});
  }
  for (const Json& r : field<Json>(doc, "preference_ranks", w)) {
    m.ranks.push_back({field<std::string>(r, "method", w), field<std::uint64_t>(r, "budget", w),
                       field<std::size_t>(r, "cells", w), field<double>(r, "mean_rank", w)});
  }
  for (const Json& b : field<Json>(doc, "elo_buckets", w)) {
    m.buckets.push_back({field<std::uint32_t>(b, "index", w), field<double>(b, "lower", w),
                         field<double>(b, "upper", w), field<std::size_t>(b, "runs", w),
                         field<std::size_t>(b, "passed", w), field<double>(b, "pass_rate", w)});
  }
  const Json rho = field<Json>(doc, "bucket_spearman", w);
  m.bucket_spearman = rho.is_null() ? std::nan("") : field<double>(doc, "bucket_spearman", w);
  m.bucket_score_min = field<double>(doc, "bucket_score_min", w);
  m.bucket_score_max = field<double>(doc, "bucket_score_max", w);
  for (const Json& f : field<Json>(doc, "failures", w)) {
    FailureRow row;
    row.method = field<std::string>(f, "method", w);
    row.category = category_from_string(field<std::string>(f, "category", w), w);
    row.runs = field<std::size_t>(f, "runs", w);
    row.occurrences = field<std::size_t>(f, "occurrences", w);
    row.incidence = field<double>(f, "incidence", w);
    row.fixed = field<std::size_t>(f, "fixed", w);
    row.fix_ratio = field<double>(f, "fix_ratio", w);
    m.failures.push_back(row);
  }
  return m;
}

std::string pass_rates_csv(const std::vector<PassRatePoint>& rows) {
  std::string out = "method,budget,runs,passed,pass_rate\n";
  for (const PassRatePoint& p : rows) {
    out += p.method + "," + std::to_string(p.budget) + "," + std::to_string(p.runs) + "," +
           std::to_string(p.passed) + "," + fixed6(p.pass_rate) + "\n";
  }
  return out;
}

std::string preference_ranks_csv(const std::vector<RankRow>& rows) {
  std::string out = "method,budget,cells,mean_rank\n";
  for (const RankRow& r : rows) {
    out += r.method + "," + std::to_string(r.budget) + "," + std::to_string(r.cells) + "," +
           fixed6(r.mean_rank) + "\n";
  }
  return out;
}

std::string elo_buckets_csv(const std::vector<BucketRow>& rows) {
  std::string out = "bucket,lower,upper,runs,passed,pass_rate\n";
  for (const BucketRow& b : rows) {
    out += std::to_string(b.index) + "," + fixed6(b.lower) + "," + fixed6(b.upper) + "," +
           std::to_string(b.runs) + "," + std::to_string(b.passed) + "," + fixed6(b.pass_rate) + "\n";
  }
  return out;
}

std::string failures_csv(const std::vector<FailureRow>& rows) {
  std::string out = "method,category,runs,occurrences,incidence,fixed,fix_ratio\n";
  for (const FailureRow& f : rows) {
    out += f.method + "," + std::string(to_string(f.category)) + "," + std::to_string(f.runs) + "," +
           std::to_string(f.occurrences) + "," + fixed6(f.incidence) + "," + std::to_string(f.fixed) +
           "," + fixed6(f.fix_ratio) + "\n";
  }
  return out;
}

void export_metrics(const std::string& dir, const SuiteMetrics& metrics) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  detail::write_text_file((base / "metrics.json").string(), serialize_metrics(metrics));
  detail::write_text_file((base / "pass_rates.csv").string(), pass_rates_csv(metrics.pass_rates));
  detail::write_text_file((base / "preference_ranks.csv").string(), preference_ranks_csv(metrics.ranks));
  detail::write_text_file((base / "elo_buckets.csv").string(), elo_buckets_csv(metrics.buckets));
  detail::write_text_file((base / "failures.csv").string(), failures_csv(metrics.failures));
}

}  // namespace elodec
