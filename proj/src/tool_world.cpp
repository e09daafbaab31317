#include "elodec/tool_world.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace elodec {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::string_view kOk = "OK ";
constexpr std::string_view kCallError = "ERROR[tool_call_error] ";
constexpr std::string_view kUnavailable = "ERROR[unavailable_tool] ";
constexpr std::string_view kHallucinated = "ERROR[hallucinated_tool] ";
constexpr std::string_view kFinished = "FINISH ";
constexpr std::string_view kMalformed = "?";

struct ToolState {
  std::string task;
  std::uint32_t step = 0;
  std::vector<std::string> succeeded;  // sorted, distinct
  bool finished = false;
};

std::string encode(const ToolState& s) {
  std::string out = s.task + "|" + std::to_string(s.step) + "|";
  for (std::size_t i = 0; i < s.succeeded.size(); ++i) {
    if (i > 0) out += ',';
    out += s.succeeded[i];
  }
  out += s.finished ? "|1" : "|0";
  return out;
}

std::optional<ToolState> decode(const std::string& payload) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t bar = payload.find('|', start);
    parts.push_back(payload.substr(start, bar - start));
    if (bar == std::string::npos) break;
    start = bar + 1;
  }
  if (parts.size() != 4 || parts[1].empty() ||
      !std::all_of(parts[1].begin(), parts[1].end(), ::isdigit) ||
      (parts[3] != "0" && parts[3] != "1")) {
    return std::nullopt;
  }
  ToolState s;
  s.task = parts[0];
  s.step = static_cast<std::uint32_t>(std::stoul(parts[1]));
  std::size_t pos = 0;
  while (pos < parts[2].size()) {
    const std::size_t comma = parts[2].find(',', pos);
    s.succeeded.push_back(parts[2].substr(pos, comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  s.finished = parts[3] == "1";
  return s;
}

struct ParsedCall {
  std::string name;
  Json arguments = Json::object();
};

std::optional<ParsedCall> parse_call(const Action& action) {
  Json j = Json::parse(action.payload, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("name") || !j["name"].is_string()) {
    return std::nullopt;
  }
  ParsedCall call;
  call.name = j["name"].get<std::string>();
  if (j.contains("arguments")) {
    if (!j["arguments"].is_object()) return std::nullopt;
    call.arguments = j["arguments"];
  }
  return call;
}

bool valid_identifier(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-' || c == '.';
  });
}

std::string_view kind_name(ParamKind kind) {
  switch (kind) {
    case ParamKind::kString:
      return "string";
    case ParamKind::kNumber:
      return "number";
    case ParamKind::kBoolean:
      return "boolean";
  }
  return "string";
}

bool matches_kind(const Json& value, ParamKind kind) {
  switch (kind) {
    case ParamKind::kString:
      return value.is_string();
    case ParamKind::kNumber:
      return value.is_number();
    case ParamKind::kBoolean:
      return value.is_boolean();
  }
  return false;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += items[i];
  }
  return out;
}

std::string hex_token(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf, 8);
}

const ToolSpec* find_tool(const std::vector<ToolSpec>& tools, const std::string& name) {
  for (const ToolSpec& t : tools) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::string group_of(const ToolSpec& tool) { return tool.group.empty() ? "tool:" + tool.name : "group:" + tool.group; }

bool in_unit_interval(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

std::string_view to_string(FailureCategory category) {
  switch (category) {
    case FailureCategory::kUnavailableTool:
      return "UNAVAILABLE_TOOL";
    case FailureCategory::kToolCallError:
      return "TOOL_CALL_ERROR";
    case FailureCategory::kHallucinatedTool:
      return "HALLUCINATED_TOOL";
    case FailureCategory::kDecisionFailure:
      return "DECISION_FAILURE";
  }
  return "DECISION_FAILURE";
}

void ToolTask::validate() const {
  if (!valid_identifier(id)) throw std::invalid_argument("task id must be a non-empty identifier");
  if (query.empty()) throw std::invalid_argument("task " + id + ": empty query");
  if (tools.empty()) throw std::invalid_argument("task " + id + ": no tools");
  std::set<std::string> names;
  for (const ToolSpec& t : tools) {
    if (!valid_identifier(t.name)) throw std::invalid_argument("task " + id + ": bad tool name '" + t.name + "'");
    if (t.name == SyntheticToolWorld::kFinishName) {
      throw std::invalid_argument("task " + id + ": tool name Finish is reserved");
    }
    if (!names.insert(t.name).second) throw std::invalid_argument("task " + id + ": duplicate tool " + t.name);
    if (!in_unit_interval(t.failure.probability)) {
      throw std::invalid_argument("task " + id + ": failure probability outside [0, 1]");
    }
    std::set<std::string> params;
    for (const ParamSpec& p : t.parameters) {
      if (!params.insert(p.name).second) {
        throw std::invalid_argument("task " + id + ": duplicate parameter " + p.name);
      }
    }
  }
  for (double p : {agent.hallucination_rate, agent.param_error_rate, agent.loop_rate,
                   agent.finish_base}) {
    if (!in_unit_interval(p)) throw std::invalid_argument("task " + id + ": agent rate outside [0, 1]");
  }
}

SyntheticToolWorld::SyntheticToolWorld(ToolTask task) : task_(std::move(task)) { task_.validate(); }

TaskContext SyntheticToolWorld::task_context() const { return {task_.description, task_.query}; }

State SyntheticToolWorld::initial_state() const {
  return State{encode(ToolState{task_.id, 0, {}, false}), false};
}

bool SyntheticToolWorld::is_finish_action(const Action& action) const {
  const auto call = parse_call(action);
  return call && call->name == kFinishName;
}

Action SyntheticToolWorld::tool_call(const std::string& name, const std::string& arguments_json) {
  Json j;
  j["name"] = name;
  j["arguments"] = Json::parse(arguments_json);
  return Action{j.dump()};
}

Action SyntheticToolWorld::finish() { return Action{R"({"name":"Finish","arguments":{}})"}; }

PathStep SyntheticToolWorld::step(const State& state, const Action& action) const {
  if (state.is_terminal) throw std::invalid_argument("tool world: step from a terminal state");
  std::optional<ToolState> s = decode(state.payload);
  if (!s || s->task != task_.id) throw std::invalid_argument("tool world: foreign state " + state.payload);

  PathStep out;
  out.action = action;
  ToolState next = *s;
  ++next.step;
  const std::uint64_t draw = stable_hash(state.payload + "\x1f" + action.payload, task_.fault_seed);

  const auto call = parse_call(action);
  if (!call) {
    out.observation = std::string(kCallError) + std::string(kMalformed) + ": malformed action";
  } else if (call->name == kFinishName) {
    next.finished = true;
    out.observation = std::string(kFinished) + "final answer submitted";
    out.finished = true;
  } else if (const ToolSpec* tool = find_tool(task_.tools, call->name); tool == nullptr) {
    out.observation = std::string(kHallucinated) + call->name + ": no such tool";
  } else if (tool->failure.kind == FailureMode::Kind::kUnavailable) {
    out.observation = std::string(kUnavailable) + tool->name + ": HTTP 404 Not Found";
  } else {
    std::vector<std::string> missing;
    std::vector<std::string> mismatched;
    for (const ParamSpec& p : tool->parameters) {
      auto it = call->arguments.find(p.name);
      if (it == call->arguments.end()) {
        if (p.required) missing.push_back(p.name);
      } else if (!matches_kind(*it, p.kind)) {
        mismatched.push_back(p.name + " (expected " + std::string(kind_name(p.kind)) + ")");
      }
    }
    const double u = static_cast<double>(draw >> 11) * 0x1.0p-53;
    if (!missing.empty()) {
      out.observation = std::string(kCallError) + tool->name +
                        ": missing mandatory parameter fields: " + join(missing, ", ");
    } else if (!mismatched.empty()) {
      out.observation = std::string(kCallError) + tool->name +
                        ": parameter format mismatch: " + join(mismatched, ", ");
    } else if (tool->failure.kind == FailureMode::Kind::kFlaky && u < tool->failure.probability) {
      out.observation = std::string(kUnavailable) + tool->name + ": HTTP 500 Internal Server Error";
    } else {
      auto pos = std::lower_bound(next.succeeded.begin(), next.succeeded.end(), tool->name);
      if (pos == next.succeeded.end() || *pos != tool->name) next.succeeded.insert(pos, tool->name);
      out.observation = std::string(kOk) + tool->name + ": result " + hex_token(mix64(draw));
    }
  }
  out.state = State{encode(next), next.finished};
  return out;
}

double SyntheticToolWorld::true_utility(const Trail& trail) const {
  if (trail.empty()) return 0.0;
  const std::optional<ToolState> s = decode(trail.back().state.payload);
  if (!s || s->task != task_.id) throw std::invalid_argument("tool world: foreign trail");
  std::map<std::string, double> best;
  for (const std::string& name : s->succeeded) {
    const ToolSpec* tool = find_tool(task_.tools, name);
    if (tool == nullptr) continue;
    const std::string g = group_of(*tool);
    auto it = best.find(g);
    if (it == best.end()) {
      best.emplace(g, tool->utility_contribution);
    } else {
      it->second = std::max(it->second, tool->utility_contribution);
    }
  }
  double total = s->finished ? task_.finish_bonus : 0.0;
  for (const auto& [g, v] : best) total += v;
  return total;
}

bool SyntheticToolWorld::is_success(const Trail& trail) const {
  return !trail.empty() && trail.back().finished && true_utility(trail) >= task_.success_threshold;
}

std::pair<double, double> SyntheticToolWorld::utility_bounds() const {
  std::map<std::string, std::pair<double, double>> groups;
  for (const ToolSpec& t : task_.tools) {
    auto [it, inserted] = groups.emplace(group_of(t), std::pair{0.0, 0.0});
    it->second.first = std::min(it->second.first, t.utility_contribution);
    it->second.second = std::max(it->second.second, t.utility_contribution);
  }
  double lo = std::min(0.0, task_.finish_bonus);
  double hi = std::max(0.0, task_.finish_bonus);
  for (const auto& [g, range] : groups) {
    lo += range.first;
    hi += range.second;
  }
  return {lo, hi};
}

ActionDescription SyntheticToolWorld::describe_action(const Action& action) const {
  const auto call = parse_call(action);
  if (!call) return {action.payload, ""};
  return {call->name, call->arguments.dump()};
}

FailureReport SyntheticToolWorld::classify_failure(const Trail& trail) const {
  struct Fault {
    FailureCategory category;
    std::string tool;
    std::size_t index;
  };
  std::vector<Fault> faults;
  std::vector<std::pair<std::string, std::size_t>> successes;

  auto tool_after = [](std::string_view obs, std::string_view prefix) {
    obs.remove_prefix(prefix.size());
    return std::string(obs.substr(0, obs.find(':')));
  };
  for (std::size_t i = 0; i < trail.size(); ++i) {
    const std::optional<ToolState> s = decode(trail[i].state.payload);
    if (!s || s->task != task_.id) {
      throw std::invalid_argument("classify_failure: step " + std::to_string(i) + " is not from task " + task_.id);
    }
    const std::string_view obs = trail[i].observation;
    if (obs.starts_with(kOk)) {
      successes.emplace_back(tool_after(obs, kOk), i);
    } else if (obs.starts_with(kCallError)) {
      faults.push_back({FailureCategory::kToolCallError, tool_after(obs, kCallError), i});
    } else if (obs.starts_with(kUnavailable)) {
      faults.push_back({FailureCategory::kUnavailableTool, tool_after(obs, kUnavailable), i});
    } else if (obs.starts_with(kHallucinated)) {
      faults.push_back({FailureCategory::kHallucinatedTool, tool_after(obs, kHallucinated), i});
    } else if (!obs.starts_with(kFinished)) {
      throw std::invalid_argument("classify_failure: unrecognised observation at step " + std::to_string(i));
    }
  }

  auto repaired = [&](const Fault& f) {
    for (const auto& [tool, index] : successes) {
      if (index <= f.index) continue;
      if (f.category == FailureCategory::kHallucinatedTool || f.tool == kMalformed || tool == f.tool) {
        return true;
      }
    }
    return false;
  };

  FailureReport report;
  for (const Fault& f : faults) {
    const bool fixed = repaired(f);
    auto [it, inserted] = report.emplace(f.category, fixed);
    if (!inserted) it->second = it->second && fixed;
  }
  if (report.empty() && !is_success(trail)) report.emplace(FailureCategory::kDecisionFailure, false);
  return report;
}

SimulatedAgent::SimulatedAgent(const ToolTask& task) : tools_(task.tools), profile_(task.agent) {
  if (profile_.hallucinated_names.empty()) {
    for (const ToolSpec& t : tools_) profile_.hallucinated_names.push_back(t.name + "_v2");
  }
}

Action SimulatedAgent::propose(const State& state, const Trail& history,
                               std::span<const Action> tried, Rng& rng) {
  const std::optional<ToolState> s = decode(state.payload);
  if (!s) throw std::invalid_argument("simulated agent: foreign state");

  if (!history.empty() && history.back().observation.starts_with("ERROR[") &&
      uniform01(rng) < profile_.loop_rate) {
    return history.back().action;
  }

  const double finish_p = std::min(
      0.95, profile_.finish_base + profile_.finish_per_success * static_cast<double>(s->succeeded.size()));
  if (uniform01(rng) < finish_p) return SyntheticToolWorld::finish();

  Json call;
  Json args = Json::object();
  if (uniform01(rng) < profile_.hallucination_rate) {
    call["name"] = profile_.hallucinated_names[uniform_index(rng, profile_.hallucinated_names.size())];
    call["arguments"] = args;
    return Action{call.dump()};
  }

  std::set<std::string> tried_names;
  for (const Action& a : tried) {
    if (auto c = parse_call(a)) tried_names.insert(c->name);
  }
  std::vector<double> weights;
  double total = 0.0;
  for (const ToolSpec& t : tools_) {
    auto prior = profile_.tool_priors.find(t.name);
    double w = prior == profile_.tool_priors.end() ? 1.0 : prior->second;
    if (!std::binary_search(s->succeeded.begin(), s->succeeded.end(), t.name)) w *= profile_.novelty_weight;
    if (tried_names.contains(t.name)) w *= profile_.sibling_penalty;
    weights.push_back(w);
    total += w;
  }
  double u = uniform01(rng) * total;
  std::size_t pick = tools_.size() - 1;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) {
      pick = i;
      break;
    }
    u -= weights[i];
  }
  const ToolSpec& tool = tools_[pick];

  for (const ParamSpec& p : tool.parameters) {
    const bool include = p.required || uniform01(rng) < 0.5;
    const bool faulty = p.required && uniform01(rng) < profile_.param_error_rate;
    const bool omit = faulty && uniform01(rng) < 0.5;
    const std::uint64_t v = uniform_index(rng, 100);
    if (!include || omit) continue;
    // A faulty value uses the wrong JSON kind.
    const ParamKind kind = faulty ? (p.kind == ParamKind::kString ? ParamKind::kNumber : ParamKind::kString) : p.kind;
    switch (kind) {
      case ParamKind::kString:
        args[p.name] = "v" + std::to_string(v);
        break;
      case ParamKind::kNumber:
        args[p.name] = v;
        break;
      case ParamKind::kBoolean:
        args[p.name] = v % 2 == 0;
        break;
    }
  }
  call["name"] = tool.name;
  call["arguments"] = args;
  return Action{call.dump()};
}

}  // namespace elodec
