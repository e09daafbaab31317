#include "elodec/suite.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "elodec/errors.hpp"
#include "elodec/random.hpp"
#include "json_util.hpp"
#include "suite_codec.hpp"

namespace elodec {

namespace {

using detail::field;
using detail::field_or;
using detail::Json;

constexpr std::string_view kFormat = "elodec.tool-suite";
constexpr int kVersion = 1;

std::string_view param_kind_name(ParamKind kind) {
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

ParamKind param_kind_from(const std::string& text, const std::string& where) {
  if (text == "string") return ParamKind::kString;
  if (text == "number") return ParamKind::kNumber;
  if (text == "boolean") return ParamKind::kBoolean;
  throw FormatError(where + ": unknown parameter kind '" + text + "'");
}

Json failure_to_json(const FailureMode& f) {
  Json j;
  switch (f.kind) {
    case FailureMode::Kind::kNone:
      j["kind"] = "none";
      break;
    case FailureMode::Kind::kUnavailable:
      j["kind"] = "unavailable";
      break;
    case FailureMode::Kind::kFlaky:
      j["kind"] = "flaky";
      j["probability"] = f.probability;
      break;
  }
  return j;
}

FailureMode failure_from_json(const Json& j, const std::string& where) {
  const auto kind = field<std::string>(j, "kind", where);
  if (kind == "none") return FailureMode::none();
  if (kind == "unavailable") return FailureMode::unavailable();
  if (kind == "flaky") return FailureMode::flaky(field<double>(j, "probability", where));
  throw FormatError(where + ": unknown failure kind '" + kind + "'");
}

Json agent_to_json(const AgentProfile& a) {
  Json j;
  j["hallucination_rate"] = a.hallucination_rate;
  j["param_error_rate"] = a.param_error_rate;
  j["loop_rate"] = a.loop_rate;
  j["finish_base"] = a.finish_base;
  j["finish_per_success"] = a.finish_per_success;
  j["novelty_weight"] = a.novelty_weight;
  j["sibling_penalty"] = a.sibling_penalty;
  j["tool_priors"] = Json::object();
  for (const auto& [name, w] : a.tool_priors) j["tool_priors"][name] = w;
  j["hallucinated_names"] = a.hallucinated_names;
  return j;
}

AgentProfile agent_from_json(const Json& j, const std::string& where) {
  AgentProfile a;
  a.hallucination_rate = field_or<double>(j, "hallucination_rate", a.hallucination_rate, where);
  a.param_error_rate = field_or<double>(j, "param_error_rate", a.param_error_rate, where);
  a.loop_rate = field_or<double>(j, "loop_rate", a.loop_rate, where);
  a.finish_base = field_or<double>(j, "finish_base", a.finish_base, where);
  a.finish_per_success = field_or<double>(j, "finish_per_success", a.finish_per_success, where);
  a.novelty_weight = field_or<double>(j, "novelty_weight", a.novelty_weight, where);
  a.sibling_penalty = field_or<double>(j, "sibling_penalty", a.sibling_penalty, where);
  a.tool_priors = field_or<std::map<std::string, double>>(j, "tool_priors", {}, where);
  a.hallucinated_names = field_or<std::vector<std::string>>(j, "hallucinated_names", {}, where);
  return a;
}

}  // namespace

namespace detail {

Json task_to_json(const ToolTask& t) {
  Json j;
  j["id"] = t.id;
  j["tier"] = t.tier;
  j["description"] = t.description;
  j["query"] = t.query;
  j["finish_bonus"] = t.finish_bonus;
  j["success_threshold"] = t.success_threshold;
  j["fault_seed"] = t.fault_seed;
  j["agent"] = agent_to_json(t.agent);
  j["tools"] = Json::array();
  for (const ToolSpec& tool : t.tools) {
    Json tj;
    tj["name"] = tool.name;
    tj["description"] = tool.description;
    tj["group"] = tool.group;
    tj["utility_contribution"] = tool.utility_contribution;
    tj["failure"] = failure_to_json(tool.failure);
    tj["parameters"] = Json::array();
    for (const ParamSpec& p : tool.parameters) {
      tj["parameters"].push_back(
          Json{{"name", p.name}, {"kind", param_kind_name(p.kind)}, {"required", p.required}});
    }
    j["tools"].push_back(tj);
  }
  return j;
}

ToolTask task_from_json(const Json& j, std::string where) {
  if (!j.is_object()) throw FormatError(where + ": not an object");
  ToolTask t;
  t.id = field<std::string>(j, "id", where);
  where += " (" + t.id + ")";
  t.tier = field_or<std::string>(j, "tier", "", where);
  t.description = field_or<std::string>(j, "description", "", where);
  t.query = field<std::string>(j, "query", where);
  t.finish_bonus = field_or<double>(j, "finish_bonus", 1.0, where);
  t.success_threshold = field<double>(j, "success_threshold", where);
  t.fault_seed = field_or<std::uint64_t>(j, "fault_seed", 0, where);
  if (j.contains("agent")) t.agent = agent_from_json(j["agent"], where + " agent");
  const auto tools = field<Json>(j, "tools", where);
  if (!tools.is_array()) throw FormatError(where + ": 'tools' must be an array");
  for (std::size_t i = 0; i < tools.size(); ++i) {
    const std::string tw = where + " tool #" + std::to_string(i);
    ToolSpec tool;
    tool.name = field<std::string>(tools[i], "name", tw);
    tool.description = field_or<std::string>(tools[i], "description", "", tw);
    tool.group = field_or<std::string>(tools[i], "group", "", tw);
    tool.utility_contribution = field_or<double>(tools[i], "utility_contribution", 0.0, tw);
    if (tools[i].contains("failure")) tool.failure = failure_from_json(tools[i]["failure"], tw);
    for (const Json& p : field_or<Json>(tools[i], "parameters", Json::array(), tw)) {
      ParamSpec spec;
      spec.name = field<std::string>(p, "name", tw);
      spec.kind = param_kind_from(field<std::string>(p, "kind", tw), tw);
      spec.required = field_or<bool>(p, "required", true, tw);
      tool.parameters.push_back(spec);
    }
    t.tools.push_back(std::move(tool));
  }
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(where + ": " + e.what());
  }
  return t;
}

}  // namespace detail

namespace {

constexpr const char* kVerbs[] = {"get", "search", "lookup", "fetch", "list", "check", "find", "query"};
constexpr const char* kNouns[] = {"weather",  "flights", "hotels",   "stock",    "news",
                                  "recipes",  "currency", "routes",  "reviews",  "calendar",
                                  "movies",   "lyrics",  "jobs",     "events",   "traffic",
                                  "exchange", "books",   "airports", "restaurants", "timezone"};
constexpr const char* kParamNames[] = {"query", "city", "date", "limit", "id", "lang", "verbose", "page"};

// The simulated agent reads the query, so tools it names look more promising.
constexpr double kRelevantPrior = 6.0;
// Utilities sit a few judge-noise units apart so that comparisons carry signal.
constexpr double kPrimaryUtility = 4.0;
constexpr double kAlternativeUtility = 2.8;
constexpr double kFinishBonus = 4.0;

template <typename T, std::size_t N>
const T& pick(const T (&items)[N], Rng& rng) {
  return items[uniform_index(rng, N)];
}

ToolSpec make_tool(std::set<std::string>& used, Rng& rng) {
  ToolSpec tool;
  do {
    tool.name = std::string(pick(kVerbs, rng)) + "_" + pick(kNouns, rng);
  } while (!used.insert(tool.name).second);
  tool.description = "Synthetic endpoint " + tool.name + ".";
  const std::size_t n_params = 1 + uniform_index(rng, 3);
  std::set<std::string> names;
  for (std::size_t i = 0; i < n_params; ++i) {
    std::string name;
    do {
      name = pick(kParamNames, rng);
    } while (!names.insert(name).second);
    const auto kind = static_cast<ParamKind>(uniform_index(rng, 3));
    tool.parameters.push_back({name, kind, i == 0 || uniform01(rng) < 0.5});
  }
  return tool;
}

}  // namespace

TaskSuite parse_suite(const std::string& json_text) {
  const Json doc = detail::parse_document(json_text, kFormat, kVersion);
  TaskSuite suite;
  suite.name = field_or<std::string>(doc, "name", "", "suite header");
  const auto tasks = field<Json>(doc, "tasks", "suite header");
  if (!tasks.is_array()) throw FormatError("suite: 'tasks' must be an array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    ToolTask t = detail::task_from_json(tasks[i], "task #" + std::to_string(i));
    if (!ids.insert(t.id).second) throw FormatError("task #" + std::to_string(i) + ": duplicate id " + t.id);
    suite.tasks.push_back(std::move(t));
  }
  return suite;
}

TaskSuite read_suite(const std::string& path) { return parse_suite(detail::read_text_file(path)); }

std::string serialize_suite(const TaskSuite& suite) {
  Json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["name"] = suite.name;
  doc["tasks"] = Json::array();
  for (const ToolTask& t : suite.tasks) doc["tasks"].push_back(detail::task_to_json(t));
  return detail::dump_document(doc);
}

void write_suite(const std::string& path, const TaskSuite& suite) {
  detail::write_text_file(path, serialize_suite(suite));
}

TierShape tier_shape(const std::string& tier) {
  if (tier == "easy") return {2, 2};
  if (tier == "medium") return {3, 4};
  if (tier == "hard") return {4, 6};
  throw std::invalid_argument("unknown tier '" + tier + "' (expected easy, medium or hard)");
}

TaskSuite generate_suite(const std::string& tier, std::uint32_t task_count, std::uint64_t seed,
                         const FaultProfile& faults) {
  const TierShape shape = tier_shape(tier);
  TaskSuite suite;
  suite.name = tier;
  for (std::uint32_t n = 0; n < task_count; ++n) {
    Rng rng = make_stream(seed, Stream::kSampler, n);
    ToolTask task;
    task.id = tier + "-" + std::to_string(n + 1);
    task.tier = tier;
    task.fault_seed = mix64(seed ^ mix64(n + 1));
    task.finish_bonus = kFinishBonus;
    task.agent.hallucination_rate = faults.hallucination_rate;
    task.agent.loop_rate = 0.3;
    task.agent.finish_base = 0.01;
    task.agent.finish_per_success = 0.08;
    task.agent.param_error_rate = 0.05;

    std::set<std::string> used;
    std::vector<std::string> needed;
    for (std::uint32_t g = 0; g < shape.required_groups; ++g) {
      const std::string group = "g" + std::to_string(g + 1);
      const std::size_t alternatives = uniform01(rng) < 0.5 ? 2 : 1;
      const std::size_t first = task.tools.size();
      for (std::size_t a = 0; a < alternatives; ++a) {
        ToolSpec tool = make_tool(used, rng);
        tool.group = group;
        tool.utility_contribution = a == 0 ? kPrimaryUtility : kAlternativeUtility;
        task.tools.push_back(std::move(tool));
      }
      needed.push_back(task.tools[first].name);
    }
    for (ToolSpec& tool : task.tools) task.agent.tool_priors[tool.name] = kRelevantPrior;
    for (std::uint32_t d = 0; d < shape.distractors; ++d) task.tools.push_back(make_tool(used, rng));

    for (ToolSpec& tool : task.tools) {
      const double u = uniform01(rng);
      if (u < faults.unavailable_share) {
        tool.failure = FailureMode::unavailable();
      } else if (u < faults.unavailable_share + faults.flaky_share) {
        tool.failure = FailureMode::flaky(faults.flaky_probability);
      }
    }
    // Keep every group solvable.
    for (std::uint32_t g = 0; g < shape.required_groups; ++g) {
      const std::string group = "g" + std::to_string(g + 1);
      auto members = [&](const ToolSpec& t) { return t.group == group; };
      const bool solvable = std::any_of(task.tools.begin(), task.tools.end(), [&](const ToolSpec& t) {
        return members(t) && t.failure.kind != FailureMode::Kind::kUnavailable;
      });
      if (!solvable) {
        std::find_if(task.tools.begin(), task.tools.end(), members)->failure = FailureMode::none();
      }
    }
    // Present the catalogue in a shuffled order so position carries no hint.
    for (std::size_t i = task.tools.size(); i > 1; --i) {
      std::swap(task.tools[i - 1], task.tools[uniform_index(rng, i)]);
    }

    task.success_threshold = kAlternativeUtility * shape.required_groups + task.finish_bonus;
    task.description = "Answer the request by calling the available tools, then call Finish.";
    task.query = "Combine results from ";
    for (std::size_t i = 0; i < needed.size(); ++i) {
      task.query += (i == 0 ? "" : i + 1 == needed.size() ? " and " : ", ") + needed[i];
    }
    task.query += " to answer request " + task.id + ".";
    task.validate();
    suite.tasks.push_back(std::move(task));
  }
  return suite;
}

}  // namespace elodec
