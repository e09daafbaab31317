#include "elodec/config.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "config_codec.hpp"
#include "elodec/errors.hpp"
#include "elodec/random.hpp"
#include "suite_codec.hpp"

namespace elodec {

namespace {

using detail::field;
using detail::field_or;
using detail::Json;

constexpr std::string_view kConfigFormat = "elodec.config";
constexpr std::string_view kWorldFormat = "elodec.world";
constexpr int kVersion = 1;

Json verdicts_to_json(const std::vector<ReplayJudge::Record>& script) {
  Json out = Json::array();
  for (const auto& r : script) {
    if (r.winner) {
      out.push_back(std::string(to_string(*r.winner)));
    } else {
      out.push_back(Json{{"error", r.error}});
    }
  }
  return out;
}

std::vector<ReplayJudge::Record> verdicts_from_json(const Json& j) {
  Json doc;
  doc["format"] = "elodec.replay-verdicts";
  doc["version"] = 1;
  doc["verdicts"] = j;
  return ReplayJudge::parse_script(doc.dump());
}

}  // namespace

const std::string& world_id(const WorldSpec& world) {
  return std::visit(
      [](const auto& w) -> const std::string& { return w.id; }, world);
}

ToySpec random_toy(std::uint32_t branching, std::uint32_t depth, std::uint64_t seed) {
  if (branching < 2 || depth < 1) throw std::invalid_argument("toy world needs branching >= 2, depth >= 1");
  Rng rng = make_stream(seed, Stream::kBaseline, 0x70);
  std::vector<std::vector<double>> weights(depth, std::vector<double>(branching));
  for (auto& level : weights) {
    for (double& w : level) w = uniform01(rng);
  }
  std::size_t count = 1;
  for (std::uint32_t d = 0; d < depth; ++d) count *= branching;
  ToySpec spec;
  spec.id = "toy-b" + std::to_string(branching) + "-d" + std::to_string(depth) + "-s" + std::to_string(seed);
  spec.branching = branching;
  spec.depth = depth;
  spec.seed = seed;
  spec.table.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t rest = i;
    double total = 0.0;
    for (std::uint32_t d = depth; d-- > 0;) {
      total += weights[d][rest % branching];
      rest /= branching;
    }
    spec.table[i] = total;
  }
  const auto [lo, hi] = std::minmax_element(spec.table.begin(), spec.table.end());
  const double low = *lo;
  const double span = *hi - *lo;
  for (double& u : spec.table) u = span > 0.0 ? (u - low) / span : 0.0;
  return spec;
}

World make_world(const WorldSpec& spec) {
  World world;
  if (const auto* toy = std::get_if<ToySpec>(&spec)) {
    world.env = std::make_unique<ToyWorld>(toy->branching, toy->depth, toy->table, toy->seed,
                                           toy->success_threshold);
    world.sampler = std::make_unique<ToySampler>(toy->branching, toy->sampler);
  } else {
    const auto& task = std::get<ToolTask>(spec);
    world.env = std::make_unique<SyntheticToolWorld>(task);
    world.sampler = std::make_unique<SimulatedAgent>(task);
  }
  return world;
}

std::string_view to_string(JudgeSpec::Kind kind) {
  switch (kind) {
    case JudgeSpec::Kind::kOracle:
      return "oracle";
    case JudgeSpec::Kind::kReplay:
      return "replay";
    case JudgeSpec::Kind::kRemote:
      return "remote";
  }
  return "oracle";
}

JudgeSpec::Kind judge_kind_from_string(std::string_view text) {
  if (text == "oracle") return JudgeSpec::Kind::kOracle;
  if (text == "replay") return JudgeSpec::Kind::kReplay;
  if (text == "remote") return JudgeSpec::Kind::kRemote;
  throw std::invalid_argument("unknown judge '" + std::string(text) + "' (expected oracle, replay or remote)");
}

std::unique_ptr<Judge> make_judge(const JudgeSpec& spec) {
  switch (spec.kind) {
    case JudgeSpec::Kind::kOracle:
      return std::make_unique<OracleJudge>(spec.sigma, spec.first_position_bias);
    case JudgeSpec::Kind::kReplay:
      return std::make_unique<ReplayJudge>(spec.verdicts);
    case JudgeSpec::Kind::kRemote:
      return std::make_unique<RemoteJudge>(
          spec.remote, std::shared_ptr<ChatTransport>(make_http_transport(
                           spec.remote.base_url, std::chrono::milliseconds(spec.remote.timeout_ms))));
  }
  throw std::logic_error("unhandled judge kind");
}

void RunConfig::validate() const {
  elo.validate();
  budget.validate();
  BaselineConfig b = baselines;
  b.budget = budget;
  b.validate();
  if (judgment.comparisons_per_new_sequence == 0) {
    throw std::invalid_argument("comparisons_per_new_sequence must be positive");
  }
  if (judge.kind == JudgeSpec::Kind::kOracle && !(judge.sigma > 0.0)) {
    throw std::invalid_argument("oracle sigma must be positive");
  }
  if (judge.kind == JudgeSpec::Kind::kRemote) judge.remote.validate();
  if (suite.parallel == 0) throw std::invalid_argument("parallel must be at least 1");
  if (suite.rank_trials == 0) throw std::invalid_argument("rank_trials must be positive");
}

namespace detail {

Json config_to_json(const RunConfig& c) {
  Json j;
  j["elo"] = Json{{"elo_coefficient_r", c.elo.elo_coefficient_r},
                  {"update_step_k", c.elo.update_step_k},
                  {"initial_score", c.elo.initial_score},
                  {"rejection_score", c.elo.rejection_score},
                  {"default_temperature_tau0", c.elo.default_temperature_tau0}};
  j["budget"] = Json{{"max_calls", c.budget.max_calls},
                     {"max_steps_per_sequence", c.budget.max_steps_per_sequence},
                     {"max_explorations", c.budget.max_explorations}};
  j["judgment"] = Json{{"comparisons_per_new_sequence", c.judgment.comparisons_per_new_sequence},
                       {"single_trial", c.judgment.single_trial}};
  j["baselines"] = Json{{"breadth", c.baselines.breadth},
                        {"keep_per_level", c.baselines.keep_per_level},
                        {"target_sequences", c.baselines.target_sequences},
                        {"cot_k", c.baselines.cot_k}};
  Json judge;
  judge["kind"] = to_string(c.judge.kind);
  judge["sigma"] = c.judge.sigma;
  judge["first_position_bias"] = c.judge.first_position_bias;
  judge["verdicts"] = verdicts_to_json(c.judge.verdicts);
  const RemoteJudgeConfig& r = c.judge.remote;
  judge["remote"] = Json{{"base_url", r.base_url},
                         {"path", r.path},
                         {"model", r.model},
                         {"api_key_env", r.api_key_env},
                         {"timeout_ms", r.timeout_ms},
                         {"max_retries", r.max_retries},
                         {"backoff_ms", r.backoff_ms},
                         {"index_base", r.index_base},
                         {"temperature", r.temperature},
                         {"legacy_functions", r.legacy_functions},
                         {"max_in_flight", r.max_in_flight},
                         {"min_interval_ms", r.min_interval_ms}};
  j["judge"] = judge;
  j["suite"] = Json{{"suite_path", c.suite.suite_path},
                    {"methods", c.suite.methods},
                    {"budgets", c.suite.budgets},
                    {"seeds", c.suite.seeds},
                    {"parallel", c.suite.parallel},
                    {"rank_trials", c.suite.rank_trials},
                    {"rank_budget", c.suite.rank_budget}};
  return j;
}

RunConfig config_from_json(const Json& j, const std::string& where) {
  RunConfig c;
  auto section = [&](const char* key) {
    if (!j.contains(key)) return Json::object();
    if (!j[key].is_object()) throw FormatError(where + ": section '" + key + "' must be an object");
    return j[key];
  };
  const Json elo = section("elo");
  const std::string we = where + " elo";
  c.elo.elo_coefficient_r = field_or(elo, "elo_coefficient_r", c.elo.elo_coefficient_r, we);
  c.elo.update_step_k = field_or(elo, "update_step_k", c.elo.update_step_k, we);
  c.elo.initial_score = field_or(elo, "initial_score", c.elo.initial_score, we);
  c.elo.rejection_score = field_or(elo, "rejection_score", c.elo.rejection_score, we);
  c.elo.default_temperature_tau0 = field_or(elo, "default_temperature_tau0", c.elo.default_temperature_tau0, we);

  const Json budget = section("budget");
  const std::string wb = where + " budget";
  c.budget.max_calls = field_or(budget, "max_calls", c.budget.max_calls, wb);
  c.budget.max_steps_per_sequence = field_or(budget, "max_steps_per_sequence", c.budget.max_steps_per_sequence, wb);
  c.budget.max_explorations = field_or(budget, "max_explorations", c.budget.max_explorations, wb);

  const Json judgment = section("judgment");
  const std::string wj = where + " judgment";
  c.judgment.comparisons_per_new_sequence =
      field_or(judgment, "comparisons_per_new_sequence", c.judgment.comparisons_per_new_sequence, wj);
  c.judgment.single_trial = field_or(judgment, "single_trial", c.judgment.single_trial, wj);

  const Json base = section("baselines");
  const std::string wl = where + " baselines";
  c.baselines.breadth = field_or(base, "breadth", c.baselines.breadth, wl);
  c.baselines.keep_per_level = field_or(base, "keep_per_level", c.baselines.keep_per_level, wl);
  c.baselines.target_sequences = field_or(base, "target_sequences", c.baselines.target_sequences, wl);
  c.baselines.cot_k = field_or(base, "cot_k", c.baselines.cot_k, wl);

  const Json judge = section("judge");
  const std::string wg = where + " judge";
  try {
    c.judge.kind = judge_kind_from_string(field_or<std::string>(judge, "kind", "oracle", wg));
  } catch (const std::invalid_argument& e) {
    throw FormatError(wg + ": " + e.what());
  }
  c.judge.sigma = field_or(judge, "sigma", c.judge.sigma, wg);
  c.judge.first_position_bias = field_or(judge, "first_position_bias", c.judge.first_position_bias, wg);
  if (judge.contains("verdicts")) c.judge.verdicts = verdicts_from_json(judge["verdicts"]);
  if (judge.contains("remote")) {
    const Json& r = judge["remote"];
    const std::string wr = wg + " remote";
    RemoteJudgeConfig& rc = c.judge.remote;
    rc.base_url = field_or(r, "base_url", rc.base_url, wr);
    rc.path = field_or(r, "path", rc.path, wr);
    rc.model = field_or(r, "model", rc.model, wr);
    rc.api_key_env = field_or(r, "api_key_env", rc.api_key_env, wr);
    rc.timeout_ms = field_or(r, "timeout_ms", rc.timeout_ms, wr);
    rc.max_retries = field_or(r, "max_retries", rc.max_retries, wr);
    rc.backoff_ms = field_or(r, "backoff_ms", rc.backoff_ms, wr);
    rc.index_base = field_or(r, "index_base", rc.index_base, wr);
    rc.temperature = field_or(r, "temperature", rc.temperature, wr);
    rc.legacy_functions = field_or(r, "legacy_functions", rc.legacy_functions, wr);
    rc.max_in_flight = field_or(r, "max_in_flight", rc.max_in_flight, wr);
    rc.min_interval_ms = field_or(r, "min_interval_ms", rc.min_interval_ms, wr);
  }

  const Json suite = section("suite");
  const std::string ws = where + " suite";
  c.suite.suite_path = field_or(suite, "suite_path", c.suite.suite_path, ws);
  c.suite.methods = field_or(suite, "methods", c.suite.methods, ws);
  c.suite.budgets = field_or(suite, "budgets", c.suite.budgets, ws);
  c.suite.seeds = field_or(suite, "seeds", c.suite.seeds, ws);
  c.suite.parallel = field_or(suite, "parallel", c.suite.parallel, ws);
  c.suite.rank_trials = field_or(suite, "rank_trials", c.suite.rank_trials, ws);
  c.suite.rank_budget = field_or(suite, "rank_budget", c.suite.rank_budget, ws);
  return c;
}

Json world_to_json(const WorldSpec& world) {
  if (const auto* toy = std::get_if<ToySpec>(&world)) {
    Json j;
    j["kind"] = "toy";
    j["id"] = toy->id;
    j["branching"] = toy->branching;
    j["depth"] = toy->depth;
    j["seed"] = toy->seed;
    j["success_threshold"] = std::isnan(toy->success_threshold) ? Json(nullptr) : Json(toy->success_threshold);
    j["sampler"] = toy->sampler == ToySampler::Mode::kUniform ? "uniform" : "ordered";
    j["table"] = toy->table;
    return j;
  }
  Json j;
  j["kind"] = "tool";
  j["task"] = task_to_json(std::get<ToolTask>(world));
  return j;
}

WorldSpec world_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) throw FormatError(where + ": world is not an object");
  const auto kind = field<std::string>(j, "kind", where);
  if (kind == "tool") return task_from_json(field<Json>(j, "task", where), where + " task");
  if (kind != "toy") throw FormatError(where + ": unknown world kind '" + kind + "'");
  ToySpec toy;
  toy.id = field_or<std::string>(j, "id", toy.id, where);
  toy.branching = field<std::uint32_t>(j, "branching", where);
  toy.depth = field<std::uint32_t>(j, "depth", where);
  toy.seed = field_or<std::uint64_t>(j, "seed", 0, where);
  if (j.contains("success_threshold") && !j["success_threshold"].is_null()) {
    toy.success_threshold = field<double>(j, "success_threshold", where);
  }
  const auto sampler = field_or<std::string>(j, "sampler", "uniform", where);
  if (sampler != "uniform" && sampler != "ordered") {
    throw FormatError(where + ": unknown sampler '" + sampler + "'");
  }
  toy.sampler = sampler == "uniform" ? ToySampler::Mode::kUniform : ToySampler::Mode::kOrdered;
  toy.table = field<std::vector<double>>(j, "table", where);
  try {
    ToyWorld check(toy.branching, toy.depth, toy.table, toy.seed, toy.success_threshold);
  } catch (const std::invalid_argument& e) {
    throw FormatError(where + ": " + e.what());
  }
  return toy;
}

}  // namespace detail

RunConfig parse_config(const std::string& json_text) {
  const Json doc = detail::parse_document(json_text, kConfigFormat, kVersion);
  RunConfig c = detail::config_from_json(doc, "config");
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig read_config(const std::string& path) { return parse_config(detail::read_text_file(path)); }

std::string serialize_config(const RunConfig& config) {
  Json doc;
  doc["format"] = kConfigFormat;
  doc["version"] = kVersion;
  const Json body = detail::config_to_json(config);
  for (const auto& [k, v] : body.items()) doc[k] = v;
  return detail::dump_document(doc);
}

std::vector<WorldSpec> parse_worlds(const std::string& json_text) {
  const Json probe = Json::parse(json_text, nullptr, false);
  if (probe.is_object() && probe.value("format", "") == "elodec.tool-suite") {
    std::vector<WorldSpec> out;
    for (ToolTask& t : parse_suite(json_text).tasks) out.emplace_back(std::move(t));
    return out;
  }
  const Json doc = detail::parse_document(json_text, kWorldFormat, kVersion);
  return {detail::world_from_json(field<Json>(doc, "world", "world document"), "world")};
}

std::vector<WorldSpec> read_worlds(const std::string& path) {
  return parse_worlds(detail::read_text_file(path));
}

std::string serialize_world(const WorldSpec& world) {
  Json doc;
  doc["format"] = kWorldFormat;
  doc["version"] = kVersion;
  doc["world"] = detail::world_to_json(world);
  return detail::dump_document(doc);
}

}  // namespace elodec
