// Command-line front end: run, suite, rank, inspect, replay, generate.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <functional>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "elodec/config.hpp"
#include "elodec/errors.hpp"
#include "elodec/harness.hpp"
#include "elodec/suite.hpp"

namespace fs = std::filesystem;
using namespace elodec;
using Json = nlohmann::ordered_json;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> budget;
  std::string judge;
  std::string verdicts_path;
  std::optional<double> sigma;
  std::string env_path;
  std::string out_dir;
  std::optional<std::uint32_t> parallel;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "Configuration document");
  cmd->add_option("--seed", c.seed, "Run seed (suite: a single seed)");
  cmd->add_option("--budget", c.budget, "Call budget (suite: a single budget)");
  cmd->add_option("--judge", c.judge, "Judge kind")->check(CLI::IsMember({"oracle", "replay", "remote"}));
  cmd->add_option("--verdicts", c.verdicts_path, "Replay judge verdict script");
  cmd->add_option("--sigma", c.sigma, "Oracle judge noise");
  cmd->add_option("--env", c.env_path, "World or suite document");
  cmd->add_option("--out", c.out_dir, "Output directory");
  cmd->add_option("--parallel", c.parallel, "Concurrent suite cells");
}

RunConfig effective_config(const Common& c) {
  RunConfig config = c.config_path.empty() ? RunConfig{} : read_config(c.config_path);
  if (c.budget) config.budget.max_calls = *c.budget;
  if (!c.judge.empty()) config.judge.kind = judge_kind_from_string(c.judge);
  if (!c.verdicts_path.empty()) config.judge.verdicts = ReplayJudge::read_script(c.verdicts_path);
  if (c.sigma) config.judge.sigma = *c.sigma;
  if (c.parallel) config.suite.parallel = *c.parallel;
  if (c.budget) config.suite.budgets = {*c.budget};
  if (c.seed) config.suite.seeds = {*c.seed};
  if (!c.env_path.empty()) config.suite.suite_path = c.env_path;
  config.validate();
  return config;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string item = text.substr(start, comma - start);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<std::uint64_t> split_numbers(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const std::string& item : split(text)) out.push_back(std::stoull(item));
  return out;
}

std::string record_file_name(const RunRecord& r) {
  return r.task_id() + "__" + r.method() + "__b" + std::to_string(r.config.budget.max_calls) + "__s" +
         std::to_string(r.seed) + ".json";
}

Json summary_json(const RunRecord& r) {
  Json j;
  j["task_id"] = r.task_id();
  j["method"] = r.method();
  j["seed"] = r.seed;
  j["budget"] = r.config.budget.max_calls;
  j["passed"] = r.passed;
  j["flagged"] = r.flagged();
  j["sequences"] = r.result.sequences.size();
  j["selected_leaf"] = r.result.selected ? Json(to_index(r.result.selected->leaf)) : Json(nullptr);
  j["calls_used"] = r.result.ledger.used();
  return j;
}

std::vector<fs::path> record_files(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const std::string& in : inputs) {
    if (fs::is_directory(in)) {
      for (const auto& entry : fs::recursive_directory_iterator(in)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") out.push_back(entry.path());
      }
    } else {
      out.emplace_back(in);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

int run_command(const Common& c, const std::string& task, const std::string& method) {
  if (c.env_path.empty()) throw std::invalid_argument("run needs --env");
  RunConfig config = effective_config(c);
  const std::vector<WorldSpec> worlds = read_worlds(c.env_path);
  const WorldSpec* world = &worlds.front();
  if (!task.empty()) {
    world = nullptr;
    for (const WorldSpec& w : worlds) {
      if (world_id(w) == task) world = &w;
    }
    if (!world) throw NotFound("no task '" + task + "' in " + c.env_path);
  }
  const RunRecord record = run_method(*world, method, config, c.seed.value_or(1));
  if (!c.out_dir.empty()) {
    fs::create_directories(c.out_dir);
    write_run_record((fs::path(c.out_dir) / record_file_name(record)).string(), record);
  }
  std::cout << summary_json(record).dump() << "\n";
  return 0;
}

int suite_command(const Common& c, const std::string& methods, const std::string& budgets,
                  const std::string& seeds, bool keep_records) {
  RunConfig config = effective_config(c);
  if (!methods.empty()) config.suite.methods = split(methods);
  if (!budgets.empty()) config.suite.budgets = split_numbers(budgets);
  if (!seeds.empty()) config.suite.seeds = split_numbers(seeds);
  if (config.suite.suite_path.empty()) throw std::invalid_argument("suite needs --env or suite.suite_path");
  if (c.out_dir.empty()) throw std::invalid_argument("suite needs --out");
  const std::vector<WorldSpec> worlds = read_worlds(config.suite.suite_path);

  const fs::path records = fs::path(c.out_dir) / "records";
  if (keep_records) fs::create_directories(records);
  std::function<void(const RunRecord&)> sink;
  if (keep_records) {
    sink = [&](const RunRecord& r) { write_run_record((records / record_file_name(r)).string(), r); };
  }
  const SuiteOutcome outcome = run_suite(worlds, config, sink);
  export_metrics(c.out_dir, outcome.metrics);
  for (const RunSummary& r : outcome.runs) {
    if (!r.error.empty()) {
      std::cerr << Json{{"cell_error", {{"task_id", r.task_id}, {"method", r.method}, {"budget", r.budget},
                                        {"seed", r.seed}, {"message", r.error}}}}
                       .dump()
                << "\n";
    }
  }
  std::cout << pass_rates_csv(outcome.metrics.pass_rates);
  return 0;
}

int rank_command(const Common& c, const std::vector<std::string>& inputs, std::uint32_t trials) {
  RunConfig config = effective_config(c);
  std::vector<RunSummary> runs;
  std::vector<WorldSpec> worlds;
  std::map<std::string, bool> seen;
  std::uint64_t budget = c.budget.value_or(0);
  for (const fs::path& p : record_files(inputs)) {
    const RunRecord record = read_run_record(p.string());
    const World world = make_world(record.world);
    runs.push_back(summarize(record, *world.env));
    if (!seen[record.task_id()]) {
      seen[record.task_id()] = true;
      worlds.push_back(record.world);
    }
    if (!c.budget) budget = std::max(budget, record.config.budget.max_calls);
  }
  if (runs.empty()) throw std::invalid_argument("no run records found");
  const auto rows = preference_ranks(runs, worlds, config.judge, budget, trials);
  const std::string csv = preference_ranks_csv(rows);
  if (!c.out_dir.empty()) {
    fs::create_directories(c.out_dir);
    std::FILE* f = std::fopen((fs::path(c.out_dir) / "preference_ranks.csv").c_str(), "wb");
    if (!f) throw std::runtime_error("cannot write preference_ranks.csv");
    std::fwrite(csv.data(), 1, csv.size(), f);
    std::fclose(f);
  }
  std::cout << csv;
  return 0;
}

int inspect_command(const std::string& path) {
  const std::string probe = [&] {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw FormatError("cannot open " + path);
    std::string text;
    char buf[4096];
    for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, f)) > 0;) text.append(buf, n);
    std::fclose(f);
    return text;
  }();
  const Json head = Json::parse(probe, nullptr, false);
  if (head.is_object() && head.value("format", "") == "elodec.tree") {
    std::cout << format_tree(parse_tree(probe));
    return 0;
  }
  const RunRecord record = parse_run_record(probe);
  std::cout << summary_json(record).dump() << "\n" << format_tree(record.result.tree);
  return 0;
}

int replay_command(const std::vector<std::string>& inputs) {
  int mismatches = 0;
  for (const fs::path& p : record_files(inputs)) {
    const RunRecord record = read_run_record(p.string());
    const ReplayReport report = replay_run(record);
    Json line{{"record", p.string()}, {"identical", report.identical}};
    if (!report.identical) {
      line["difference"] = report.first_difference;
      ++mismatches;
    }
    std::cout << line.dump() << "\n";
  }
  return mismatches == 0 ? 0 : 1;
}

int generate_command(const Common& c, const std::string& tier, std::uint32_t count, const std::string& toy,
                     const std::string& out_file) {
  if (out_file.empty()) throw std::invalid_argument("generate needs --file");
  const std::uint64_t seed = c.seed.value_or(1);
  std::string text;
  if (!toy.empty()) {
    const auto dims = split_numbers(toy);
    if (dims.size() != 2) throw std::invalid_argument("--toy expects branching,depth");
    text = serialize_world(random_toy(static_cast<std::uint32_t>(dims[0]), static_cast<std::uint32_t>(dims[1]), seed));
  } else {
    text = serialize_suite(generate_suite(tier, count, seed));
  }
  const fs::path parent = fs::path(out_file).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(out_file, std::ios::binary | std::ios::trunc);
  if (!(out << text)) throw std::runtime_error("cannot write " + out_file);
  return 0;
}

void print_error(std::string_view kind, const std::string& message) {
  std::cerr << Json{{"error", {{"type", kind}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elo-guided decision search over simulated and remote-judged task worlds"};
  app.require_subcommand(1);

  Common common;
  std::string task;
  std::string method = "elo";
  auto* run = app.add_subcommand("run", "Search one task with one method");
  add_common(run, common);
  run->add_option("--task", task, "Task id inside a suite document");
  run->add_option("--method", method, "elo, elo-rand, cot, cot@k, bfs, dfs or dfsdt");

  std::string methods;
  std::string budgets;
  std::string seeds;
  bool keep_records = false;
  auto* suite = app.add_subcommand("suite", "Run the (task, method, budget, seed) grid and export metrics");
  add_common(suite, common);
  suite->add_option("--methods", methods, "Comma-separated methods");
  suite->add_option("--budgets", budgets, "Comma-separated call budgets");
  suite->add_option("--seeds", seeds, "Comma-separated seeds");
  suite->add_flag("--records", keep_records, "Also write every run record under <out>/records");

  std::vector<std::string> inputs;
  std::uint32_t trials = 10;
  auto* rank = app.add_subcommand("rank", "Preference-rank tournament over stored run records");
  add_common(rank, common);
  rank->add_option("inputs", inputs, "Record files or directories")->required();
  rank->add_option("--trials", trials, "Tournament repetitions");

  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect", "Print a stored tree with scores and update counts");
  inspect->add_option("file", inspect_path, "Run record or tree document")->required();

  std::vector<std::string> replay_inputs;
  auto* replay = app.add_subcommand("replay", "Re-execute stored runs and byte-compare the outcome");
  replay->add_option("inputs", replay_inputs, "Record files or directories")->required();

  std::string tier = "medium";
  std::uint32_t count = 50;
  std::string toy;
  std::string out_file;
  auto* generate = app.add_subcommand("generate", "Write a generated task suite or toy world");
  add_common(generate, common);
  generate->add_option("--tier", tier, "easy, medium or hard");
  generate->add_option("--count", count, "Number of tasks");
  generate->add_option("--toy", toy, "Toy world as branching,depth instead of a suite");
  generate->add_option("--file", out_file, "Output document");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (*run) return run_command(common, task, method);
    if (*suite) return suite_command(common, methods, budgets, seeds, keep_records);
    if (*rank) return rank_command(common, inputs, trials);
    if (*inspect) return inspect_command(inspect_path);
    if (*replay) return replay_command(replay_inputs);
    if (*generate) return generate_command(common, tier, count, toy, out_file);
  } catch (const VersionMismatch& e) {
    print_error("version_mismatch", e.what());
    return 1;
  } catch (const FormatError& e) {
    print_error("format", e.what());
    return 1;
  } catch (const NotFound& e) {
    print_error("not_found", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    print_error("invalid_argument", e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("runtime", e.what());
    return 1;
  }
  return 0;
}
