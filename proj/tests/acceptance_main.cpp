// Acceptance run: one PASS/FAIL line per criterion, followed by the measured
// figures. Criteria listed with --known-gap still print FAIL when they fail
// but do not turn the exit status red.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "elodec/config.hpp"
#include "elodec/elo.hpp"
#include "elodec/errors.hpp"
#include "elodec/exploration.hpp"
#include "elodec/harness.hpp"
#include "elodec/judgment.hpp"
#include "elodec/remote_judge.hpp"
#include "elodec/search.hpp"
#include "elodec/suite.hpp"
#include "elodec/tool_world.hpp"

namespace {

using namespace elodec;
using Json = nlohmann::json;

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "ok   " : "MISS ") + what);
  }
};

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// --- 1 ----------------------------------------------------------------------

Verdict elo_math() {
  Verdict v;
  const EloConfig c;
  v.require(expected_score(0, 0, c).value() == 0.5, "expected_score(0, 0) == 0.5");
  const double e400 = 1.0 / (1.0 + std::exp(-400.0 / 173.72));
  v.require(std::abs(expected_score(400, 0, c).value() - 0.909088) <= 1e-6 &&
                std::abs(e400 - 0.909088) <= 1e-6,
            "expected_score(400, 0) = " + fmt("%.7f", expected_score(400, 0, c).value()));
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> score(-2000.0, 2000.0);
  const ComparisonOutcome outcomes[] = {ComparisonOutcome::win(), ComparisonOutcome::draw(),
                                        ComparisonOutcome::loss()};
  double worst_complement = 0.0;
  double worst_sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double x = score(rng);
    const double y = score(rng);
    worst_complement = std::max(
        worst_complement, std::abs(expected_score(x, y, c).value() + expected_score(y, x, c).value() - 1.0));
    const auto [nx, ny] = update_pair(x, y, outcomes[i % 3], c);
    worst_sum = std::max(worst_sum, std::abs((nx + ny) - (x + y)));
  }
  v.require(worst_complement <= 1e-9, "complementarity over 1e5 pairs, worst " + fmt("%.2e", worst_complement));
  v.require(worst_sum <= 1e-9, "zero-sum over 1e5 updates, worst " + fmt("%.2e", worst_sum));
  return v;
}

// --- 2 ----------------------------------------------------------------------

Verdict annealing() {
  Verdict v;
  const double tau0 = 100.0;
  v.require(anneal_temperature(0, tau0) == tau0, "tau(0) == tau0");
  bool monotone = true;
  for (std::uint64_t m = 1; m <= 10000; ++m) {
    monotone = monotone && anneal_temperature(m, tau0) <= anneal_temperature(m - 1, tau0);
  }
  v.require(monotone, "non-increasing over M = 0..10000");
  for (std::uint64_t m : {1u, 54u}) {
    const double hand = tau0 / (1.0 + std::sqrt(std::log(static_cast<double>(m) + 1.0)));
    const double got = anneal_temperature(m, tau0);
    v.require(std::abs(got - hand) <= 0.02,
              "tau(" + std::to_string(m) + ") = " + fmt("%.4f", got) + " vs " + fmt("%.4f", hand));
  }
  return v;
}

// --- 3 ----------------------------------------------------------------------

Verdict sampler_fidelity() {
  Verdict v;
  struct Case {
    double a;
    double b;
  };
  for (const Case& k : {Case{0, 0}, Case{100, 0}}) {
    const std::vector<std::pair<NodeId, double>> children{{NodeId{1}, k.a}, {NodeId{2}, k.b}};
    const double tau = 100.0;
    const double za = std::exp(k.a / tau);
    const double zb = std::exp(k.b / tau);
    const double zr = std::exp(0.0 / tau);
    const double closed[] = {za / (za + zb + zr), zb / (za + zb + zr), zr / (za + zb + zr)};
    const SelectionDistribution dist = selection_distribution(children, 0.0, tau);
    Rng rng = make_stream(77, Stream::kSelection);
    double counts[3] = {0, 0, 0};
    const int draws = 30000;
    for (int i = 0; i < draws; ++i) {
      const auto pick = sample_choice(dist, rng);
      counts[!pick ? 2 : *pick == NodeId{1} ? 0 : 1] += 1;
    }
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(counts[i] / draws - closed[i]));
    v.require(worst <= 0.01, "scores (" + fmt("%.0f", k.a) + ", " + fmt("%.0f", k.b) +
                                 "): worst deviation " + fmt("%.4f", worst));
  }
  return v;
}

// --- 4 ----------------------------------------------------------------------

Verdict elo_convergence() {
  Verdict v;
  const EloConfig c;
  int good = 0;
  double worst = 1.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng = make_stream(seed, Stream::kTournament, 4);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> means(10);
    std::vector<double> elo(10, 0.0);
    for (std::size_t i = 0; i < 10; ++i) means[i] = 0.5 * static_cast<double>(i);
    for (int n = 0; n < 500; ++n) {
      const std::size_t i = uniform_index(rng, 10);
      std::size_t j = uniform_index(rng, 9);
      if (j >= i) ++j;
      const bool i_wins = means[i] + noise(rng) > means[j] + noise(rng);
      std::tie(elo[i], elo[j]) =
          update_pair(elo[i], elo[j], i_wins ? ComparisonOutcome::win() : ComparisonOutcome::loss(), c);
    }
    const double rho = spearman(elo, means);
    worst = std::min(worst, rho);
    if (rho >= 0.9) ++good;
  }
  v.require(good >= 95, std::to_string(good) + "/100 seeds with Spearman >= 0.9 (worst " +
                            fmt("%.3f", worst) + ")");
  return v;
}

// --- 5 ----------------------------------------------------------------------

Verdict brute_force_optimality() {
  Verdict v;
  int elo_hits = 0;
  int rand_hits = 0;
  int generated = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const ToySpec toy = random_toy(3, 3, seed);
    for (FinalSelection mode : {FinalSelection::kElo, FinalSelection::kRandom}) {
      World world = make_world(toy);
      OracleJudge judge(0.05);
      EloSearchConfig config;
      config.budget = Budget{100, 12, 20};
      config.final_selection = mode;
      const SearchResult r = run_elo_search(*world.env, *world.sampler, judge, config, seed);
      const bool hit = r.selected && world.env->true_utility(r.tree.trail(*r.selected)) == 1.0;
      if (mode == FinalSelection::kElo) {
        elo_hits += hit;
        const auto leaves = completed_leaves(r.tree);
        generated += std::any_of(leaves.begin(), leaves.end(), [&](NodeId leaf) {
          return world.env->true_utility(r.tree.trail_to(leaf)) == 1.0;
        });
      } else {
        rand_hits += hit;
      }
    }
  }
  const double elo_rate = elo_hits / 200.0;
  const double rand_rate = rand_hits / 200.0;
  v.require(elo_rate >= 0.9, "Elo selection hits the optimum in " + fmt("%.1f%%", 100 * elo_rate) +
                                 " of 200 runs (optimum generated at all in " +
                                 fmt("%.1f%%", generated / 2.0) + ")");
  v.require(elo_rate - rand_rate >= 0.1 - 1e-12,
            "random selection hits " + fmt("%.1f%%", 100 * rand_rate) + ", gap " +
                fmt("%.1f", 100 * (elo_rate - rand_rate)) + " points");
  return v;
}

// --- 6, 7, 8 ---------------------------------------------------------------

struct SuiteRun {
  SuiteMetrics metrics;
  double seconds = 0.0;
};

SuiteRun run_medium_suite(unsigned parallel) {
  const auto started = std::chrono::steady_clock::now();
  const std::vector<WorldSpec> worlds = read_worlds(std::string(ELODEC_DATA_DIR) + "/suites/medium.json");
  RunConfig config;
  config.suite.parallel = parallel;
  SuiteRun run;
  run.metrics = run_suite(worlds, config).metrics;
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return run;
}

std::map<std::string, std::vector<PassRatePoint>> by_method(const SuiteMetrics& m) {
  std::map<std::string, std::vector<PassRatePoint>> out;
  for (const PassRatePoint& p : m.pass_rates) out[p.method].push_back(p);
  return out;
}

std::string curve(const std::vector<PassRatePoint>& points) {
  std::string s;
  for (const PassRatePoint& p : points) s += (s.empty() ? "" : " ") + fmt("%.3f", p.pass_rate);
  return s;
}

Verdict efficiency_trend(const SuiteRun& run) {
  Verdict v;
  const auto methods = by_method(run.metrics);
  // The five methods of the efficiency comparison plus the best-of-three sampler.
  for (const std::string m : {"elo", "dfsdt", "dfs", "bfs", "cot", "cot@3"}) {
    const auto& pts = methods.at(m);
    bool monotone = pts.size() == 10;
    for (std::size_t i = 1; i < pts.size(); ++i) monotone = monotone && pts[i].pass_rate >= pts[i - 1].pass_rate;
    v.require(monotone, m + " non-decreasing: " + curve(pts));
  }
  const auto& elo = methods.at("elo");
  for (const std::string m : {"bfs", "dfs", "dfsdt"}) {
    const auto& other = methods.at(m);
    double margin = 1.0;
    for (std::size_t i = 0; i < elo.size(); ++i) {
      if (m == "dfsdt" && elo[i].budget > 120) continue;
      margin = std::min(margin, elo[i].pass_rate - other[i].pass_rate);
    }
    v.require(margin >= 0.0, std::string("elo >= ") + m + (m == "dfsdt" ? " at budgets <= 120" : " at every budget") +
                                 ", smallest margin " + fmt("%.3f", margin));
  }
  if (methods.contains("elo-rand")) {
    v.notes.push_back("info elo-rand (random final pick, not part of the trend): " + curve(methods.at("elo-rand")));
  }
  v.require(run.seconds < 900.0, "suite wall time " + fmt("%.0f s", run.seconds));
  return v;
}

Verdict elo_success_correlation(const SuiteRun& run) {
  Verdict v;
  std::string rates;
  for (const BucketRow& b : run.metrics.buckets) {
    rates += (rates.empty() ? "" : " ") + (b.runs ? fmt("%.2f", b.pass_rate) : std::string("-"));
  }
  const double rho = run.metrics.bucket_spearman;
  v.require(!std::isnan(rho) && rho >= 0.8, "bucket Spearman " + fmt("%.3f", rho) + " over [" + rates + "]");
  return v;
}

Verdict failure_taxonomy(const SuiteRun& run) {
  Verdict v;
  const Json doc = Json::parse(read_file(std::string(ELODEC_FIXTURE_DIR) + "/failure_cases.json"));
  SyntheticToolWorld world(parse_suite(doc["suite"].dump()).tasks.at(0));
  std::size_t cases = 0;
  std::size_t detected = 0;
  for (const Json& c : doc["cases"]) {
    Trail trail;
    State s = world.initial_state();
    for (const Json& a : c["actions"]) {
      const Action act = !a.is_string()              ? SyntheticToolWorld::tool_call(a[0].get<std::string>(), a[1].dump())
                         : a.get<std::string>() == "Finish" ? SyntheticToolWorld::finish()
                                                            : Action{a.get<std::string>()};
      trail.push_back(world.step(s, act));
      s = trail.back().state;
    }
    std::map<std::string, bool> got;
    for (const auto& [category, fixed] : world.classify_failure(trail)) got[std::string(to_string(category))] = fixed;
    ++cases;
    detected += got == c["expected"].get<std::map<std::string, bool>>();
  }
  v.require(cases == 20 && detected == cases,
            std::to_string(detected) + "/" + std::to_string(cases) + " fixture cases classified exactly");

  const FaultProfile faults;
  v.require(faults.unavailable_share == 0.05 && faults.flaky_probability == 0.3 &&
                faults.hallucination_rate == 0.1,
            "suite generated with unavailable 5%, flaky(0.3), hallucination 0.1");
  double elo_fix = -1.0;
  double cot_fix = -1.0;
  for (const FailureRow& f : run.metrics.failures) {
    if (f.category != FailureCategory::kToolCallError) continue;
    if (f.method == "elo") elo_fix = f.fix_ratio;
    if (f.method == "cot") cot_fix = f.fix_ratio;
  }
  v.require(elo_fix > cot_fix, "TOOL_CALL_ERROR fix ratio elo " + fmt("%.3f", elo_fix) + " vs cot " +
                                   fmt("%.3f", cot_fix));
  return v;
}

// --- 9 ----------------------------------------------------------------------

class CannedTransport final : public ChatTransport {
 public:
  explicit CannedTransport(std::string body) : body_(std::move(body)) {}
  Response post(const std::string&, const std::string& body, const std::map<std::string, std::string>&) override {
    last_body = body;
    return {200, body_};
  }
  std::string last_body;

 private:
  std::string body_;
};

std::string reply_with(const std::string& arguments) {
  Json reply;
  reply["choices"][0]["message"]["tool_calls"][0]["function"]["name"] = "choose_preference";
  reply["choices"][0]["message"]["tool_calls"][0]["function"]["arguments"] = arguments;
  return reply.dump();
}

Verdict remote_judge_conformance() {
  Verdict v;
  const std::string golden = read_file(std::string(ELODEC_FIXTURE_DIR) + "/judge_prompt.golden.txt");
  const TaskContext context{"Plan a trip {with braces}.", "Find flights to {city}."};
  const std::string a = "search_flights({\"to\": \"Oslo\"}) -> OK 3 results";
  const std::string b = "Finish()";
  v.require(assemble_judge_prompt(context, a, b) == golden, "prompt assembly byte-exact against the golden fixture");

  bool mapping = parse_judge_reply(reply_with(R"({"preference": 0})"), 0) == Winner::kFirst &&
                 parse_judge_reply(reply_with(R"({"preference": 1})"), 0) == Winner::kSecond &&
                 parse_judge_reply(reply_with(R"({"preference": 1})"), 1) == Winner::kFirst &&
                 parse_judge_reply(reply_with(R"({"preference": 2})"), 1) == Winner::kSecond &&
                 parse_judge_reply(reply_with(R"({"preference": 7})"), 0) == Winner::kAbstain;
  v.require(mapping, "choose_preference indices map to verdicts (0- and 1-based)");

  RemoteJudgeConfig config;
  config.api_key_env = "";
  config.max_retries = 0;
  ToyWorld world(2, 2, {0.0, 0.3, 0.6, 1.0}, 1);
  DecisionTree tree(world.initial_state(), EloConfig{});
  const State s0 = world.initial_state();
  const PathStep first = world.step(s0, ToyWorld::choice(1));
  tree.append_path(tree.root(), std::vector<PathStep>{first, world.step(first.state, ToyWorld::choice(1))});
  const PathStep second = world.step(s0, ToyWorld::choice(2));
  const NodeId fresh =
      tree.append_path(tree.root(), std::vector<PathStep>{second, world.step(second.state, ToyWorld::choice(2))});
  const std::string before = serialize_tree(tree);
  bool all_errors = true;
  for (const std::string body : {std::string("<html>"), std::string(R"({"choices": []})"), reply_with("[0]")}) {
    RemoteJudge judge(config, std::make_shared<CannedTransport>(body),
                      std::make_shared<RequestGate>(1, std::chrono::milliseconds(0)));
    CallLedger ledger(10);
    Rng opponents = make_stream(1, Stream::kOpponent);
    Rng trials = make_stream(1, Stream::kJudge);
    const JudgmentOutcome out = judge_new_sequence(tree, fresh, judge, world, JudgmentConfig{}, ledger, opponents, trials);
    all_errors = all_errors && out.events.empty() && out.failures.size() == 1;
  }
  v.require(all_errors, "malformed replies surface as judge errors");
  v.require(serialize_tree(tree) == before, "tree untouched by failed judgments");
  return v;
}

// --- 10 ---------------------------------------------------------------------

Verdict determinism_and_replay() {
  Verdict v;
  const std::vector<WorldSpec> tools = read_worlds(std::string(ELODEC_DATA_DIR) + "/suites/medium.json");
  const std::vector<std::string> methods = {"elo", "elo-rand", "cot", "cot@3", "bfs", "dfs", "dfsdt"};
  std::size_t identical = 0;
  std::size_t total = 0;
  std::string first_problem;
  for (std::size_t i = 0; i < 20; ++i) {
    RunConfig config;
    config.budget.max_calls = 60 + 15 * (i % 5);
    if (i % 4 == 3) {
      config.judge.kind = JudgeSpec::Kind::kReplay;
      const Winner cycle[] = {Winner::kFirst, Winner::kSecond, Winner::kSecond, Winner::kAbstain};
      for (int k = 0; k < 200; ++k) config.judge.verdicts.push_back({cycle[(k * 7 + i) % 4], ""});
    }
    const WorldSpec world = i % 2 == 0 ? WorldSpec(tools.at(i)) : WorldSpec(random_toy(3, 3, i));
    const RunRecord stored = parse_run_record(
        serialize_run_record(run_method(world, methods[i % methods.size()], config, 100 + i)));
    const ReplayReport report = replay_run(stored);
    const RunRecord again = parse_run_record(report.replayed);
    const bool same_pick = stored.result.selected.has_value() == again.result.selected.has_value() &&
                           (!stored.result.selected || stored.result.selected->leaf == again.result.selected->leaf);
    const bool same_ledger = stored.result.ledger.environment_steps == again.result.ledger.environment_steps &&
                             stored.result.ledger.judge_trials == again.result.ledger.judge_trials;
    ++total;
    if (report.identical && same_pick && same_ledger) {
      ++identical;
    } else if (first_problem.empty()) {
      first_problem = stored.task_id() + "/" + stored.method() + ": " + report.first_difference;
    }
  }
  v.require(identical == total, std::to_string(identical) + "/" + std::to_string(total) +
                                    " records replay byte-identically" +
                                    (first_problem.empty() ? "" : " (" + first_problem + ")"));
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"elodec acceptance run"};
  std::vector<int> known_gaps;
  std::vector<int> only;
  unsigned parallel = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--known-gap", known_gaps, "Criteria whose failure is documented and tolerated");
  app.add_option("--only", only, "Run only these criteria");
  app.add_option("--parallel", parallel, "Worker threads for the suite criteria");
  CLI11_PARSE(app, argc, argv);

  auto wanted = [&](int n) { return only.empty() || std::find(only.begin(), only.end(), n) != only.end(); };
  std::optional<SuiteRun> suite;
  auto medium = [&]() -> const SuiteRun& {
    if (!suite) suite = run_medium_suite(parallel);
    return *suite;
  };

  struct Criterion {
    int number;
    const char* name;
    double limit_seconds;
    std::function<Verdict()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "Elo math exactness", 1.0, elo_math},
      {2, "Temperature annealing", 1.0, annealing},
      {3, "Selection sampler fidelity", 5.0, sampler_fidelity},
      {4, "Elo convergence", 30.0, elo_convergence},
      {5, "Brute-force optimality", 120.0, brute_force_optimality},
      {6, "Efficiency trend", 900.0, [&] { return efficiency_trend(medium()); }},
      {7, "Elo-success correlation", 900.0, [&] { return elo_success_correlation(medium()); }},
      {8, "Failure taxonomy", 300.0, [&] { return failure_taxonomy(medium()); }},
      {9, "Remote judge conformance", 1.0, remote_judge_conformance},
      {10, "Determinism and replay", 60.0, determinism_and_replay},
  };

  int blocking_failures = 0;
  for (const Criterion& c : criteria) {
    if (!wanted(c.number)) continue;
    const auto started = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v.require(false, std::string("threw: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    v.require(seconds <= c.limit_seconds,
              "runtime " + fmt("%.2f s", seconds) + " (limit " + fmt("%.0f s", c.limit_seconds) + ")");
    const bool gap = std::find(known_gaps.begin(), known_gaps.end(), c.number) != known_gaps.end();
    std::printf("%s criterion %d: %s%s\n", v.pass ? "PASS" : "FAIL", c.number, c.name,
                !v.pass && gap ? " (known gap)" : "");
    for (const std::string& note : v.notes) std::printf("       %s\n", note.c_str());
    std::fflush(stdout);
    if (!v.pass && !gap) ++blocking_failures;
  }
  return blocking_failures == 0 ? 0 : 1;
}
