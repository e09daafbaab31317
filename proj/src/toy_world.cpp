#include "elodec/toy_world.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace elodec {

namespace {

constexpr std::string_view kStatePrefix = "toy:";
constexpr std::string_view kChoicePrefix = "choice_";

std::string encode(const std::vector<std::uint32_t>& choices) {
  std::string out(kStatePrefix);
  for (std::size_t i = 0; i < choices.size(); ++i) {
    if (i > 0) out += '.';
    out += std::to_string(choices[i]);
  }
  return out;
}

std::optional<std::uint32_t> parse_choice(const Action& action, std::uint32_t branching) {
  const std::string_view text = action.payload;
  if (text.substr(0, kChoicePrefix.size()) != kChoicePrefix) return std::nullopt;
  const std::string digits(text.substr(kChoicePrefix.size()));
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) return std::nullopt;
  const unsigned long k = std::stoul(digits);
  if (k < 1 || k > branching) return std::nullopt;
  return static_cast<std::uint32_t>(k - 1);
}

}  // namespace

ToyWorld::ToyWorld(std::uint32_t branching, std::uint32_t depth, std::vector<double> utility_table,
                   std::uint64_t seed, double success_threshold)
    : branching_(branching), depth_(depth), table_(std::move(utility_table)), seed_(seed) {
  if (branching < 2) throw std::invalid_argument("toy world needs branching >= 2");
  if (depth < 1) throw std::invalid_argument("toy world needs depth >= 1");
  double expected = std::pow(static_cast<double>(branching), static_cast<double>(depth));
  if (expected > 1e7 || static_cast<double>(table_.size()) != expected) {
    throw std::invalid_argument("utility table must hold branching^depth entries");
  }
  for (double u : table_) {
    if (!std::isfinite(u)) throw std::invalid_argument("utility table entries must be finite");
  }
  success_threshold_ = std::isnan(success_threshold)
                           ? *std::max_element(table_.begin(), table_.end())
                           : success_threshold;
}

TaskContext ToyWorld::task_context() const {
  return {"Pick one option at each of " + std::to_string(depth_) + " levels.",
          "Find the best sequence of choices."};
}

State ToyWorld::initial_state() const { return State{std::string(kStatePrefix), false}; }

std::vector<std::uint32_t> ToyWorld::choices_of(const State& state) {
  const std::string_view text = state.payload;
  if (text.substr(0, kStatePrefix.size()) != kStatePrefix) {
    throw std::invalid_argument("not a toy world state: " + state.payload);
  }
  std::vector<std::uint32_t> out;
  std::string_view rest = text.substr(kStatePrefix.size());
  while (!rest.empty()) {
    const std::size_t dot = rest.find('.');
    out.push_back(static_cast<std::uint32_t>(std::stoul(std::string(rest.substr(0, dot)))));
    rest = dot == std::string_view::npos ? std::string_view() : rest.substr(dot + 1);
  }
  return out;
}

PathStep ToyWorld::step(const State& state, const Action& action) const {
  if (state.is_terminal) throw std::invalid_argument("toy world: step from a terminal state");
  std::vector<std::uint32_t> path = choices_of(state);
  PathStep out;
  out.action = action;
  const auto pick = parse_choice(action, branching_);
  if (!pick) {
    out.observation = "invalid action '" + action.payload + "'";
    out.state = state;
    return out;
  }
  path.push_back(*pick);
  const std::string next = encode(path);
  char token[17];
  std::snprintf(token, sizeof token, "%016llx",
                static_cast<unsigned long long>(stable_hash(next, seed_)));
  out.observation = "level " + std::to_string(path.size()) + ": took " + action.payload +
                    " (token " + std::string(token, 8) + ")";
  out.state = State{next, path.size() == depth_};
  out.finished = out.state.is_terminal;
  return out;
}

double ToyWorld::true_utility(const Trail& trail) const {
  const std::vector<std::uint32_t> path =
      trail.empty() ? std::vector<std::uint32_t>{} : choices_of(trail.back().state);
  // Sequences sharing this prefix occupy one contiguous block of the table.
  std::size_t block = table_.size();
  std::size_t start = 0;
  for (std::uint32_t c : path) {
    block /= branching_;
    start += c * block;
  }
  double sum = 0.0;
  for (std::size_t i = start; i < start + block; ++i) sum += table_[i];
  return sum / static_cast<double>(block);
}

bool ToyWorld::is_success(const Trail& trail) const {
  return !trail.empty() && trail.back().finished && true_utility(trail) >= success_threshold_;
}

std::pair<double, double> ToyWorld::utility_bounds() const {
  const auto [lo, hi] = std::minmax_element(table_.begin(), table_.end());
  return {*lo, *hi};
}

Action ToyWorld::choice(std::uint32_t one_based) {
  return Action{std::string(kChoicePrefix) + std::to_string(one_based)};
}

ToySampler::ToySampler(std::uint32_t branching, Mode mode) : branching_(branching), mode_(mode) {
  if (branching < 2) throw std::invalid_argument("toy sampler needs branching >= 2");
}

Action ToySampler::propose(const State&, const Trail&, std::span<const Action> tried, Rng& rng) {
  std::vector<std::uint32_t> untried;
  for (std::uint32_t k = 1; k <= branching_; ++k) {
    const Action a = ToyWorld::choice(k);
    if (std::find(tried.begin(), tried.end(), a) == tried.end()) untried.push_back(k);
  }
  if (mode_ == Mode::kOrdered) return ToyWorld::choice(untried.empty() ? 1 : untried.front());
  if (untried.empty()) return ToyWorld::choice(1 + static_cast<std::uint32_t>(uniform_index(rng, branching_)));
  return ToyWorld::choice(untried[uniform_index(rng, untried.size())]);
}

}  // namespace elodec
