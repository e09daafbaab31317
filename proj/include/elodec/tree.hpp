#pragma once

// Search tree of decision steps. Each non-root node is one step
// (parent state, incoming action, resulting state) and carries its own Elo
// score and update count.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "elodec/elo.hpp"

namespace elodec {

struct State {
  std::string payload;
  bool is_terminal = false;

  friend bool operator==(const State&, const State&) = default;
};

struct Action {
  std::string payload;

  friend bool operator==(const Action&, const Action&) = default;
};

enum class NodeId : std::uint32_t {};

inline std::uint32_t to_index(NodeId id) { return static_cast<std::uint32_t>(id); }

struct DecisionNode {
  NodeId id{};
  std::optional<NodeId> parent;
  std::optional<Action> incoming_action;
  std::string observation;
  State state;
  double elo_score = 0.0;
  std::uint64_t update_count = 0;
  std::vector<NodeId> children;
  bool finished_successfully = false;
  // Set when the rollout producing this leaf ran out of call budget.
  bool truncated = false;
  // A child's score or child set changed since this node was last aggregated.
  bool stale = false;
  std::uint32_t depth = 0;

  bool is_leaf() const { return children.empty(); }
};

// Root-to-leaf path. `nodes.front()` is the root, `nodes.back() == leaf`.
struct DecisionSequence {
  std::vector<NodeId> nodes;
  NodeId leaf{};

  std::size_t steps() const { return nodes.empty() ? 0 : nodes.size() - 1; }
  friend bool operator==(const DecisionSequence&, const DecisionSequence&) = default;
};

// One environment transition, as produced by a rollout.
struct PathStep {
  Action action;
  std::string observation;
  State state;
  bool finished = false;
};

// The steps of a sequence without tree bookkeeping; what judges and
// environments look at.
using Trail = std::vector<PathStep>;

struct WeightedChild {
  NodeId node{};
  double weight = 0.0;
};

class DecisionTree {
 public:
  // Throws std::invalid_argument if `initial_state` is terminal or the config
  // is invalid.
  DecisionTree(State initial_state, EloConfig config);

  NodeId root() const { return NodeId{0}; }
  std::size_t size() const { return nodes_.size(); }
  const EloConfig& config() const { return config_; }
  std::span<const DecisionNode> nodes() const { return nodes_; }

  // Throws NotFound for an unknown id.
  const DecisionNode& node(NodeId id) const;
  bool contains(NodeId id) const { return to_index(id) < nodes_.size(); }

  // Attaches a chain of new nodes under `from` and returns the new leaf.
  // Only the last step may reach a terminal state.
  NodeId append_path(NodeId from, std::span<const PathStep> steps);

  // Throws std::invalid_argument unless `leaf` is a non-root node without
  // children.
  DecisionSequence sequence_of(NodeId leaf) const;

  // All non-root childless nodes, oldest first.
  std::vector<NodeId> leaves() const;

  Trail trail(const DecisionSequence& sequence) const;
  Trail trail_to(NodeId node) const;

  // Also marks the parent stale.
  void set_elo(NodeId id, double score);
  void increment_update_count(NodeId id);
  void clear_stale(NodeId id);
  void mark_truncated(NodeId id);

  // Walks the whole tree and throws std::logic_error on any broken
  // parent/child link, cycle, or non-finite score.
  void audit() const;

  // Rebuilds a tree from stored nodes (persistence). Runs audit().
  static DecisionTree from_nodes(std::vector<DecisionNode> nodes, EloConfig config);

 private:
  DecisionTree() = default;
  DecisionNode& mutable_node(NodeId id);

  std::vector<DecisionNode> nodes_;
  EloConfig config_;
};

// Softmax of scores / tau, computed with max-subtraction.
std::vector<double> softmax(std::span<const double> scores, double tau);

// Softmax-weighted mean of child scores at temperature tau.
// Throws std::invalid_argument on an empty list or non-positive tau.
double aggregate_children_elo(std::span<const double> child_scores, double tau);

std::vector<WeightedChild> weighted_children(const DecisionTree& tree, NodeId parent,
                                             double tau);

}  // namespace elodec
