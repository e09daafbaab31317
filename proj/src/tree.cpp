#include "elodec/tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "elodec/errors.hpp"

namespace elodec {

DecisionTree::DecisionTree(State initial_state, EloConfig config) : config_(config) {
  config_.validate();
  if (initial_state.is_terminal) {
    throw std::invalid_argument("initial state must not be terminal");
  }
  DecisionNode root;
  root.id = NodeId{0};
  root.state = std::move(initial_state);
  root.elo_score = config_.initial_score;
  nodes_.push_back(std::move(root));
}

const DecisionNode& DecisionTree::node(NodeId id) const {
  if (!contains(id)) throw NotFound("unknown node id " + std::to_string(to_index(id)));
  return nodes_[to_index(id)];
}

DecisionNode& DecisionTree::mutable_node(NodeId id) {
  if (!contains(id)) throw NotFound("unknown node id " + std::to_string(to_index(id)));
  return nodes_[to_index(id)];
}

NodeId DecisionTree::append_path(NodeId from, std::span<const PathStep> steps) {
  const DecisionNode& anchor = node(from);
  if (anchor.state.is_terminal) {
    throw std::invalid_argument("cannot extend a terminal state");
  }
  if (steps.empty()) throw std::invalid_argument("empty path");
  for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
    if (steps[i].state.is_terminal) {
      throw std::invalid_argument("terminal state inside a path at step " + std::to_string(i));
    }
  }

  NodeId parent = from;
  std::uint32_t depth = anchor.depth;
  for (const PathStep& step : steps) {
    DecisionNode child;
    child.id = NodeId{static_cast<std::uint32_t>(nodes_.size())};
    child.parent = parent;
    child.incoming_action = step.action;
    child.observation = step.observation;
    child.state = step.state;
    child.elo_score = config_.initial_score;
    child.depth = ++depth;
    nodes_[to_index(parent)].children.push_back(child.id);
    parent = child.id;
    nodes_.push_back(std::move(child));
  }
  nodes_.back().finished_successfully = steps.back().finished;
  nodes_[to_index(from)].stale = true;
  return parent;
}

DecisionSequence DecisionTree::sequence_of(NodeId leaf) const {
  const DecisionNode& n = node(leaf);
  if (leaf == root()) throw std::invalid_argument("the root alone is not a sequence");
  if (!n.is_leaf()) throw std::invalid_argument("node has children, not a leaf");
  DecisionSequence seq;
  seq.leaf = leaf;
  for (std::optional<NodeId> cur = leaf; cur; cur = nodes_[to_index(*cur)].parent) {
    seq.nodes.push_back(*cur);
  }
  std::reverse(seq.nodes.begin(), seq.nodes.end());
  return seq;
}

std::vector<NodeId> DecisionTree::leaves() const {
  std::vector<NodeId> out;
  for (const DecisionNode& n : nodes_) {
    if (n.id != root() && n.is_leaf()) out.push_back(n.id);
  }
  return out;
}

Trail DecisionTree::trail(const DecisionSequence& sequence) const {
  Trail out;
  out.reserve(sequence.steps());
  for (std::size_t i = 1; i < sequence.nodes.size(); ++i) {
    const DecisionNode& n = node(sequence.nodes[i]);
    out.push_back(PathStep{*n.incoming_action, n.observation, n.state, n.finished_successfully});
  }
  return out;
}

Trail DecisionTree::trail_to(NodeId id) const {
  Trail out;
  for (std::optional<NodeId> cur = id; cur && *cur != root(); cur = node(*cur).parent) {
    const DecisionNode& n = node(*cur);
    out.push_back(PathStep{*n.incoming_action, n.observation, n.state, n.finished_successfully});
  }
  std::reverse(out.begin(), out.end());
  return out;
}

void DecisionTree::set_elo(NodeId id, double score) {
  if (!std::isfinite(score)) throw std::invalid_argument("non-finite elo score");
  DecisionNode& n = mutable_node(id);
  n.elo_score = score;
  if (n.parent) nodes_[to_index(*n.parent)].stale = true;
}

void DecisionTree::increment_update_count(NodeId id) { ++mutable_node(id).update_count; }

void DecisionTree::clear_stale(NodeId id) { mutable_node(id).stale = false; }

void DecisionTree::mark_truncated(NodeId id) { mutable_node(id).truncated = true; }

void DecisionTree::audit() const {
  auto fail = [](const std::string& what) { throw std::logic_error("tree audit: " + what); };
  if (nodes_.empty()) fail("no root");
  std::vector<int> seen_as_child(nodes_.size(), 0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const DecisionNode& n = nodes_[i];
    const std::string where = "node " + std::to_string(i);
    if (to_index(n.id) != i) fail(where + " has mismatched id");
    if (!std::isfinite(n.elo_score)) fail(where + " has non-finite elo");
    if (i == 0) {
      if (n.parent || n.incoming_action) fail("root has a parent or incoming action");
      if (n.depth != 0) fail("root depth is not 0");
    } else {
      if (!n.parent || !n.incoming_action) fail(where + " lacks parent or action");
      // Parents always precede children, which rules out cycles.
      if (to_index(*n.parent) >= i) fail(where + " has a parent created after it");
      const DecisionNode& p = nodes_[to_index(*n.parent)];
      if (std::count(p.children.begin(), p.children.end(), n.id) != 1) {
        fail(where + " is not listed exactly once by its parent");
      }
      if (n.depth != p.depth + 1) fail(where + " has wrong depth");
      if (p.state.is_terminal) fail(where + " hangs under a terminal state");
    }
    for (NodeId c : n.children) {
      if (!contains(c)) fail(where + " lists unknown child");
      if (nodes_[to_index(c)].parent != n.id) fail(where + " lists a child that points elsewhere");
      if (++seen_as_child[to_index(c)] > 1) fail("child listed twice");
    }
  }
}

DecisionTree DecisionTree::from_nodes(std::vector<DecisionNode> nodes, EloConfig config) {
  config.validate();
  DecisionTree tree;
  tree.config_ = config;
  tree.nodes_ = std::move(nodes);
  tree.audit();
  return tree;
}

std::vector<double> softmax(std::span<const double> scores, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("temperature must be positive");
  std::vector<double> out(scores.size());
  if (scores.empty()) return out;
  const double top = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp((scores[i] - top) / tau);
    total += out[i];
  }
  for (double& w : out) w /= total;
  return out;
}

double aggregate_children_elo(std::span<const double> child_scores, double tau) {
  if (child_scores.empty()) throw std::invalid_argument("no child scores to aggregate");
  const std::vector<double> weights = softmax(child_scores, tau);
  double value = 0.0;
  for (std::size_t i = 0; i < child_scores.size(); ++i) value += weights[i] * child_scores[i];
  // Rounding can leave the sum a hair outside the inputs' range.
  const auto [lo, hi] = std::minmax_element(child_scores.begin(), child_scores.end());
  return std::clamp(value, *lo, *hi);
}

std::vector<WeightedChild> weighted_children(const DecisionTree& tree, NodeId parent,
                                             double tau) {
  const DecisionNode& p = tree.node(parent);
  std::vector<double> scores;
  scores.reserve(p.children.size());
  for (NodeId c : p.children) scores.push_back(tree.node(c).elo_score);
  const std::vector<double> weights = softmax(scores, tau);
  std::vector<WeightedChild> out;
  for (std::size_t i = 0; i < weights.size(); ++i) out.push_back({p.children[i], weights[i]});
  return out;
}

}  // namespace elodec
