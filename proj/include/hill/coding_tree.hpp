#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "hill/graph.hpp"

namespace hill {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

struct TreeNode {
  NodeId parent = kNoNode;
  std::vector<NodeId> children;
  std::int64_t volume = 0;  // vol of the marked vertex subset
  std::int64_t cut = 0;     // edges leaving the marked subset
  std::uint32_t depth = 0;
  bool alive = true;
};

/// A free-standing rooted tree whose leaves are existing nodes of a host
/// CodingTree. Produced by the two-level builder and grafted with
/// CodingTree::merge. nodes[0] is the root and stands for `anchor`.
struct SubTree {
  struct Node {
    std::uint32_t parent = 0;        // ignored for the root
    std::vector<std::uint32_t> children;
    NodeId host = kNoNode;           // host handle, leaves only
  };

  NodeId anchor = kNoNode;
  std::vector<Node> nodes;

  std::uint32_t height() const;
};

struct ValidationReport {
  bool ok = true;
  bool uniform_leaf_depth = true;
  std::vector<std::string> problems;
};

/// Coding tree over a graph: leaf i marks vertex i, every internal node marks
/// the union of its children's subsets.
///
/// Nodes live in a handle-indexed arena. Handles are never reused; removed
/// nodes stay as tombstones. Leaves always occupy handles [0, n). Each node
/// caches the volume and cut of its marked subset, and the tree caches its
/// structural entropy, updated incrementally by every mutator.
class CodingTree {
 public:
  /// Height-1 tree: a fresh root with every vertex as a direct leaf child.
  static CodingTree initial(std::shared_ptr<const Graph> graph);
  static CodingTree initial(const Graph& graph);

  /// Builds a tree from a parent array (kNoNode marks the root). Handles
  /// [0, n) must be the leaves. Children keep the order given by
  /// `children_order` when supplied, ascending handle order otherwise.
  static CodingTree from_parents(std::shared_ptr<const Graph> graph,
                                 const std::vector<NodeId>& parents,
                                 const std::vector<std::vector<NodeId>>* children_order = nullptr);

  const Graph& graph() const { return *graph_; }
  const std::shared_ptr<const Graph>& graph_ptr() const { return graph_; }

  NodeId root() const { return root_; }
  std::size_t leaf_count() const { return graph_->node_count(); }
  bool is_leaf(NodeId v) const { return v < leaf_count(); }
  bool contains(NodeId v) const { return v < nodes_.size() && nodes_[v].alive; }
  const TreeNode& node(NodeId v) const;
  /// Size of the handle space, including tombstones.
  std::size_t capacity() const { return nodes_.size(); }

  /// Largest leaf depth.
  std::uint32_t height() const;
  bool is_aligned() const;

  /// Live handles in ascending order.
  std::vector<NodeId> node_ids() const;
  /// Live nodes at the given depth, ascending.
  std::vector<NodeId> nodes_at_depth(std::uint32_t depth) const;
  /// Vertices marked by v, ascending.
  std::vector<Vertex> marked_subset(NodeId v) const;

  /// Cached structural entropy in bits.
  double entropy() const { return entropy_; }

  /// Inserts a new node between parent(a) and the siblings a, b.
  NodeId compress(NodeId a, NodeId b);
  /// Deletes an internal non-root node, reattaching its children to its
  /// parent at the same position.
  void remove_node(NodeId v);
  /// Inserts unary nodes above shallow leaves until every leaf sits at
  /// height() (bottom-up: each new node goes directly above the leaf).
  void align();
  void align_to(std::uint32_t depth);
  /// Replaces the one-level subtree under `at` by `sub`. The leaves of `sub`
  /// must be exactly the current children of `at`, all at equal depth.
  void merge(NodeId at, const SubTree& sub);

  /// H(after) - H(before) for compress(a, b), from cached values only.
  double delta_compress(NodeId a, NodeId b) const;
  /// H(after) - H(before) for remove_node(v), from cached values only.
  double delta_remove(NodeId v) const;
  /// Number of graph edges between the subsets marked by a and b.
  std::int64_t edges_between(NodeId a, NodeId b) const;

  ValidationReport validate() const;

 private:
  explicit CodingTree(std::shared_ptr<const Graph> graph) : graph_(std::move(graph)) {}

  NodeId add_node(NodeId parent, std::uint32_t depth);
  void shift_depths(NodeId v, int by);
  void require_live(NodeId v, const char* what) const;
  double term(NodeId v) const;
  void recompute_stats(NodeId v);
  void collect_leaves(NodeId v, std::vector<Vertex>& out) const;

  std::shared_ptr<const Graph> graph_;
  std::vector<TreeNode> nodes_;
  NodeId root_ = kNoNode;
  double entropy_ = 0.0;
};

/// Entropy contribution of a non-root node: -(g/vol(G)) log2(vol/vol_parent),
/// zero when the cut is zero.
double entropy_term(std::int64_t cut, std::int64_t volume, std::int64_t parent_volume,
                    std::int64_t graph_volume);

/// Entropy change of compressing two siblings with `between` edges joining
/// them. Shared by the tree mutator and the greedy builder so both rank
/// candidate pairs identically.
double compress_delta(std::int64_t between, std::int64_t volume_a, std::int64_t volume_b,
                      std::int64_t parent_volume, std::int64_t graph_volume);

/// Entropy change of deleting a node whose children's cuts sum to
/// `children_cut`.
double remove_delta(std::int64_t children_cut, std::int64_t cut, std::int64_t volume,
                    std::int64_t parent_volume, std::int64_t graph_volume);

/// Structural entropy summed from the per-node caches.
double structural_entropy(const CodingTree& t);

/// Structural entropy recomputed from marked subsets against the graph,
/// ignoring every cache. Throws if the tree fails validation.
double entropy_from_scratch(const CodingTree& t);

/// JSON: {"height": h, "nodes": [{"id", "parent", "children"}]} with leaves
/// first in vertex order and internal nodes renumbered densely after them.
std::string tree_to_json(const CodingTree& t);
CodingTree tree_from_json(std::shared_ptr<const Graph> graph, std::string_view json);

}  // namespace hill
