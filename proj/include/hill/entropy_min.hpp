#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>

#include "hill/coding_tree.hpp"

namespace hill {

struct TwoLevelStats {
  std::size_t compress_steps = 0;
  std::size_t remove_steps = 0;
};

/// Greedy height-2 sub-tree over the children of `v`.
///
/// Compresses the sibling pair with the largest entropy reduction until the
/// root has two children, then deletes the internal node with the smallest
/// entropy increase until the height is 2, then pads shallow leaves with
/// unary nodes. Ties go to the lexicographically smallest handle pair (or
/// smallest handle). Candidate pairs sit in a max-heap keyed by their delta;
/// a pair's delta only depends on its two members, so entries are dropped
/// lazily once either member has been consumed.
SubTree build_two_level(const CodingTree& t, NodeId v, TwoLevelStats* stats = nullptr);

/// Greedy coding tree of height exactly k (2 <= k < |V|).
///
/// Starts from the height-1 tree, builds the first two-level split at the
/// root, then grows one level per round: either re-split at the root or split
/// every node one level above the leaves, keeping the lower-entropy result
/// (the second on ties).
CodingTree build_coding_tree(std::shared_ptr<const Graph> graph, std::uint32_t k);
CodingTree build_coding_tree(const Graph& graph, std::uint32_t k);

}  // namespace hill
