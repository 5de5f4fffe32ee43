#include "hill/oracle.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "hill/error.hpp"

namespace hill {

namespace {

struct Block {
  std::vector<Vertex> members;
  std::int64_t volume = 0;
  std::int64_t cut = 0;
};

std::vector<Block> blocks_of(const Graph& g, const std::vector<std::vector<Vertex>>& groups) {
  std::vector<Block> out;
  out.reserve(groups.size());
  for (const auto& members : groups) {
    out.push_back({members, subset_volume(g, members), cut_size(g, members)});
  }
  return out;
}

// Groups items by their restricted-growth label.
template <class T>
std::vector<std::vector<T>> group(const std::vector<std::uint32_t>& labels, const std::vector<T>& items) {
  const auto count = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::vector<T>> out(count);
  for (std::size_t i = 0; i < labels.size(); ++i) out[labels[i]].push_back(items[i]);
  return out;
}

}  // namespace

OracleResult oracle_min_entropy(std::shared_ptr<const Graph> graph, std::uint32_t k) {
  if (!graph) throw Error("null graph");
  const auto& g = *graph;
  const auto n = g.node_count();
  if (k != 2 && k != 3) throw Error("oracle supports height 2 or 3, got " + std::to_string(k));
  const auto limit = k == 2 ? kOracleMaxVerticesK2 : kOracleMaxVerticesK3;
  if (n > limit) {
    throw Error("oracle at height " + std::to_string(k) + " is limited to " + std::to_string(limit) +
                " vertices, graph has " + std::to_string(n));
  }

  const auto vol_g = g.volume();
  std::vector<Vertex> vertices(n);
  for (Vertex v = 0; v < n; ++v) vertices[v] = v;

  double best = std::numeric_limits<double>::infinity();
  std::vector<std::vector<std::uint32_t>> best_layers;

  for_each_set_partition(n, [&](const std::vector<std::uint32_t>& lower) {
    const auto blocks = blocks_of(g, group(lower, vertices));
    double leaf_terms = 0.0;
    for (Vertex v = 0; v < n; ++v) {
      leaf_terms += entropy_term(g.degree(v), g.degree(v), blocks[lower[v]].volume, vol_g);
    }

    if (k == 2) {
      double h = leaf_terms;
      for (const auto& b : blocks) h += entropy_term(b.cut, b.volume, vol_g, vol_g);
      if (h < best) {
        best = h;
        best_layers = {lower};
      }
      return;
    }

    std::vector<std::uint32_t> block_ids(blocks.size());
    for (std::uint32_t i = 0; i < block_ids.size(); ++i) block_ids[i] = i;
    for_each_set_partition(blocks.size(), [&](const std::vector<std::uint32_t>& upper) {
      std::vector<std::vector<Vertex>> upper_members(
          upper.empty() ? 0 : *std::max_element(upper.begin(), upper.end()) + 1);
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        auto& dst = upper_members[upper[b]];
        dst.insert(dst.end(), blocks[b].members.begin(), blocks[b].members.end());
      }
      const auto supers = blocks_of(g, upper_members);
      double h = leaf_terms;
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        h += entropy_term(blocks[b].cut, blocks[b].volume, supers[upper[b]].volume, vol_g);
      }
      for (const auto& s : supers) h += entropy_term(s.cut, s.volume, vol_g, vol_g);
      if (h < best) {
        best = h;
        best_layers = {lower, upper};
      }
    });
  });

  // Materialize: leaves [0, n), root n, then the top layer, then lower layers.
  std::vector<NodeId> parents(n + 1, kNoNode);
  const NodeId root = static_cast<NodeId>(n);
  std::vector<NodeId> above(1, root);  // parent handle for each group of the layer above
  std::vector<std::uint32_t> identity{0};
  for (std::size_t layer = best_layers.size(); layer-- > 0;) {
    const auto& labels = best_layers[layer];
    const auto groups = *std::max_element(labels.begin(), labels.end()) + 1;
    const auto& parent_of_group = layer + 1 < best_layers.size() ? best_layers[layer + 1] : identity;
    std::vector<NodeId> handles(groups);
    for (std::uint32_t gi = 0; gi < groups; ++gi) {
      handles[gi] = static_cast<NodeId>(parents.size());
      const auto up = layer + 1 < best_layers.size() ? parent_of_group[gi] : 0;
      parents.push_back(above[up]);
    }
    above = std::move(handles);
  }
  for (Vertex v = 0; v < n; ++v) parents[v] = above[best_layers.front()[v]];

  auto tree = CodingTree::from_parents(std::move(graph), parents);
  return {std::move(tree), best, std::move(best_layers)};
}

OracleResult oracle_min_entropy(const Graph& graph, std::uint32_t k) {
  return oracle_min_entropy(std::make_shared<const Graph>(graph), k);
}

}  // namespace hill
