#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace hill {

using Vertex = std::uint32_t;
using Edge = std::pair<Vertex, Vertex>;

/// Undirected, unit-weight graph. Immutable after construction.
///
/// Every vertex must have at least one incident edge: an isolated vertex has
/// zero volume and makes structural entropy undefined, so it is rejected.
class Graph {
 public:
  /// Builds a graph over vertices [0, node_count). Duplicate edges (in either
  /// orientation) collapse to one. Throws hill::Error on self-loops,
  /// out-of-range endpoints or isolated vertices.
  Graph(std::size_t node_count, std::span<const Edge> edges);

  std::size_t node_count() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::int64_t degree(Vertex v) const;
  std::int64_t volume() const { return volume_; }

  /// Sorted neighbor list of v.
  std::span<const Vertex> neighbors(Vertex v) const;
  /// Canonical edges (u < v), sorted.
  std::span<const Edge> edges() const { return edges_; }

 private:
  std::vector<std::vector<Vertex>> adjacency_;
  std::vector<Edge> edges_;
  std::int64_t volume_ = 0;
};

/// Parses the edge-list text format: one "u v" pair per line, '#' comments,
/// blank lines ignored. The vertex count is one past the largest id seen.
Graph parse_edge_list(std::string_view text);
Graph load_edge_list(const std::filesystem::path& path);
void write_edge_list(std::ostream& out, const Graph& g);

/// Number of edges with exactly one endpoint in `subset`. Repeated vertices
/// count once.
std::int64_t cut_size(const Graph& g, std::span<const Vertex> subset);

/// Sum of degrees over `subset`. Repeated vertices count once.
std::int64_t subset_volume(const Graph& g, std::span<const Vertex> subset);

}  // namespace hill
