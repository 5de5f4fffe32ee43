#include "hill/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include "hill/error.hpp"

namespace hill {

namespace {

std::vector<char> membership(const Graph& g, std::span<const Vertex> subset) {
  std::vector<char> in(g.node_count(), 0);
  for (Vertex v : subset) {
    if (v >= g.node_count()) {
      throw Error("vertex " + std::to_string(v) + " out of range (node_count " +
                  std::to_string(g.node_count()) + ")");
    }
    in[v] = 1;
  }
  return in;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

Graph::Graph(std::size_t node_count, std::span<const Edge> edges) {
  if (node_count == 0) throw Error("graph must have at least one vertex");
  adjacency_.resize(node_count);
  edges_.reserve(edges.size());
  for (auto [u, v] : edges) {
    if (u >= node_count || v >= node_count) {
      throw Error("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                  ") has an endpoint outside [0, " + std::to_string(node_count) + ")");
    }
    if (u == v) throw Error("self-loop on vertex " + std::to_string(u));
    edges_.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  for (auto [u, v] : edges_) {
    adjacency_[u].push_back(v);
    adjacency_[v].push_back(u);
  }
  for (std::size_t v = 0; v < node_count; ++v) {
    if (adjacency_[v].empty()) throw Error("isolated vertex " + std::to_string(v));
    std::sort(adjacency_[v].begin(), adjacency_[v].end());
  }
  volume_ = 2 * static_cast<std::int64_t>(edges_.size());
}

std::int64_t Graph::degree(Vertex v) const {
  if (v >= node_count()) throw Error("vertex " + std::to_string(v) + " out of range");
  return static_cast<std::int64_t>(adjacency_[v].size());
}

std::span<const Vertex> Graph::neighbors(Vertex v) const {
  if (v >= node_count()) throw Error("vertex " + std::to_string(v) + " out of range");
  return adjacency_[v];
}

Graph parse_edge_list(std::string_view text) {
  std::vector<Edge> edges;
  Vertex max_id = 0;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    line = trim(line);
    if (line.empty() || line.front() == '#') continue;

    Vertex ids[2];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int i = 0; i < 2; ++i) {
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      auto [next, ec] = std::from_chars(p, end, ids[i]);
      if (ec != std::errc{} || next == p) {
        throw Error("line " + std::to_string(line_no) + ": expected two nonnegative vertex ids");
      }
      p = next;
    }
    while (p < end && (*p == ' ' || *p == '\t')) ++p;
    if (p != end) {
      throw Error("line " + std::to_string(line_no) + ": trailing characters after edge");
    }
    if (ids[0] == ids[1]) {
      throw Error("line " + std::to_string(line_no) + ": self-loop on vertex " +
                  std::to_string(ids[0]));
    }
    max_id = std::max({max_id, ids[0], ids[1]});
    edges.emplace_back(ids[0], ids[1]);
  }
  if (edges.empty()) throw Error("edge list is empty");
  return Graph(static_cast<std::size_t>(max_id) + 1, edges);
}

Graph load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open graph file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_edge_list(buf.str());
}

void write_edge_list(std::ostream& out, const Graph& g) {
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

std::int64_t cut_size(const Graph& g, std::span<const Vertex> subset) {
  const auto in = membership(g, subset);
  std::int64_t cut = 0;
  for (auto [u, v] : g.edges()) cut += in[u] != in[v];
  return cut;
}

std::int64_t subset_volume(const Graph& g, std::span<const Vertex> subset) {
  const auto in = membership(g, subset);
  std::int64_t vol = 0;
  for (std::size_t v = 0; v < in.size(); ++v) {
    if (in[v]) vol += g.degree(static_cast<Vertex>(v));
  }
  return vol;
}

}  // namespace hill
