#include "hill/entropy_min.hpp"

#include <algorithm>
#include <queue>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "hill/error.hpp"

namespace hill {

namespace {

// Working copy of one two-level construction. Local ids: the children of the
// anchor come first in ascending handle order, compress nodes follow in
// creation order, so comparing local ids orders them the same way as the host
// handles they would receive.
struct LocalTree {
  struct Node {
    std::int64_t volume = 0;
    std::int64_t cut = 0;
    std::uint32_t parent = 0;
    std::uint32_t depth = 0;
    std::vector<std::uint32_t> children;
    std::unordered_map<std::uint32_t, std::int64_t> links;  // edges to live siblings
    bool alive = true;
    bool consumed = false;  // compressed away from the root's child list
  };

  static constexpr std::uint32_t kRoot = 0;  // the anchor; leaves start at 1

  std::vector<Node> nodes;
  std::vector<NodeId> hosts;  // hosts[i] for local leaf i + 1
  std::int64_t graph_volume = 0;

  bool is_leaf(std::uint32_t i) const { return i != kRoot && i <= hosts.size(); }
};

struct PairEntry {
  double delta;
  std::uint32_t a;
  std::uint32_t b;
};

// Max reduction first means smallest delta first; then smallest (a, b).
struct PairOrder {
  bool operator()(const PairEntry& x, const PairEntry& y) const {
    return std::tie(x.delta, x.a, x.b) > std::tie(y.delta, y.a, y.b);
  }
};

LocalTree make_local(const CodingTree& t, NodeId v) {
  const auto& anchor = t.node(v);
  LocalTree lt;
  lt.graph_volume = t.graph().volume();
  lt.hosts = anchor.children;
  std::sort(lt.hosts.begin(), lt.hosts.end());

  lt.nodes.resize(lt.hosts.size() + 1);
  lt.nodes[LocalTree::kRoot].volume = anchor.volume;
  lt.nodes[LocalTree::kRoot].cut = anchor.cut;

  // Owner of every vertex under the anchor, to count edges between children.
  std::vector<std::uint32_t> owner(t.leaf_count(), 0);
  for (std::uint32_t i = 0; i < lt.hosts.size(); ++i) {
    const auto& child = t.node(lt.hosts[i]);
    auto& ln = lt.nodes[i + 1];
    ln.volume = child.volume;
    ln.cut = child.cut;
    ln.parent = LocalTree::kRoot;
    ln.depth = 1;
    lt.nodes[LocalTree::kRoot].children.push_back(i + 1);
    for (Vertex u : t.marked_subset(lt.hosts[i])) owner[u] = i + 1;
  }
  const auto& g = t.graph();
  for (std::uint32_t i = 1; i <= lt.hosts.size(); ++i) {
    for (Vertex u : t.marked_subset(lt.hosts[i - 1])) {
      for (Vertex x : g.neighbors(u)) {
        if (owner[x] != 0 && owner[x] != i) lt.nodes[i].links[owner[x]] += 1;
      }
    }
  }
  return lt;
}

void compress_phase(LocalTree& lt, TwoLevelStats& stats) {
  auto& root = lt.nodes[LocalTree::kRoot];
  std::priority_queue<PairEntry, std::vector<PairEntry>, PairOrder> heap;
  auto pair_delta = [&](std::uint32_t a, std::uint32_t b, std::int64_t w) {
    return compress_delta(w, lt.nodes[a].volume, lt.nodes[b].volume,
                          lt.nodes[LocalTree::kRoot].volume, lt.graph_volume);
  };
  for (std::uint32_t a : root.children) {
    for (auto [b, w] : lt.nodes[a].links) {
      if (a < b) heap.push({pair_delta(a, b, w), a, b});
    }
  }

  while (lt.nodes[LocalTree::kRoot].children.size() > 2) {
    std::uint32_t a = 0, b = 0;
    while (!heap.empty() && (lt.nodes[heap.top().a].consumed || lt.nodes[heap.top().b].consumed)) {
      heap.pop();
    }
    if (!heap.empty()) {
      a = heap.top().a;
      b = heap.top().b;
      heap.pop();
    } else {
      // No linked pair is left: every candidate has delta 0, so the tie-break
      // picks the two smallest ids.
      auto kids = lt.nodes[LocalTree::kRoot].children;
      std::partial_sort(kids.begin(), kids.begin() + 2, kids.end());
      a = kids[0];
      b = kids[1];
    }

    const auto gamma = static_cast<std::uint32_t>(lt.nodes.size());
    lt.nodes.emplace_back();
    auto& na = lt.nodes[a];
    auto& nb = lt.nodes[b];
    auto& ng = lt.nodes[gamma];
    const std::int64_t w = na.links.count(b) ? na.links.at(b) : 0;
    ng.volume = na.volume + nb.volume;
    ng.cut = na.cut + nb.cut - 2 * w;
    ng.parent = LocalTree::kRoot;
    ng.depth = 1;
    ng.children = {a, b};

    for (auto* member : {&na, &nb}) {
      for (auto [x, wx] : member->links) {
        if (x == a || x == b) continue;
        ng.links[x] += wx;
        auto& back = lt.nodes[x].links;
        back.erase(member == &na ? a : b);
        back[gamma] += wx;
      }
      member->links.clear();
      member->consumed = true;
      member->parent = gamma;
    }

    auto& kids = lt.nodes[LocalTree::kRoot].children;
    const auto pos_a = std::find(kids.begin(), kids.end(), a) - kids.begin();
    const auto pos_b = std::find(kids.begin(), kids.end(), b) - kids.begin();
    kids[std::min(pos_a, pos_b)] = gamma;
    kids.erase(kids.begin() + std::max(pos_a, pos_b));

    for (auto [x, wx] : lt.nodes[gamma].links) heap.push({pair_delta(x, gamma, wx), x, gamma});
    ++stats.compress_steps;
  }

  std::vector<std::uint32_t> stack{LocalTree::kRoot};
  lt.nodes[LocalTree::kRoot].depth = 0;
  while (!stack.empty()) {
    const auto u = stack.back();
    stack.pop_back();
    for (auto c : lt.nodes[u].children) {
      lt.nodes[c].parent = u;
      lt.nodes[c].depth = lt.nodes[u].depth + 1;
      stack.push_back(c);
    }
  }
}

std::uint32_t local_height(const LocalTree& lt) {
  std::uint32_t h = 0;
  for (std::uint32_t i = 1; i <= lt.hosts.size(); ++i) h = std::max(h, lt.nodes[i].depth);
  return h;
}

void remove_phase(LocalTree& lt, TwoLevelStats& stats) {
  const auto first_internal = static_cast<std::uint32_t>(lt.hosts.size() + 1);
  while (local_height(lt) > 2) {
    std::uint32_t best = 0;
    double best_delta = 0.0;
    for (std::uint32_t v = first_internal; v < lt.nodes.size(); ++v) {
      const auto& nd = lt.nodes[v];
      if (!nd.alive) continue;
      std::int64_t children_cut = 0;
      for (auto c : nd.children) children_cut += lt.nodes[c].cut;
      const double d = remove_delta(children_cut, nd.cut, nd.volume, lt.nodes[nd.parent].volume,
                                    lt.graph_volume);
      if (best == 0 || d < best_delta) {
        best = v;
        best_delta = d;
      }
    }

    auto& victim = lt.nodes[best];
    auto& siblings = lt.nodes[victim.parent].children;
    auto pos = siblings.erase(std::find(siblings.begin(), siblings.end(), best));
    siblings.insert(pos, victim.children.begin(), victim.children.end());
    std::vector<std::uint32_t> stack;
    for (auto c : victim.children) {
      lt.nodes[c].parent = victim.parent;
      stack.push_back(c);
    }
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      lt.nodes[u].depth -= 1;
      for (auto c : lt.nodes[u].children) stack.push_back(c);
    }
    victim.children.clear();
    victim.alive = false;
    ++stats.remove_steps;
  }
}

SubTree emit(const LocalTree& lt, NodeId anchor) {
  SubTree sub;
  sub.anchor = anchor;
  sub.nodes.emplace_back();
  // (local id, sub index) in BFS order; leaves at depth 1 get a unary parent.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> queue{{LocalTree::kRoot, 0}};
  for (std::size_t i = 0; i < queue.size(); ++i) {
    const auto [local, idx] = queue[i];
    for (auto c : lt.nodes[local].children) {
      auto attach = [&sub](std::uint32_t parent) {
        const auto id = static_cast<std::uint32_t>(sub.nodes.size());
        sub.nodes.emplace_back();
        sub.nodes[id].parent = parent;
        sub.nodes[parent].children.push_back(id);
        return id;
      };
      std::uint32_t parent = idx;
      if (lt.is_leaf(c) && local == LocalTree::kRoot) parent = attach(idx);
      const auto id = attach(parent);
      if (lt.is_leaf(c)) {
        sub.nodes[id].host = lt.hosts[c - 1];
      } else {
        queue.emplace_back(c, id);
      }
    }
  }
  return sub;
}

}  // namespace

SubTree build_two_level(const CodingTree& t, NodeId v, TwoLevelStats* stats) {
  if (!t.contains(v)) throw Error("node " + std::to_string(v) + " is not in the tree");
  if (t.is_leaf(v)) throw Error("cannot build a sub-tree under leaf " + std::to_string(v));
  TwoLevelStats local_stats;
  auto lt = make_local(t, v);
  compress_phase(lt, local_stats);
  remove_phase(lt, local_stats);
  if (stats) *stats = local_stats;
  return emit(lt, v);
}

CodingTree build_coding_tree(std::shared_ptr<const Graph> graph, std::uint32_t k) {
  if (!graph) throw Error("null graph");
  if (k < 2) throw Error("coding tree height must be at least 2, got " + std::to_string(k));
  if (k >= graph->node_count()) {
    throw Error("coding tree height " + std::to_string(k) + " needs more than " +
                std::to_string(graph->node_count()) + " vertices");
  }
  auto t = CodingTree::initial(std::move(graph));
  t.merge(t.root(), build_two_level(t, t.root()));

  while (t.height() < k) {
    auto at_root = t;
    at_root.merge(at_root.root(), build_two_level(at_root, at_root.root()));

    auto below = t;
    for (NodeId v : t.nodes_at_depth(t.height() - 1)) below.merge(v, build_two_level(below, v));

    t = structural_entropy(at_root) < structural_entropy(below) ? std::move(at_root) : std::move(below);
  }
  return t;
}

CodingTree build_coding_tree(const Graph& graph, std::uint32_t k) {
  return build_coding_tree(std::make_shared<const Graph>(graph), k);
}

}  // namespace hill
