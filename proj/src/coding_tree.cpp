#include "hill/coding_tree.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <json.hpp>

#include "hill/error.hpp"

namespace hill {

namespace {

std::string id_str(NodeId v) { return std::to_string(v); }

// Cut of a vertex subset given as a membership mask plus the member list.
std::int64_t mask_cut(const Graph& g, const std::vector<char>& in, const std::vector<Vertex>& members) {
  std::int64_t cut = 0;
  for (Vertex u : members) {
    for (Vertex w : g.neighbors(u)) cut += !in[w];
  }
  return cut;
}

}  // namespace

std::uint32_t SubTree::height() const {
  if (nodes.empty()) return 0;
  std::uint32_t h = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    if (nodes[i].children.empty()) h = std::max(h, d);
    for (auto c : nodes[i].children) stack.emplace_back(c, d + 1);
  }
  return h;
}

double entropy_term(std::int64_t cut, std::int64_t volume, std::int64_t parent_volume,
                    std::int64_t graph_volume) {
  if (cut == 0) return 0.0;
  return -(static_cast<double>(cut) / static_cast<double>(graph_volume)) *
         std::log2(static_cast<double>(volume) / static_cast<double>(parent_volume));
}

double compress_delta(std::int64_t between, std::int64_t volume_a, std::int64_t volume_b,
                      std::int64_t parent_volume, std::int64_t graph_volume) {
  if (between == 0) return 0.0;
  // Only the 2w cut weight between a and b moves from the parent level to the
  // new node; every other term cancels.
  const double merged = static_cast<double>(volume_a + volume_b);
  return (2.0 * static_cast<double>(between) / static_cast<double>(graph_volume)) *
         std::log2(merged / static_cast<double>(parent_volume));
}

double remove_delta(std::int64_t children_cut, std::int64_t cut, std::int64_t volume,
                    std::int64_t parent_volume, std::int64_t graph_volume) {
  if (children_cut == cut) return 0.0;
  return (static_cast<double>(children_cut - cut) / static_cast<double>(graph_volume)) *
         std::log2(static_cast<double>(parent_volume) / static_cast<double>(volume));
}

// ---------------------------------------------------------------------------
// Construction

CodingTree CodingTree::initial(std::shared_ptr<const Graph> graph) {
  if (!graph) throw Error("null graph");
  CodingTree t(std::move(graph));
  const auto n = t.leaf_count();
  const auto& g = *t.graph_;
  t.nodes_.resize(n + 1);
  t.root_ = static_cast<NodeId>(n);
  auto& root = t.nodes_[n];
  root.volume = g.volume();
  root.cut = 0;
  root.depth = 0;
  for (NodeId v = 0; v < n; ++v) {
    auto& leaf = t.nodes_[v];
    leaf.parent = t.root_;
    leaf.depth = 1;
    leaf.volume = g.degree(v);
    leaf.cut = g.degree(v);
    root.children.push_back(v);
  }
  t.entropy_ = structural_entropy(t);
  return t;
}

CodingTree CodingTree::initial(const Graph& graph) {
  return initial(std::make_shared<const Graph>(graph));
}

CodingTree CodingTree::from_parents(std::shared_ptr<const Graph> graph,
                                    const std::vector<NodeId>& parents,
                                    const std::vector<std::vector<NodeId>>* children_order) {
  if (!graph) throw Error("null graph");
  CodingTree t(std::move(graph));
  const auto n = t.leaf_count();
  const auto total = parents.size();
  if (total <= n) throw Error("coding tree needs a root besides the " + std::to_string(n) + " leaves");

  t.nodes_.resize(total);
  for (NodeId v = 0; v < total; ++v) {
    const NodeId p = parents[v];
    t.nodes_[v].parent = p;
    if (p == kNoNode) {
      if (t.root_ != kNoNode) throw Error("coding tree has more than one root");
      t.root_ = v;
      continue;
    }
    if (p >= total) throw Error("node " + id_str(v) + " has unknown parent " + id_str(p));
    if (p < n) throw Error("leaf " + id_str(p) + " cannot be a parent");
    t.nodes_[p].children.push_back(v);
  }
  if (t.root_ == kNoNode) throw Error("coding tree has no root");
  if (t.root_ < n) throw Error("a leaf cannot be the root");

  if (children_order) {
    if (children_order->size() != total) throw Error("children list size mismatch");
    for (NodeId v = 0; v < total; ++v) {
      auto given = (*children_order)[v];
      auto sorted_given = given;
      std::sort(sorted_given.begin(), sorted_given.end());
      if (sorted_given != t.nodes_[v].children) {
        throw Error("children of node " + id_str(v) + " disagree with parent links");
      }
      t.nodes_[v].children = std::move(given);
    }
  }

  // Depths by BFS; also proves every node hangs off the root.
  std::vector<char> seen(total, 0);
  std::vector<NodeId> order{t.root_};
  seen[t.root_] = 1;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const NodeId v = order[i];
    for (NodeId c : t.nodes_[v].children) {
      if (seen[c]) throw Error("node " + id_str(c) + " reached twice");
      seen[c] = 1;
      t.nodes_[c].depth = t.nodes_[v].depth + 1;
      order.push_back(c);
    }
  }
  if (order.size() != total) throw Error("coding tree is not connected to its root");
  for (NodeId v = n; v < total; ++v) {
    if (t.nodes_[v].children.empty()) {
      throw Error("internal node " + id_str(v) + " has no children");
    }
  }

  for (auto it = order.rbegin(); it != order.rend(); ++it) t.recompute_stats(*it);
  t.entropy_ = structural_entropy(t);
  return t;
}

// ---------------------------------------------------------------------------
// Queries

const TreeNode& CodingTree::node(NodeId v) const {
  require_live(v, "node");
  return nodes_[v];
}

void CodingTree::require_live(NodeId v, const char* what) const {
  if (!contains(v)) throw Error(std::string(what) + " " + id_str(v) + " is not a live tree node");
}

std::uint32_t CodingTree::height() const {
  std::uint32_t h = 0;
  for (NodeId v = 0; v < leaf_count(); ++v) h = std::max(h, nodes_[v].depth);
  return h;
}

bool CodingTree::is_aligned() const {
  const auto h = height();
  for (NodeId v = 0; v < leaf_count(); ++v) {
    if (nodes_[v].depth != h) return false;
  }
  return true;
}

std::vector<NodeId> CodingTree::node_ids() const {
  std::vector<NodeId> ids;
  for (NodeId v = 0; v < nodes_.size(); ++v) {
    if (nodes_[v].alive) ids.push_back(v);
  }
  return ids;
}

std::vector<NodeId> CodingTree::nodes_at_depth(std::uint32_t depth) const {
  std::vector<NodeId> ids;
  for (NodeId v = 0; v < nodes_.size(); ++v) {
    if (nodes_[v].alive && nodes_[v].depth == depth) ids.push_back(v);
  }
  return ids;
}

void CodingTree::collect_leaves(NodeId v, std::vector<Vertex>& out) const {
  std::vector<NodeId> stack{v};
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    if (is_leaf(u)) {
      out.push_back(u);
      continue;
    }
    for (NodeId c : nodes_[u].children) stack.push_back(c);
  }
}

std::vector<Vertex> CodingTree::marked_subset(NodeId v) const {
  require_live(v, "node");
  std::vector<Vertex> out;
  collect_leaves(v, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::int64_t CodingTree::edges_between(NodeId a, NodeId b) const {
  require_live(a, "node");
  require_live(b, "node");
  std::vector<Vertex> in_b;
  collect_leaves(b, in_b);
  std::vector<char> mask(leaf_count(), 0);
  for (Vertex v : in_b) mask[v] = 1;
  std::vector<Vertex> in_a;
  collect_leaves(a, in_a);
  std::int64_t w = 0;
  for (Vertex u : in_a) {
    for (Vertex x : graph_->neighbors(u)) w += mask[x];
  }
  return w;
}

double CodingTree::term(NodeId v) const {
  const auto& nd = nodes_[v];
  return entropy_term(nd.cut, nd.volume, nodes_[nd.parent].volume, graph_->volume());
}

void CodingTree::recompute_stats(NodeId v) {
  std::vector<Vertex> members;
  collect_leaves(v, members);
  std::vector<char> mask(leaf_count(), 0);
  std::int64_t vol = 0;
  for (Vertex u : members) {
    mask[u] = 1;
    vol += graph_->degree(u);
  }
  nodes_[v].volume = vol;
  nodes_[v].cut = mask_cut(*graph_, mask, members);
}

// ---------------------------------------------------------------------------
// Deltas

double CodingTree::delta_compress(NodeId a, NodeId b) const {
  require_live(a, "node");
  require_live(b, "node");
  if (a == b) throw Error("compress needs two distinct nodes, got " + id_str(a) + " twice");
  if (a == root_ || b == root_) throw Error("compress cannot take the root");
  const NodeId p = nodes_[a].parent;
  if (nodes_[b].parent != p) throw Error("nodes " + id_str(a) + " and " + id_str(b) + " are not siblings");

  return compress_delta(edges_between(a, b), nodes_[a].volume, nodes_[b].volume,
                        nodes_[p].volume, graph_->volume());
}

double CodingTree::delta_remove(NodeId v) const {
  require_live(v, "node");
  if (v == root_) throw Error("cannot remove the root");
  if (is_leaf(v)) throw Error("cannot remove leaf " + id_str(v));
  const auto& nd = nodes_[v];
  std::int64_t child_cut = 0;
  for (NodeId c : nd.children) child_cut += nodes_[c].cut;
  return remove_delta(child_cut, nd.cut, nd.volume, nodes_[nd.parent].volume, graph_->volume());
}

// ---------------------------------------------------------------------------
// Mutators

NodeId CodingTree::add_node(NodeId parent, std::uint32_t depth) {
  const auto id = static_cast<NodeId>(nodes_.size());
  TreeNode nd;
  nd.parent = parent;
  nd.depth = depth;
  nodes_.push_back(std::move(nd));
  return id;
}

void CodingTree::shift_depths(NodeId v, int by) {
  if (by == 0) return;
  std::vector<NodeId> stack{v};
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    nodes_[u].depth = static_cast<std::uint32_t>(static_cast<int>(nodes_[u].depth) + by);
    for (NodeId c : nodes_[u].children) stack.push_back(c);
  }
}

NodeId CodingTree::compress(NodeId a, NodeId b) {
  const double delta = delta_compress(a, b);
  const std::int64_t w = edges_between(a, b);
  const NodeId p = nodes_[a].parent;

  const NodeId gamma = add_node(p, nodes_[p].depth + 1);
  auto& siblings = nodes_[p].children;
  const auto pos_a = std::find(siblings.begin(), siblings.end(), a) - siblings.begin();
  const auto pos_b = std::find(siblings.begin(), siblings.end(), b) - siblings.begin();
  siblings[std::min(pos_a, pos_b)] = gamma;
  siblings.erase(siblings.begin() + std::max(pos_a, pos_b));

  auto& g = nodes_[gamma];
  g.children = {a, b};
  g.volume = nodes_[a].volume + nodes_[b].volume;
  g.cut = nodes_[a].cut + nodes_[b].cut - 2 * w;
  nodes_[a].parent = gamma;
  nodes_[b].parent = gamma;
  shift_depths(a, 1);
  shift_depths(b, 1);

  entropy_ += delta;
  return gamma;
}

void CodingTree::remove_node(NodeId v) {
  const double delta = delta_remove(v);
  const NodeId p = nodes_[v].parent;
  auto children = std::move(nodes_[v].children);
  nodes_[v].children.clear();

  auto& siblings = nodes_[p].children;
  auto pos = std::find(siblings.begin(), siblings.end(), v);
  pos = siblings.erase(pos);
  siblings.insert(pos, children.begin(), children.end());
  for (NodeId c : children) {
    nodes_[c].parent = p;
    shift_depths(c, -1);
  }
  nodes_[v].alive = false;
  nodes_[v].parent = kNoNode;

  entropy_ += delta;
}

void CodingTree::align() { align_to(height()); }

void CodingTree::align_to(std::uint32_t depth) {
  // A unary node copies its child's volume and cut: its own term equals the
  // child's old term and the child's new term is log2(1) = 0, so the cached
  // entropy is unchanged.
  for (NodeId leaf = 0; leaf < leaf_count(); ++leaf) {
    while (nodes_[leaf].depth < depth) {
      const NodeId p = nodes_[leaf].parent;
      const NodeId u = add_node(p, nodes_[leaf].depth);
      auto& siblings = nodes_[p].children;
      *std::find(siblings.begin(), siblings.end(), leaf) = u;
      nodes_[u].children = {leaf};
      nodes_[u].volume = nodes_[leaf].volume;
      nodes_[u].cut = nodes_[leaf].cut;
      nodes_[leaf].parent = u;
      nodes_[leaf].depth += 1;
    }
  }
}

void CodingTree::merge(NodeId at, const SubTree& sub) {
  require_live(at, "merge target");
  if (is_leaf(at)) throw Error("cannot merge onto leaf " + id_str(at));
  if (sub.anchor != at) {
    throw Error("sub-tree was built for node " + id_str(sub.anchor) + ", not " + id_str(at));
  }
  if (sub.nodes.empty()) throw Error("empty sub-tree");

  // Shape checks on the sub-tree: reachability, leaf hosts, uniform depth.
  const auto count = sub.nodes.size();
  std::vector<std::uint32_t> order{0};
  std::vector<std::uint32_t> sub_depth(count, 0);
  std::vector<char> seen(count, 0);
  seen[0] = 1;
  std::vector<NodeId> hosts;
  std::uint32_t leaf_depth = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto s = order[i];
    const auto& sn = sub.nodes[s];
    if (sn.children.empty()) {
      if (s == 0) throw Error("sub-tree root has no children");
      if (sn.host == kNoNode) throw Error("sub-tree leaf without a host node");
      if (leaf_depth == 0) leaf_depth = sub_depth[s];
      if (sub_depth[s] != leaf_depth) throw Error("sub-tree leaves are not at a uniform depth");
      hosts.push_back(sn.host);
      continue;
    }
    if (sn.host != kNoNode) throw Error("sub-tree internal node carries a host handle");
    for (auto c : sn.children) {
      if (c >= count || seen[c] || sub.nodes[c].parent != s) {
        throw Error("sub-tree node links are inconsistent");
      }
      seen[c] = 1;
      sub_depth[c] = sub_depth[s] + 1;
      order.push_back(c);
    }
  }
  if (order.size() != count) throw Error("sub-tree has unreachable nodes");

  auto expected = nodes_[at].children;
  std::sort(expected.begin(), expected.end());
  std::sort(hosts.begin(), hosts.end());
  if (hosts != expected) throw Error("sub-tree leaves do not match the children of node " + id_str(at));

  double old_terms = 0.0;
  for (NodeId c : nodes_[at].children) old_terms += term(c);

  std::vector<NodeId> to_host(count, kNoNode);
  to_host[0] = at;
  nodes_[at].children.clear();
  std::vector<NodeId> created;
  for (auto s : order) {
    if (s == 0) continue;
    const NodeId parent = to_host[sub.nodes[s].parent];
    const std::uint32_t depth = nodes_[parent].depth + 1;
    NodeId h;
    if (sub.nodes[s].children.empty()) {
      h = sub.nodes[s].host;
      nodes_[h].parent = parent;
      shift_depths(h, static_cast<int>(depth) - static_cast<int>(nodes_[h].depth));
    } else {
      h = add_node(parent, depth);
      created.push_back(h);
    }
    to_host[s] = h;
    nodes_[parent].children.push_back(h);
  }
  // Bottom-up so children stats are in place; recompute_stats only needs the
  // wiring, not the children's caches, but keep the order anyway.
  for (auto it = created.rbegin(); it != created.rend(); ++it) recompute_stats(*it);

  double new_terms = 0.0;
  for (auto s : order) {
    if (s != 0) new_terms += term(to_host[s]);
  }
  entropy_ += new_terms - old_terms;
}

// ---------------------------------------------------------------------------
// Validation

ValidationReport CodingTree::validate() const {
  ValidationReport r;
  auto fail = [&r](std::string msg) {
    r.ok = false;
    r.problems.push_back(std::move(msg));
  };
  const auto n = leaf_count();
  if (!contains(root_)) {
    fail("root is missing");
    return r;
  }
  if (nodes_[root_].parent != kNoNode) fail("root has a parent");
  if (is_leaf(root_)) fail("root is a leaf");

  std::vector<char> seen(nodes_.size(), 0);
  std::vector<NodeId> order{root_};
  seen[root_] = 1;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const NodeId v = order[i];
    for (NodeId c : nodes_[v].children) {
      if (!contains(c)) {
        fail("node " + id_str(v) + " lists dead child " + id_str(c));
        continue;
      }
      if (seen[c]) {
        fail("node " + id_str(c) + " reached twice");
        continue;
      }
      seen[c] = 1;
      if (nodes_[c].parent != v) fail("child " + id_str(c) + " does not point back to " + id_str(v));
      if (nodes_[c].depth != nodes_[v].depth + 1) {
        fail("node " + id_str(c) + " depth is not parent depth + 1");
      }
      order.push_back(c);
    }
  }
  for (NodeId v = 0; v < nodes_.size(); ++v) {
    if (nodes_[v].alive && !seen[v]) fail("node " + id_str(v) + " is detached from the root");
  }
  for (NodeId v = 0; v < n; ++v) {
    if (!nodes_[v].alive) fail("leaf " + id_str(v) + " is missing");
    if (!nodes_[v].children.empty()) fail("leaf " + id_str(v) + " has children");
  }
  for (NodeId v = static_cast<NodeId>(n); v < nodes_.size(); ++v) {
    if (nodes_[v].alive && nodes_[v].children.empty()) {
      fail("internal node " + id_str(v) + " has no children");
    }
  }
  if (!r.ok) return r;

  // Partition nesting: every internal subset is the disjoint union of its
  // children's subsets.
  std::vector<std::size_t> size(nodes_.size(), 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const NodeId v = *it;
    if (is_leaf(v)) {
      size[v] = 1;
      continue;
    }
    std::vector<Vertex> union_set;
    for (NodeId c : nodes_[v].children) {
      size[v] += size[c];
      collect_leaves(c, union_set);
    }
    std::sort(union_set.begin(), union_set.end());
    if (std::adjacent_find(union_set.begin(), union_set.end()) != union_set.end() ||
        union_set.size() != size[v]) {
      fail("children of node " + id_str(v) + " do not partition its subset");
    }
  }
  if (size[root_] != n) fail("root does not mark every vertex");

  for (NodeId v : order) {
    const auto members = marked_subset(v);
    const auto vol = subset_volume(*graph_, members);
    const auto cut = cut_size(*graph_, members);
    if (nodes_[v].volume != vol) fail("node " + id_str(v) + " cached volume is stale");
    if (nodes_[v].cut != cut) fail("node " + id_str(v) + " cached cut is stale");
  }
  if (nodes_[root_].cut != 0 || nodes_[root_].volume != graph_->volume()) {
    fail("root cache does not describe the whole graph");
  }
  r.uniform_leaf_depth = is_aligned();
  return r;
}

double structural_entropy(const CodingTree& t) {
  const auto vol_g = t.graph().volume();
  double h = 0.0;
  for (NodeId v : t.node_ids()) {
    if (v == t.root()) continue;
    const auto& nd = t.node(v);
    h += entropy_term(nd.cut, nd.volume, t.node(nd.parent).volume, vol_g);
  }
  return h;
}

double entropy_from_scratch(const CodingTree& t) {
  // Structure only; the caches are what this function is meant to check.
  const auto& g = t.graph();
  for (NodeId v : t.node_ids()) {
    const auto& nd = t.node(v);
    if (v != t.root() && !t.contains(nd.parent)) throw Error("invalid coding tree: dangling parent");
  }
  double h = 0.0;
  for (NodeId v : t.node_ids()) {
    if (v == t.root()) continue;
    const auto members = t.marked_subset(v);
    const auto parent_members = t.marked_subset(t.node(v).parent);
    h += entropy_term(cut_size(g, members), subset_volume(g, members),
                      subset_volume(g, parent_members), g.volume());
  }
  return h;
}

// ---------------------------------------------------------------------------
// JSON

std::string tree_to_json(const CodingTree& t) {
  const auto n = t.leaf_count();
  std::vector<NodeId> dense(t.capacity(), kNoNode);
  std::vector<NodeId> live = t.node_ids();
  NodeId next = static_cast<NodeId>(n);
  for (NodeId v : live) dense[v] = t.is_leaf(v) ? v : next++;

  std::vector<nlohmann::ordered_json> rows(live.size());
  for (NodeId v : live) {
    const auto& nd = t.node(v);
    nlohmann::ordered_json row;
    row["id"] = dense[v];
    row["parent"] = nd.parent == kNoNode ? nlohmann::ordered_json(nullptr)
                                         : nlohmann::ordered_json(dense[nd.parent]);
    auto children = nlohmann::ordered_json::array();
    for (NodeId c : nd.children) children.push_back(dense[c]);
    row["children"] = std::move(children);
    rows[dense[v]] = std::move(row);
  }
  nlohmann::ordered_json doc;
  doc["height"] = t.height();
  doc["nodes"] = std::move(rows);
  return doc.dump(2) + "\n";
}

CodingTree tree_from_json(std::shared_ptr<const Graph> graph, std::string_view json) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("tree JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array()) {
    throw Error("tree JSON: expected an object with a \"nodes\" array");
  }
  const auto& rows = doc["nodes"];
  const auto total = rows.size();
  std::vector<NodeId> parents(total, kNoNode);
  std::vector<std::vector<NodeId>> children(total);
  std::vector<char> filled(total, 0);
  try {
    for (const auto& row : rows) {
      const auto id = row.at("id").get<std::size_t>();
      if (id >= total || filled[id]) throw Error("tree JSON: node ids must be dense and unique");
      filled[id] = 1;
      const auto& p = row.at("parent");
      parents[id] = p.is_null() ? kNoNode : p.get<NodeId>();
      children[id] = row.at("children").get<std::vector<NodeId>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("tree JSON: ") + e.what());
  }
  auto t = CodingTree::from_parents(std::move(graph), parents, &children);
  if (doc.contains("height") && doc["height"].get<std::uint32_t>() != t.height()) {
    throw Error("tree JSON: declared height does not match the tree");
  }
  return t;
}

}  // namespace hill
