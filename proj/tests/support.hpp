#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "hill/coding_tree.hpp"
#include "hill/entropy_min.hpp"
#include "hill/graph.hpp"
#include "hill/metrics.hpp"

namespace hill::test {

/// Erdos-Renyi edges with probability p; any vertex left isolated is joined to
/// a random other vertex. The result may be disconnected.
inline Graph random_graph(std::size_t n, double p, std::mt19937_64& rng) {
  std::vector<Edge> edges;
  std::bernoulli_distribution coin(p);
  std::vector<int> deg(n, 0);
  for (Vertex u = 0; u < n; ++u) {
    for (Vertex v = u + 1; v < n; ++v) {
      if (coin(rng)) {
        edges.emplace_back(u, v);
        ++deg[u];
        ++deg[v];
      }
    }
  }
  std::uniform_int_distribution<Vertex> pick(0, static_cast<Vertex>(n - 2));
  for (Vertex u = 0; u < n; ++u) {
    if (deg[u] != 0) continue;
    Vertex v = pick(rng);
    if (v >= u) ++v;
    edges.emplace_back(u, v);
    ++deg[u];
    ++deg[v];
  }
  return Graph(n, edges);
}

inline std::shared_ptr<const Graph> shared(Graph g) { return std::make_shared<const Graph>(std::move(g)); }

inline Graph cycle4() {
  const std::vector<Edge> e{{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  return Graph(4, e);
}

inline Graph single_edge() {
  const std::vector<Edge> e{{0, 1}};
  return Graph(2, e);
}

inline Graph bridge_triangles() {
  const std::vector<Edge> e{{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {2, 3}};
  return Graph(6, e);
}

inline Graph clique(std::size_t n) {
  std::vector<Edge> e;
  for (Vertex u = 0; u < n; ++u) {
    for (Vertex v = u + 1; v < n; ++v) e.emplace_back(u, v);
  }
  return Graph(n, e);
}

/// Shannon entropy (bits) of the stationary distribution deg(v) / vol.
inline double degree_entropy(const Graph& g) {
  double h = 0.0;
  const double vol = static_cast<double>(g.volume());
  for (Vertex v = 0; v < g.node_count(); ++v) {
    const double p = static_cast<double>(g.degree(v)) / vol;
    h -= p * std::log2(p);
  }
  return h;
}

struct SurgeryStats {
  std::size_t ops = 0;
  std::size_t deltas = 0;
  double max_cache_error = 0.0;
  double max_delta_error = 0.0;
  std::size_t invalid = 0;
};

/// Applies `steps` random compress / remove / align / merge operations to `t`,
/// comparing the cached entropy with a from-scratch recomputation after every
/// step and each predicted delta with the observed difference.
inline void random_surgery(CodingTree& t, std::size_t steps, std::mt19937_64& rng, SurgeryStats& st) {
  std::uniform_int_distribution<int> pick_op(0, 3);
  auto pick = [&](const std::vector<NodeId>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  for (std::size_t step = 0; step < steps; ++step) {
    const double before = entropy_from_scratch(t);
    std::vector<NodeId> internal, parents;
    for (NodeId v : t.node_ids()) {
      if (t.is_leaf(v)) continue;
      if (v != t.root()) internal.push_back(v);
      if (t.node(v).children.size() >= 2) parents.push_back(v);
    }
    const int op = pick_op(rng);
    if (op == 0 && !parents.empty()) {
      const auto& kids = t.node(pick(parents)).children;
      std::uniform_int_distribution<std::size_t> ix(0, kids.size() - 1);
      const std::size_t i = ix(rng);
      std::size_t j = ix(rng);
      if (j == i) j = (i + 1) % kids.size();
      const NodeId a = kids[i], b = kids[j];
      const double delta = t.delta_compress(a, b);
      t.compress(a, b);
      st.max_delta_error = std::max(st.max_delta_error, std::abs(delta - (entropy_from_scratch(t) - before)));
      ++st.deltas;
    } else if (op == 1 && !internal.empty()) {
      const NodeId v = pick(internal);
      const double delta = t.delta_remove(v);
      t.remove_node(v);
      st.max_delta_error = std::max(st.max_delta_error, std::abs(delta - (entropy_from_scratch(t) - before)));
      ++st.deltas;
    } else if (op == 2) {
      t.align();
    } else {
      std::vector<NodeId> hosts = internal;
      hosts.push_back(t.root());
      const NodeId at = pick(hosts);
      t.merge(at, build_two_level(t, at));
    }
    ++st.ops;
    st.max_cache_error = std::max(st.max_cache_error, std::abs(t.entropy() - entropy_from_scratch(t)));
    if (!t.validate().ok) ++st.invalid;
  }
}

// Dense indicator matrices, then one confusion count per label.
struct MetricOracle {
  double micro = 0.0;
  double macro = 0.0;
};

inline double oracle_f1(double tp, double fp, double fn) {
  if (tp == 0.0) return 0.0;
  const double precision = tp / (tp + fp);
  const double recall = tp / (tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

inline MetricOracle metric_oracle(const std::vector<LabelSet>& preds, const std::vector<LabelSet>& golds,
                                  std::size_t label_count) {
  const std::size_t n = preds.size();
  std::vector<std::vector<char>> P(n, std::vector<char>(label_count, 0)), G = P;
  for (std::size_t i = 0; i < n; ++i) {
    for (auto y : preds[i]) P[i][y] = 1;
    for (auto y : golds[i]) G[i][y] = 1;
  }
  std::vector<double> tp(label_count, 0.0), fp(label_count, 0.0), fn(label_count, 0.0);
  for (std::size_t y = 0; y < label_count; ++y) {
    for (std::size_t i = 0; i < n; ++i) {
      tp[y] += P[i][y] && G[i][y];
      fp[y] += P[i][y] && !G[i][y];
      fn[y] += !P[i][y] && G[i][y];
    }
  }
  MetricOracle out;
  double TP = 0, FP = 0, FN = 0;
  for (std::size_t y = 0; y < label_count; ++y) {
    TP += tp[y];
    FP += fp[y];
    FN += fn[y];
    out.macro += oracle_f1(tp[y], fp[y], fn[y]);
  }
  out.macro /= static_cast<double>(label_count);
  out.micro = oracle_f1(TP, FP, FN);
  return out;
}

inline void random_label_sets(std::mt19937_64& rng, std::size_t n, std::size_t label_count,
                              std::vector<LabelSet>& preds, std::vector<LabelSet>& golds) {
  std::uniform_real_distribution<double> density(0.0, 0.6);
  const double dp = density(rng), dg = density(rng);
  preds.assign(n, {});
  golds.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint32_t y = 0; y < label_count; ++y) {
      if (std::bernoulli_distribution(dp)(rng)) preds[i].push_back(y);
      if (std::bernoulli_distribution(dg)(rng)) golds[i].push_back(y);
    }
    std::shuffle(preds[i].begin(), preds[i].end(), rng);
  }
}

}  // namespace hill::test
