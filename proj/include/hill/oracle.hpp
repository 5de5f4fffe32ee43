#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "hill/coding_tree.hpp"

namespace hill {

inline constexpr std::size_t kOracleMaxVerticesK2 = 8;
inline constexpr std::size_t kOracleMaxVerticesK3 = 5;

struct OracleResult {
  CodingTree tree;
  double entropy = 0.0;
  /// Layers from the leaves up, each a block id per vertex (k = 2) or per
  /// lower block (k = 3), in restricted-growth form.
  std::vector<std::vector<std::uint32_t>> layers;
};

/// Exact minimum structural entropy over all coding trees of height <= k,
/// k in {2, 3}, by enumerating every (nested) set partition of the vertices.
/// The first minimum in restricted-growth-string order wins. Entropy is
/// evaluated straight from graph cut and volume queries, independently of the
/// CodingTree caches.
OracleResult oracle_min_entropy(std::shared_ptr<const Graph> graph, std::uint32_t k);
OracleResult oracle_min_entropy(const Graph& graph, std::uint32_t k);

/// Calls `visit` with every restricted growth string of length n (each set
/// partition of n items exactly once), in lexicographic order.
template <class Visit>
void for_each_set_partition(std::size_t n, Visit&& visit) {
  if (n == 0) {
    std::vector<std::uint32_t> empty;
    visit(static_cast<const std::vector<std::uint32_t>&>(empty));
    return;
  }
  std::vector<std::uint32_t> a(n, 0);
  std::vector<std::uint32_t> prefix_max(n, 0);  // max of a[0..i]
  while (true) {
    visit(static_cast<const std::vector<std::uint32_t>&>(a));
    std::size_t i = n - 1;
    while (i > 0 && a[i] > prefix_max[i - 1]) --i;
    if (i == 0) return;
    ++a[i];
    prefix_max[i] = std::max(prefix_max[i - 1], a[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      a[j] = 0;
      prefix_max[j] = prefix_max[i];
    }
  }
}

}  // namespace hill
