#include <doctest.h>

#include <random>
#include <set>

#include "hill/entropy_min.hpp"
#include "hill/error.hpp"
#include "hill/oracle.hpp"
#include "support.hpp"

using namespace hill;

TEST_CASE("set partition enumeration counts Bell numbers") {
  const std::size_t bell[] = {1, 1, 2, 5, 15, 52, 203, 877, 4140};
  for (std::size_t n = 0; n <= 8; ++n) {
    std::size_t count = 0;
    std::set<std::vector<std::uint32_t>> seen;
    for_each_set_partition(n, [&](const std::vector<std::uint32_t>& a) {
      ++count;
      seen.insert(a);
    });
    CHECK(count == bell[n]);
    CHECK(seen.size() == bell[n]);
  }
}

TEST_CASE("oracle golden values") {
  CHECK(oracle_min_entropy(test::single_edge(), 2).entropy == doctest::Approx(1.0).epsilon(1e-15));
  // Adjacent pairs {0,1}, {2,3}: blocks cost 2 * (2/8) * 1, leaves 4 * (2/8) * 1.
  CHECK(oracle_min_entropy(test::cycle4(), 2).entropy == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("oracle tree is valid and matches its reported entropy") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 10; ++i) {
    const Graph g = test::random_graph(3 + i % 6, 0.4, rng);
    for (std::uint32_t k : {2u, 3u}) {
      if (k == 3 && g.node_count() > kOracleMaxVerticesK3) continue;
      const auto r = oracle_min_entropy(g, k);
      CHECK(r.tree.validate().ok);
      CHECK(r.tree.is_aligned());
      CHECK(r.tree.height() == k);
      CHECK(std::abs(r.tree.entropy() - r.entropy) < 1e-12);
    }
  }
}

TEST_CASE("deeper oracle is never worse, greedy is never better") {
  std::mt19937_64 rng(37);
  for (int i = 0; i < 15; ++i) {
    const Graph g = test::random_graph(4 + i % 2, 0.5, rng);
    const double h2 = oracle_min_entropy(g, 2).entropy;
    const double h3 = oracle_min_entropy(g, 3).entropy;
    CHECK(h3 <= h2 + 1e-12);
    CHECK(build_coding_tree(g, 2).entropy() >= h2 - 1e-12);
    CHECK(build_coding_tree(g, 3).entropy() >= h3 - 1e-12);
  }
}

TEST_CASE("oracle size guards") {
  CHECK_THROWS_AS(oracle_min_entropy(test::clique(9), 2), Error);
  CHECK_THROWS_AS(oracle_min_entropy(test::clique(6), 3), Error);
  CHECK_THROWS_AS(oracle_min_entropy(test::clique(4), 4), Error);
}
