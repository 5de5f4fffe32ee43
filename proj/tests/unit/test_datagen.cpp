#include <doctest.h>

#include <filesystem>

#include "hill/datagen.hpp"
#include "hill/error.hpp"

using namespace hill;

TEST_CASE("gen_hierarchy sizes") {
  CHECK(gen_hierarchy(2, 10, 1).size() == 111);
  CHECK(gen_hierarchy(3, 4, 1).size() == 85);
  CHECK(gen_hierarchy(3, 4, 1) == gen_hierarchy(3, 4, 1));
  CHECK(gen_hierarchy(3, 4, 1) == gen_hierarchy(3, 4, 99));
  CHECK_THROWS_AS(gen_hierarchy(1, 4, 1), Error);
  CHECK_THROWS_AS(gen_hierarchy(3, 1, 1), Error);
}

TEST_CASE("gen_hierarchy shape") {
  const auto h = gen_hierarchy(3, 4, 0);
  CHECK(h.max_depth() == 3);
  CHECK(h.leaves().size() == 64);
  CHECK(h.parent(h.root()) == -1);
  for (LabelId y = 1; y < h.size(); ++y) {
    CHECK(h.depth(y) == h.depth(static_cast<LabelId>(h.parent(y))) + 1);
    if (h.depth(y) < 3) CHECK(h.children(y).size() == 4);
  }
  const auto g = h.to_graph();
  CHECK(g.node_count() == 85);
  CHECK(g.edge_count() == 84);
}

TEST_CASE("taxonomy round trip") {
  const auto h = gen_hierarchy(2, 3, 0);
  CHECK(LabelHierarchy::parse_taxonomy(h.to_taxonomy()) == h);
  const auto t = LabelHierarchy::parse_taxonomy("Root\tA\tB\nA\ta1\na1\tx\n");
  CHECK(t.size() == 5);
  CHECK(t.path_to(4) == std::vector<LabelId>{1, 3, 4});
  CHECK_THROWS_AS(LabelHierarchy::parse_taxonomy("R\tA\nS\tA\n"), Error);
  CHECK_THROWS_AS(LabelHierarchy::parse_taxonomy("R\tA\nB\tC\n"), Error);
  CHECK_THROWS_AS(LabelHierarchy::parse_taxonomy("R\tA\nA\tR\n"), Error);
  CHECK_THROWS_AS(LabelHierarchy::parse_taxonomy("R\n"), Error);
}

TEST_CASE("parent closure validator") {
  const auto h = gen_hierarchy(2, 2, 0);  // 0 -> {1, 2}, 1 -> {3, 4}, 2 -> {5, 6}
  CHECK(h.is_parent_closed({1, 3}));
  CHECK(h.is_parent_closed({}));
  CHECK_FALSE(h.is_parent_closed({3}));
  CHECK_FALSE(h.is_parent_closed({2, 3}));
  CHECK_FALSE(h.is_parent_closed({1, 99}));
}

TEST_CASE("gen_corpus: closure, path length, determinism") {
  const auto h = gen_hierarchy(3, 4, 0);
  CorpusParams p;
  p.n_docs = 400;
  p.seed = 3;
  const auto docs = gen_corpus(h, p);
  REQUIRE(docs.size() == 400);
  std::vector<int> leaf_hits(h.size(), 0);
  for (const auto& ex : docs) {
    CHECK(h.is_parent_closed(ex.labels));
    CHECK(ex.labels.size() == 3);
    CHECK(ex.tokens.size() >= p.min_tokens);
    CHECK(ex.tokens.size() <= p.max_tokens);
    for (auto t : ex.tokens) CHECK(t < p.vocab);
    ++leaf_hits[ex.labels.back()];
  }
  int distinct = 0;
  for (int c : leaf_hits) distinct += c > 0;
  CHECK(distinct > 48);
  CHECK(dataset_to_jsonl(gen_corpus(h, p)) == dataset_to_jsonl(docs));
  p.seed = 4;
  CHECK(gen_corpus(h, p) != docs);
}

TEST_CASE("gen_corpus rejects bad parameters") {
  const auto h = gen_hierarchy(2, 2, 0);
  CorpusParams p;
  p.n_docs = 0;
  CHECK_THROWS_AS(gen_corpus(h, p), Error);
  p = {};
  p.vocab = 5;
  CHECK_THROWS_AS(gen_corpus(h, p), Error);
  p = {};
  p.min_tokens = 50;
  CHECK_THROWS_AS(gen_corpus(h, p), Error);
}

TEST_CASE("jsonl round trip") {
  const Dataset d{{{1, 2, 3}, {1, 4}}, {{}, {}}, {{7}, {2}}};
  const auto text = dataset_to_jsonl(d);
  CHECK(dataset_from_jsonl(text) == d);
  CHECK(dataset_from_jsonl(text + "\n\n") == d);
  CHECK_THROWS_AS(dataset_from_jsonl("{\"tokens\":[1]}\n"), Error);
  CHECK_THROWS_AS(dataset_from_jsonl("not json\n"), Error);
  CHECK_THROWS_AS(dataset_from_jsonl("{\"tokens\":[-1],\"labels\":[]}\n"), Error);

  const auto path = std::filesystem::temp_directory_path() / "hill_jsonl_round_trip.jsonl";
  save_dataset(path, d);
  CHECK(load_dataset(path) == d);
  std::filesystem::remove(path);
}

TEST_CASE("default synthetic split") {
  const auto s = default_synthetic();
  CHECK(s.hierarchy.size() == 85);
  CHECK(s.train.size() == 2000);
  CHECK(s.dev.size() == 500);
  CHECK(s.train.front() == default_synthetic().train.front());
}
