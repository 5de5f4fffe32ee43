#include <doctest.h>

#include <algorithm>
#include <random>

#include "hill/error.hpp"
#include "hill/metrics.hpp"
#include "support.hpp"

using namespace hill;

TEST_CASE("micro f1 examples") {
  const std::vector<LabelSet> gold{{0, 1}, {2}};
  CHECK(micro_f1(gold, gold) == 1.0);
  CHECK(micro_f1({{}, {}}, gold) == 0.0);
  // tp = 2 ({0}, {2}), fp = 1 ({1} in the second), fn = 1 ({1} in the first)
  CHECK(micro_f1({{0}, {1, 2}}, gold) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(micro_f1({{0}}, gold), Error);
}

TEST_CASE("macro f1 examples") {
  const std::vector<LabelSet> gold{{0, 1}, {0, 1}};
  CHECK(macro_f1(gold, gold, 2) == 1.0);
  // label 0 perfect, label 1 never predicted, labels 2 and 3 absent
  CHECK(macro_f1({{0}, {0}}, gold, 4) == 0.25);
  CHECK_THROWS_AS(macro_f1({{5}, {}}, gold, 4), Error);
  CHECK_THROWS_AS(macro_f1(gold, gold, 0), Error);
  CHECK_THROWS_AS(macro_f1({{0}}, gold, 2), Error);
}

TEST_CASE("metrics: order invariance and equal-count agreement") {
  const std::vector<LabelSet> pred{{0, 2}, {1}, {}, {0, 1, 2}};
  const std::vector<LabelSet> gold{{0}, {1, 2}, {2}, {0, 1}};
  std::vector<std::size_t> perm{2, 0, 3, 1};
  std::vector<LabelSet> p2, g2;
  for (auto i : perm) {
    p2.push_back(pred[i]);
    g2.push_back(gold[i]);
  }
  CHECK(micro_f1(p2, g2) == micro_f1(pred, gold));
  CHECK(macro_f1(p2, g2, 3) == macro_f1(pred, gold, 3));

  // every label: tp 1, fp 1, fn 1
  const std::vector<LabelSet> sp{{0, 1}, {1, 2}, {2, 0}};
  const std::vector<LabelSet> sg{{0, 2}, {1, 0}, {2, 1}};
  CHECK(micro_f1(sp, sg) == doctest::Approx(macro_f1(sp, sg, 3)).epsilon(1e-15));
}

TEST_CASE("metrics ignore duplicates and order inside a set") {
  CHECK(micro_f1({{2, 0, 0}}, {{0, 2}}) == 1.0);
  CHECK(macro_f1({{2, 0, 0}}, {{0, 2}}, 3) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("metrics stay in [0, 1] on random input") {
  std::mt19937_64 rng(8);
  std::bernoulli_distribution coin(0.3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<LabelSet> p(10), g(10);
    for (std::size_t n = 0; n < 10; ++n) {
      for (std::uint32_t y = 0; y < 6; ++y) {
        if (coin(rng)) p[n].push_back(y);
        if (coin(rng)) g[n].push_back(y);
      }
    }
    const double mi = micro_f1(p, g), ma = macro_f1(p, g, 6);
    CHECK(mi >= 0.0);
    CHECK(mi <= 1.0);
    CHECK(ma >= 0.0);
    CHECK(ma <= 1.0);
  }
}

TEST_CASE("metrics agree with a confusion-matrix oracle") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t labels = 1 + trial % 9;
    std::vector<LabelSet> p, g;
    test::random_label_sets(rng, 1 + trial % 17, labels, p, g);
    const auto o = test::metric_oracle(p, g, labels);
    CHECK(micro_f1(p, g) == o.micro);
    CHECK(macro_f1(p, g, labels) == o.macro);
  }
}
