#include <doctest.h>

#include <cmath>
#include <random>

#include "hill/checkpoint.hpp"
#include "hill/entropy_min.hpp"
#include "hill/error.hpp"
#include "hill/gradcheck.hpp"
#include "hill/model.hpp"
#include "hill/trainer.hpp"
#include "support.hpp"

using namespace hill;

namespace {

Tensor random_tensor(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Tensor t(r, c);
  for (auto& x : t.data()) x = d(rng);
  return t;
}

// Direct summation over the 2B anchors, each against its 2B - 1 partners.
double simclr_oracle(const Tensor& h, const Tensor& hh, double tau) {
  const std::size_t b = h.rows();
  auto vec = [&](std::size_t i) { return i < b ? h.row(i) : hh.row(i - b); };
  auto cos = [](std::span<const double> u, std::span<const double> v) {
    double uv = 0, uu = 0, vv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      uv += u[i] * v[i];
      uu += u[i] * u[i];
      vv += v[i] * v[i];
    }
    return uv / std::sqrt(uu * vv);
  };
  double total = 0.0;
  for (std::size_t i = 0; i < 2 * b; ++i) {
    const std::size_t pos = (i + b) % (2 * b);
    double den = 0.0;
    for (std::size_t j = 0; j < 2 * b; ++j) {
      if (j != i) den += std::exp(cos(vec(i), vec(j)) / tau);
    }
    total += -std::log(std::exp(cos(vec(i), vec(pos)) / tau) / den);
  }
  return total / static_cast<double>(2 * b);
}

double literal_oracle(const Tensor& h, const Tensor& hh, double tau) {
  const std::size_t b = h.rows();
  std::vector<double> s(b);
  for (std::size_t j = 0; j < b; ++j) s[j] = cosine_similarity(h.row(j), hh.row(j)) / tau;
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    double den = 0.0;
    for (std::size_t j = 0; j < b; ++j) {
      if (j != i) den += std::exp(s[j]);
    }
    total += -std::log(std::exp(s[i]) / den);
  }
  return total / static_cast<double>(b);
}

std::vector<std::size_t> all_indices(const Tensor& t) {
  std::vector<std::size_t> idx(t.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return idx;
}

struct Fixture {
  LabelHierarchy hierarchy = gen_hierarchy(2, 2, 0);
  ModelConfig config;
  std::vector<std::vector<TokenId>> tokens;
  std::vector<TokenSpan> docs;
  Tensor targets;

  explicit Fixture(std::uint32_t K = 2) {
    config.d_B = 6;
    config.d_V = 4;
    config.K = K;
    config.vocab_size = 30;
    config.lambda_clr = 0.3;
    config.tau = 0.7;
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<TokenId> tok(0, 29);
    std::vector<LabelSet> gold;
    const auto leaves = hierarchy.leaves();
    for (int d = 0; d < 4; ++d) {
      std::vector<TokenId> t(8);
      for (auto& x : t) x = tok(rng);
      tokens.push_back(t);
      const auto path = hierarchy.path_to(leaves[d % leaves.size()]);
      gold.emplace_back(path.begin(), path.end());
    }
    for (const auto& t : tokens) docs.emplace_back(t);
    targets = label_targets(gold, hierarchy.size());
  }

  HillModel model(std::uint64_t seed = 1) const {
    return HillModel(config, label_coding_tree(hierarchy, config.K), seed);
  }
};

}  // namespace

TEST_CASE("bce: uniform half probabilities give ln 2") {
  const Tensor p(2, 3, 0.5);
  const Tensor y(2, 3, std::vector<double>{1, 0, 1, 0, 0, 1});
  CHECK(bce_loss(p, y).loss == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("bce: perfect predictions cost at most the clamp floor") {
  const Tensor y(1, 4, std::vector<double>{1, 0, 0, 1});
  const double loss = bce_loss(y, y).loss;
  CHECK(loss >= 0.0);
  CHECK(loss <= -std::log(1.0 - kProbClamp) + 1e-15);
}

TEST_CASE("bce: gradient and input checks") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  Tensor p(3, 4);
  for (auto& x : p.data()) x = u(rng);
  const Tensor y(3, 4, std::vector<double>{1, 0, 0, 1, 0, 1, 1, 0, 0, 0, 1, 1});
  const auto g = bce_loss(p, y).grad;
  auto loss = [&] { return bce_loss(p, y).loss; };
  CHECK(check_gradient(loss, p, g, all_indices(p)).max_rel_error < 1e-6);
  CHECK_THROWS_AS(bce_loss(p, Tensor(3, 3)), Error);
  CHECK_THROWS_AS(bce_loss(p, Tensor(3, 4, 0.5)), Error);
}

TEST_CASE("nt_xent: orthogonal pairs with identical views") {
  const Tensor h(2, 2, std::vector<double>{1, 0, 0, 1});
  const double expected = std::log(1.0 + 2.0 / std::exp(1.0));
  CHECK(nt_xent(h, h, 1.0, NtXentForm::SimClr).loss == doctest::Approx(expected).epsilon(1e-14));
  CHECK(simclr_oracle(h, h, 1.0) == doctest::Approx(expected).epsilon(1e-14));
  // Each anchor's denominator holds the one other positive pair, equal to its own.
  CHECK(std::abs(nt_xent(h, h, 1.0, NtXentForm::Literal).loss) < 1e-15);
}

TEST_CASE("nt_xent agrees with direct summation on random batches") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t b = 2 + trial % 5;
    const Tensor h = random_tensor(b, 5, rng), hh = random_tensor(b, 5, rng);
    const double tau = 0.3 + 0.2 * trial;
    CHECK(nt_xent(h, hh, tau, NtXentForm::SimClr).loss == doctest::Approx(simclr_oracle(h, hh, tau)).epsilon(1e-12));
    CHECK(nt_xent(h, hh, tau, NtXentForm::Literal).loss ==
          doctest::Approx(literal_oracle(h, hh, tau)).epsilon(1e-12));
  }
}

TEST_CASE("nt_xent: scale invariance and view symmetry") {
  std::mt19937_64 rng(13);
  Tensor h = random_tensor(5, 4, rng), hh = random_tensor(5, 4, rng);
  const double base = nt_xent(h, hh, 0.5, NtXentForm::SimClr).loss;
  for (auto& x : h.row(2)) x *= 7.5;
  CHECK(nt_xent(h, hh, 0.5, NtXentForm::SimClr).loss == doctest::Approx(base).epsilon(1e-13));
  CHECK(nt_xent(hh, h, 0.5, NtXentForm::SimClr).loss == doctest::Approx(base).epsilon(1e-13));
}

TEST_CASE("nt_xent: gradients match finite differences") {
  std::mt19937_64 rng(17);
  for (auto form : {NtXentForm::SimClr, NtXentForm::Literal}) {
    Tensor h = random_tensor(4, 3, rng), hh = random_tensor(4, 3, rng);
    const auto r = nt_xent(h, hh, 0.6, form);
    auto loss = [&] { return nt_xent(h, hh, 0.6, form).loss; };
    CHECK(check_gradient(loss, h, r.grad_h, all_indices(h)).max_rel_error < 1e-6);
    CHECK(check_gradient(loss, hh, r.grad_h_hat, all_indices(hh)).max_rel_error < 1e-6);
  }
}

TEST_CASE("nt_xent: rejects degenerate input") {
  const Tensor one(1, 3, 1.0);
  CHECK_THROWS_AS(nt_xent(one, one, 1.0, NtXentForm::SimClr), Error);
  CHECK_THROWS_AS(nt_xent(Tensor(2, 3, 1.0), Tensor(3, 3, 1.0), 1.0, NtXentForm::SimClr), Error);
  CHECK_THROWS_AS(nt_xent(Tensor(2, 3, 1.0), Tensor(2, 3, 1.0), 0.0, NtXentForm::SimClr), Error);
  Tensor bad(2, 3, 1.0);
  bad(0, 0) = NAN;
  CHECK_THROWS_AS(nt_xent(bad, Tensor(2, 3, 1.0), 1.0, NtXentForm::SimClr), Error);
}

TEST_CASE("nt_xent: a zero row has similarity 0 to everything") {
  // rows: h0 = e0, h1 = 0; views: h_hat0 = e0, h_hat1 = e1
  const Tensor h(2, 2, std::vector<double>{1, 0, 0, 0});
  const Tensor hh(2, 2, std::vector<double>{1, 0, 0, 1});
  const double e = std::exp(1.0);
  // anchors h0: pos 1, others {0, 0}; h1: pos 0, others {0, 0}; hh0: pos 1, others {0, 0}; hh1: all 0
  const double expected = (2.0 * std::log((e + 2.0) / e) + 2.0 * std::log(3.0)) / 4.0;
  const auto r = nt_xent(h, hh, 1.0, NtXentForm::SimClr);
  CHECK(r.loss == doctest::Approx(expected).epsilon(1e-14));
  CHECK(r.grad_h.all_finite());
  CHECK(r.grad_h_hat.all_finite());
  CHECK(std::isfinite(nt_xent(h, hh, 1.0, NtXentForm::Literal).loss));
}

TEST_CASE("total loss") {
  CHECK(total_loss(0.7, 5.0, 0.0) == 0.7);
  CHECK(total_loss(0.7, 5.0, 0.001) == doctest::Approx(0.705));
  const double a = total_loss(0.7, 5.0, 0.1) - 0.7, b = total_loss(0.7, 5.0, 0.3) - 0.7;
  CHECK(b == doctest::Approx(3.0 * a));
  CHECK_THROWS_AS(total_loss(NAN, 1.0, 0.1), Error);
}

TEST_CASE("classifier: zero parameters give one half") {
  Fixture fx;
  auto m = fx.model();
  m.visit([](std::string_view name, Tensor& v, Tensor&) {
    if (name.starts_with("classifier.")) v.fill(0.0);
  });
  std::mt19937_64 rng(1);
  const Tensor p = m.classify(random_tensor(3, 6, rng), random_tensor(3, m.tree_dim(), rng));
  for (double x : p.data()) CHECK(x == 0.5);
  CHECK_THROWS_AS(m.classify(Tensor(3, 5), Tensor(3, m.tree_dim())), Error);
}

TEST_CASE("classifier: a larger positive-weight input raises its probability") {
  Fixture fx;
  auto m = fx.model();
  m.visit([](std::string_view name, Tensor& v, Tensor&) {
    if (name == "classifier.weight") v(0, 0) = 2.0;
  });
  Tensor hd(1, 6, 0.1), ht(1, m.tree_dim(), 0.1);
  const double before = m.classify(hd, ht)(0, 0);
  hd(0, 0) = 0.5;
  CHECK(m.classify(hd, ht)(0, 0) > before);
}

TEST_CASE("project_labels: shape, linearity and gradient") {
  Fixture fx;
  auto m = fx.model();
  auto& s = m.structure();
  const std::size_t y = fx.hierarchy.size();
  std::mt19937_64 rng(2);
  Tensor h = random_tensor(1, 6, rng);
  const Tensor x = s.project_labels(h);
  CHECK(x.rows() == y);
  CHECK(x.cols() == 4);

  s.label_shift().fill(0.0);
  s.projection().bias.fill(0.0);
  const Tensor zero = s.project_labels(Tensor(1, 6));
  for (double v : zero.data()) CHECK(v == 0.0);
  CHECK_THROWS_AS(s.project_labels(Tensor(1, 5)), Error);

  const Tensor w = random_tensor(y, 4, rng);
  StructureEncoder::ProjectionCache cache;
  s.project_labels(h, &cache);
  s.zero_grad();
  const Tensor dh = s.project_labels_backward(cache, w);
  auto loss = [&] {
    const Tensor out = s.project_labels(h);
    double acc = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) acc += out[i] * w[i];
    return acc;
  };
  CHECK(check_gradient(loss, h, dh, all_indices(h)).max_rel_error < 1e-6);
}

TEST_CASE("tree_forward: unary chain with identity perceptrons carries the leaf vector") {
  auto g = test::shared(test::single_edge());
  auto tree = CodingTree::initial(g);
  tree.merge(tree.root(), build_two_level(tree, tree.root()));
  REQUIRE(tree.height() == 2);
  ModelConfig cfg;
  cfg.d_B = 3;
  cfg.d_V = 3;
  cfg.K = 2;
  cfg.vocab_size = 5;
  Rng rng(0);
  StructureEncoder s(cfg, tree, 2, rng);
  for (auto& f : s.level_ffns()) {
    for (auto* l : {&f.first, &f.second}) {
      l->weight.fill(0.0);
      for (std::size_t i = 0; i < 3; ++i) l->weight(i, i) = 1.0;
      l->bias.fill(0.0);
    }
  }
  const Tensor leaves(2, 3, std::vector<double>{0.3, 1.5, 2.0, 0.0, 0.0, 0.0});
  const Tensor out = s.tree_forward(leaves, 1);
  REQUIRE(out.cols() == 6);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(out(0, c) == leaves(0, c));
    CHECK(out(0, 3 + c) == leaves(0, c));
  }
}

TEST_CASE("tree_forward: output width is K * d_V") {
  for (std::uint32_t K : {1u, 2u, 3u}) {
    Fixture fx(K);
    auto m = fx.model();
    CHECK(m.tree_dim() == K * 4);
    auto f = m.forward(fx.docs, nullptr, false);
    CHECK(f.h_tree.cols() == K * 4);
    CHECK(f.features.cols() == 6 + K * 4);
  }
}

TEST_CASE("tree_forward: sibling order and internal handles do not matter") {
  auto g = test::shared(test::bridge_triangles());
  // root 6, internal 7 = {0,1,2}, 8 = {3,4,5}
  const std::vector<NodeId> parents{7, 7, 7, 8, 8, 8, kNoNode, 6, 6};
  std::vector<std::vector<NodeId>> shuffled(9);
  shuffled[6] = {8, 7};
  shuffled[7] = {2, 0, 1};
  shuffled[8] = {5, 3, 4};
  const auto a = CodingTree::from_parents(g, parents);
  const auto b = CodingTree::from_parents(g, parents, &shuffled);
  const std::vector<NodeId> relabeled{8, 8, 8, 7, 7, 7, kNoNode, 6, 6};
  const auto c = CodingTree::from_parents(g, relabeled);

  ModelConfig cfg;
  cfg.d_B = 4;
  cfg.d_V = 3;
  cfg.K = 2;
  cfg.vocab_size = 5;
  Rng r1(9), r2(9), r3(9);
  const StructureEncoder sa(cfg, a, 6, r1), sb(cfg, b, 6, r2), sc(cfg, c, 6, r3);
  std::mt19937_64 rng(4);
  const Tensor leaves = random_tensor(12, 3, rng);
  const Tensor oa = sa.tree_forward(leaves, 2);
  CHECK(oa == sb.tree_forward(leaves, 2));
  const Tensor oc = sc.tree_forward(leaves, 2);
  for (std::size_t i = 0; i < oa.size(); ++i) CHECK(std::abs(oa[i] - oc[i]) < 1e-12);
  CHECK_THROWS_AS(sa.tree_forward(random_tensor(5, 3, rng), 1), Error);
}

TEST_CASE("model rejects a tree that does not fit") {
  Fixture fx;
  auto tree = label_coding_tree(fx.hierarchy, 2);
  ModelConfig cfg = fx.config;
  cfg.K = 3;
  CHECK_THROWS_AS(HillModel(cfg, tree, 1), Error);
  auto unaligned = CodingTree::initial(tree.graph_ptr());
  unaligned.compress(0, 1);
  cfg.K = 2;
  CHECK_THROWS_AS(HillModel(cfg, unaligned, 1), Error);
}

TEST_CASE("end-to-end gradient of the combined loss") {
  for (auto eta : {Readout::Sum, Readout::Mean}) {
    Fixture fx(3);
    fx.config.eta = eta;
    auto m = fx.model(7);
    m.zero_grad();
    m.backward(m.forward(fx.docs, &fx.targets, true));
    auto loss = [&] { return m.forward(fx.docs, &fx.targets, true).loss; };
    GradCheckOptions opt;
    opt.branch_signature = [&] { return m.branch_signature(m.forward(fx.docs, &fx.targets, true)); };

    std::mt19937_64 rng(21);
    std::size_t checked = 0;
    double worst = 0.0;
    m.visit([&](std::string_view, Tensor& value, Tensor& grad) {
      std::vector<std::size_t> idx;
      std::uniform_int_distribution<std::size_t> pick(0, value.size() - 1);
      for (int i = 0; i < 12; ++i) idx.push_back(pick(rng));
      const auto r = check_gradient(loss, value, grad, idx, opt);
      checked += r.checked;
      worst = std::max(worst, r.max_rel_error);
    });
    CHECK(checked >= 200);
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("zero contrastive weight contributes no gradient") {
  Fixture fx;
  fx.config.lambda_clr = 0.0;
  auto a = fx.model(3), b = fx.model(3);
  for (int step = 0; step < 3; ++step) {
    a.zero_grad();
    b.zero_grad();
    auto fa = a.forward(fx.docs, &fx.targets, true);
    auto fb = b.forward(fx.docs, &fx.targets, false);
    CHECK(fa.loss == fb.loss);
    a.backward(fa);
    b.backward(fb);
    std::vector<Tensor> ga, gb;
    a.visit([&](std::string_view, Tensor&, Tensor& g) { ga.push_back(g); });
    b.visit([&](std::string_view, Tensor&, Tensor& g) { gb.push_back(g); });
    CHECK(ga == gb);
    // Same update on both so the next step starts from identical weights.
    std::size_t i = 0;
    a.visit([&](std::string_view, Tensor& v, Tensor& g) { v.add_scaled(g, -0.1); });
    b.visit([&](std::string_view, Tensor& v, Tensor&) { v.add_scaled(ga[i++], -0.1); });
  }
  CHECK(a.state().size() == b.state().size());
  for (std::size_t i = 0; i < a.state().size(); ++i) CHECK(a.state()[i].value == b.state()[i].value);
}

TEST_CASE("contrastive branch needs two documents") {
  Fixture fx;
  auto m = fx.model();
  const std::span<const TokenSpan> one(fx.docs.data(), 1);
  const Tensor t = label_targets(std::vector<LabelSet>{{1}}, fx.hierarchy.size());
  CHECK_THROWS_AS(m.forward(one, &t, true), Error);
  CHECK_NOTHROW(m.forward(one, &t, false));
}

TEST_CASE("checkpoint round trip restores identical predictions") {
  Fixture fx;
  auto a = fx.model(1);
  auto b = fx.model(2);
  const auto json = checkpoint_to_json(a.state());
  b.load_state(checkpoint_from_json(json));
  CHECK(a.forward(fx.docs, nullptr, false).probs == b.forward(fx.docs, nullptr, false).probs);
  CHECK(checkpoint_to_json(b.state()) == json);

  auto bad = a.state();
  bad.pop_back();
  CHECK_THROWS_AS(b.load_state(bad), Error);
  bad = a.state();
  bad[0].value = Tensor(1, 1);
  CHECK_THROWS_AS(b.load_state(bad), Error);
}

TEST_CASE("copies are independent") {
  Fixture fx;
  auto a = fx.model(1);
  HillModel b = a;
  b.visit([](std::string_view, Tensor& v, Tensor&) { v.fill(0.0); });
  CHECK(a.forward(fx.docs, nullptr, false).probs != b.forward(fx.docs, nullptr, false).probs);
}

TEST_CASE("forward is pure") {
  Fixture fx;
  const auto m = fx.model(4);
  const auto f1 = m.forward(fx.docs, &fx.targets, true);
  const auto f2 = m.forward(fx.docs, &fx.targets, true);
  CHECK(f1.loss == f2.loss);
  CHECK(f1.probs == f2.probs);
  CHECK(m.predict(fx.docs) == m.predict(fx.docs));
}
