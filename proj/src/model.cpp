#include "hill/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hill/error.hpp"
#include "hill/kernels.hpp"

namespace hill {

namespace {

std::string dims(std::size_t r, std::size_t c) {
  return "(" + std::to_string(r) + "x" + std::to_string(c) + ")";
}

void append_positive_mask(const Tensor& t, std::vector<bool>& bits) {
  for (double x : t.data()) bits.push_back(x > 0.0);
}

}  // namespace

// ---------------------------------------------------------------------------
// Losses

LossGrad bce_loss(const Tensor& probs, const Tensor& targets) {
  if (!probs.same_shape(targets)) {
    throw Error("bce_loss: probabilities " + probs.shape() + " vs targets " + targets.shape());
  }
  if (probs.empty()) throw Error("bce_loss: empty input");
  require_finite(probs, "bce_loss");
  LossGrad out{0.0, Tensor(probs.rows(), probs.cols())};
  const double n = static_cast<double>(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double y = targets[i];
    if (y != 0.0 && y != 1.0) throw Error("bce_loss: target " + std::to_string(y) + " is not 0 or 1");
    const double p = std::clamp(probs[i], kProbClamp, 1.0 - kProbClamp);
    out.loss -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
    out.grad[i] = (-y / p + (1.0 - y) / (1.0 - p)) / n;
  }
  out.loss /= n;
  return out;
}

namespace {

constexpr double kNormFloor = 1e-8;

// Rows of [h; h_hat] scaled to unit length; a row shorter than kNormFloor is
// divided by the floor instead, so a zero row has similarity 0 to everything.
struct UnitRows {
  Tensor u;
  std::vector<double> norm;
};

UnitRows unit_rows(const Tensor& h, const Tensor& h_hat) {
  const std::size_t b = h.rows(), d = h.cols();
  const auto& k = kernels::active();
  UnitRows out{Tensor(2 * b, d), std::vector<double>(2 * b)};
  for (std::size_t i = 0; i < 2 * b; ++i) {
    auto src = i < b ? h.row(i) : h_hat.row(i - b);
    out.norm[i] = std::sqrt(k.dot(src.data(), src.data(), d));
    const double n = std::max(out.norm[i], kNormFloor);
    for (std::size_t c = 0; c < d; ++c) out.u(i, c) = src[c] / n;
  }
  return out;
}

void unit_rows_backward(const UnitRows& r, const Tensor& du, NtXentResult& out) {
  const std::size_t n = r.u.rows(), b = n / 2, d = r.u.cols();
  const auto& k = kernels::active();
  out.grad_h = Tensor(b, d);
  out.grad_h_hat = Tensor(b, d);
  for (std::size_t i = 0; i < n; ++i) {
    auto dst = i < b ? out.grad_h.row(i) : out.grad_h_hat.row(i - b);
    if (r.norm[i] <= kNormFloor) {
      for (std::size_t c = 0; c < d; ++c) dst[c] = du(i, c) / kNormFloor;
      continue;
    }
    const double proj = k.dot(r.u.row(i).data(), du.row(i).data(), d);
    for (std::size_t c = 0; c < d; ++c) dst[c] = (du(i, c) - r.u(i, c) * proj) / r.norm[i];
  }
}

NtXentResult nt_xent_simclr(const Tensor& h, const Tensor& h_hat, double tau) {
  const std::size_t b = h.rows();
  const std::size_t n = 2 * b;
  const std::size_t d = h.cols();
  const auto& k = kernels::active();
  const UnitRows r = unit_rows(h, h_hat);
  const Tensor& u = r.u;

  Tensor s(n, n);
  k.gemm_nt(n, n, d, u.data().data(), u.data().data(), s.data().data());
  for (auto& x : s.data()) x /= tau;

  NtXentResult out;
  Tensor ds(n, n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t pos = (i + b) % n;
    double m = -INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) m = std::max(m, s(i, j));
    }
    double den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) den += std::exp(s(i, j) - m);
    }
    out.loss += -s(i, pos) + m + std::log(den);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      ds(i, j) = (std::exp(s(i, j) - m) / den - (j == pos ? 1.0 : 0.0)) * inv_n;
    }
  }
  out.loss *= inv_n;

  // s = u u^T / tau, so du = (ds + ds^T) u / tau.
  Tensor sym(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) sym(i, j) = (ds(i, j) + ds(j, i)) / tau;
  }
  unit_rows_backward(r, matmul(sym, u), out);
  return out;
}

NtXentResult nt_xent_literal(const Tensor& h, const Tensor& h_hat, double tau) {
  const std::size_t b = h.rows();
  const std::size_t d = h.cols();
  const auto& k = kernels::active();
  const UnitRows r = unit_rows(h, h_hat);
  std::vector<double> s(b);
  for (std::size_t j = 0; j < b; ++j) s[j] = k.dot(r.u.row(j).data(), r.u.row(b + j).data(), d) / tau;

  NtXentResult out;
  std::vector<double> ds(b, 0.0);
  const double inv_b = 1.0 / static_cast<double>(b);
  for (std::size_t i = 0; i < b; ++i) {
    double m = -INFINITY;
    for (std::size_t j = 0; j < b; ++j) {
      if (j != i) m = std::max(m, s[j]);
    }
    double den = 0.0;
    for (std::size_t j = 0; j < b; ++j) {
      if (j != i) den += std::exp(s[j] - m);
    }
    out.loss += -s[i] + m + std::log(den);
    ds[i] -= inv_b;
    for (std::size_t j = 0; j < b; ++j) {
      if (j != i) ds[j] += std::exp(s[j] - m) / den * inv_b;
    }
  }
  out.loss *= inv_b;

  Tensor du(2 * b, d);
  for (std::size_t j = 0; j < b; ++j) {
    for (std::size_t c = 0; c < d; ++c) {
      du(j, c) = ds[j] / tau * r.u(b + j, c);
      du(b + j, c) = ds[j] / tau * r.u(j, c);
    }
  }
  unit_rows_backward(r, du, out);
  return out;
}

}  // namespace

NtXentResult nt_xent(const Tensor& h, const Tensor& h_hat, double tau, NtXentForm form) {
  if (!h.same_shape(h_hat)) throw Error("nt_xent: views have shapes " + h.shape() + " and " + h_hat.shape());
  if (h.rows() < 2) throw Error("nt_xent: batch of " + std::to_string(h.rows()) + " has no negatives");
  if (!(tau > 0.0)) throw Error("nt_xent: temperature must be positive");
  require_finite(h, "nt_xent");
  require_finite(h_hat, "nt_xent");
  return form == NtXentForm::SimClr ? nt_xent_simclr(h, h_hat, tau) : nt_xent_literal(h, h_hat, tau);
}

double total_loss(double classification, double contrastive, double lambda_clr) {
  if (!std::isfinite(classification) || !std::isfinite(contrastive)) throw Error("total_loss: non-finite loss");
  return classification + lambda_clr * contrastive;
}

// ---------------------------------------------------------------------------
// Text encoder

Tensor TextEncoder::encode_one(TokenSpan tokens) const {
  const TokenSpan docs[1] = {tokens};
  return encode(docs, nullptr);
}

namespace {

struct BowCache final : EncoderCache {
  std::vector<std::vector<std::size_t>> rows;
  Tensor summed;
  Tensor pre;
};

}  // namespace

BagOfWordsEncoder::BagOfWordsEncoder(std::size_t vocab, std::size_t dim, Rng& rng) {
  if (vocab == 0 || dim == 0) throw Error("bag-of-words encoder needs a nonzero vocabulary and dimension");
  embedding_ = Tensor(vocab, dim);
  embedding_grad_ = Tensor(vocab, dim);
  const double limit = 1.0 / std::sqrt(static_cast<double>(dim));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (auto& x : embedding_.data()) x = dist(rng);
  dense_ = Linear::init(dim, dim, rng);
}

Tensor BagOfWordsEncoder::encode(std::span<const TokenSpan> docs, std::unique_ptr<EncoderCache>* cache) const {
  const std::size_t vocab = embedding_.rows();
  const std::size_t d = embedding_.cols();
  const auto& k = kernels::active();
  Tensor summed(docs.size(), d);
  std::vector<std::vector<std::size_t>> rows(docs.size());
  for (std::size_t b = 0; b < docs.size(); ++b) {
    rows[b].reserve(docs[b].size());
    for (TokenId t : docs[b]) {
      const std::size_t r = t % vocab;
      rows[b].push_back(r);
      k.axpy(1.0, embedding_.row(r).data(), summed.row(b).data(), d);
    }
  }
  Tensor pre = dense_.forward(summed);
  Tensor out = relu(pre);
  if (cache) {
    auto c = std::make_unique<BowCache>();
    c->rows = std::move(rows);
    c->summed = std::move(summed);
    c->pre = std::move(pre);
    *cache = std::move(c);
  }
  return out;
}

void BagOfWordsEncoder::backward(const EncoderCache& cache, const Tensor& grad_out) {
  const auto& c = dynamic_cast<const BowCache&>(cache);
  Tensor d_pre = relu_backward(c.pre, grad_out);
  Tensor d_sum = dense_.backward(c.summed, d_pre);
  const auto& k = kernels::active();
  const std::size_t d = embedding_.cols();
  for (std::size_t b = 0; b < c.rows.size(); ++b) {
    for (std::size_t r : c.rows[b]) k.axpy(1.0, d_sum.row(b).data(), embedding_grad_.row(r).data(), d);
  }
}

void BagOfWordsEncoder::zero_grad() {
  embedding_grad_.fill(0.0);
  dense_.zero_grad();
}

void BagOfWordsEncoder::visit(const ParamVisitor& f) {
  f("encoder.embedding", embedding_, embedding_grad_);
  dense_.visit("encoder.dense", f);
}

void BagOfWordsEncoder::branch_bits(const EncoderCache& cache, std::vector<bool>& bits) const {
  append_positive_mask(dynamic_cast<const BowCache&>(cache).pre, bits);
}

std::unique_ptr<TextEncoder> BagOfWordsEncoder::clone() const {
  return std::make_unique<BagOfWordsEncoder>(*this);
}

// ---------------------------------------------------------------------------
// Structure encoder

TreeLayout TreeLayout::from_tree(const CodingTree& tree) {
  if (!tree.is_aligned()) throw Error("structure encoder needs an aligned coding tree");
  TreeLayout layout;
  layout.height = tree.height();
  if (layout.height == 0) throw Error("structure encoder needs a tree of height at least 1");
  const std::uint32_t K = layout.height;

  // Row index of every node within its level.
  std::vector<std::uint32_t> row_of(tree.capacity(), 0);
  std::vector<std::vector<NodeId>> levels(K + 1);
  levels[0].resize(tree.leaf_count());
  for (NodeId v = 0; v < tree.leaf_count(); ++v) levels[0][v] = v;
  for (std::uint32_t k = 1; k <= K; ++k) levels[k] = tree.nodes_at_depth(K - k);
  for (const auto& level : levels) {
    layout.level_size.push_back(level.size());
    for (std::size_t i = 0; i < level.size(); ++i) row_of[level[i]] = static_cast<std::uint32_t>(i);
  }
  for (std::uint32_t k = 0; k < K; ++k) {
    std::vector<std::uint32_t> parents;
    parents.reserve(levels[k].size());
    for (NodeId v : levels[k]) parents.push_back(row_of[tree.node(v).parent]);
    layout.parent_row.push_back(std::move(parents));
  }
  return layout;
}

StructureEncoder::StructureEncoder(const ModelConfig& config, const CodingTree& tree, std::size_t label_count,
                                   Rng& rng)
    : eta_(config.eta), layout_(TreeLayout::from_tree(tree)) {
  if (tree.leaf_count() != label_count) {
    throw Error("coding tree has " + std::to_string(tree.leaf_count()) + " leaves but there are " +
                std::to_string(label_count) + " labels");
  }
  if (layout_.height != config.K) {
    throw Error("coding tree height " + std::to_string(layout_.height) + " differs from K = " +
                std::to_string(config.K));
  }
  label_scale_ = Tensor(label_count, 1);
  label_shift_ = Tensor(label_count, 1);
  label_scale_grad_ = Tensor(label_count, 1);
  label_shift_grad_ = Tensor(label_count, 1);
  std::uniform_real_distribution<double> scale(0.5, 1.5);
  std::uniform_real_distribution<double> shift(-0.1, 0.1);
  for (auto& x : label_scale_.data()) x = scale(rng);
  for (auto& x : label_shift_.data()) x = shift(rng);
  proj_ = Linear::init(config.d_B, config.d_V, rng);
  for (std::uint32_t k = 0; k < config.K; ++k) ffn_.push_back(Mlp2::init(config.d_V, config.d_V, config.d_V, rng));
}

Tensor StructureEncoder::project_labels(const Tensor& h_doc, ProjectionCache* cache) const {
  if (h_doc.cols() != proj_.in_dim()) {
    throw Error("project_labels: document embedding " + h_doc.shape() + " does not match d_B = " +
                std::to_string(proj_.in_dim()));
  }
  require_finite(h_doc, "project_labels");
  const std::size_t y = label_count();
  const std::size_t d = h_doc.cols();
  Tensor expanded(h_doc.rows() * y, d);
  for (std::size_t b = 0; b < h_doc.rows(); ++b) {
    auto h = h_doc.row(b);
    for (std::size_t j = 0; j < y; ++j) {
      auto dst = expanded.row(b * y + j);
      for (std::size_t c = 0; c < d; ++c) dst[c] = label_scale_[j] * h[c] + label_shift_[j];
    }
  }
  Tensor out = proj_.forward(expanded);
  if (cache) {
    cache->h_doc = h_doc;
    cache->expanded = std::move(expanded);
  }
  return out;
}

Tensor StructureEncoder::project_labels_backward(const ProjectionCache& cache, const Tensor& grad_out) {
  Tensor d_exp = proj_.backward(cache.expanded, grad_out);
  const std::size_t y = label_count();
  const std::size_t d = cache.h_doc.cols();
  const auto& k = kernels::active();
  Tensor d_h(cache.h_doc.rows(), d);
  for (std::size_t b = 0; b < cache.h_doc.rows(); ++b) {
    auto h = cache.h_doc.row(b);
    for (std::size_t j = 0; j < y; ++j) {
      auto g = d_exp.row(b * y + j);
      label_scale_grad_[j] += k.dot(g.data(), h.data(), d);
      double s = 0.0;
      for (double x : g) s += x;
      label_shift_grad_[j] += s;
      k.axpy(label_scale_[j], g.data(), d_h.row(b).data(), d);
    }
  }
  return d_h;
}

Tensor StructureEncoder::tree_forward(const Tensor& leaves, std::size_t batch, TreeCache* cache) const {
  const std::size_t dv = proj_.out_dim();
  const auto& sizes = layout_.level_size;
  if (leaves.cols() != dv || leaves.rows() != batch * sizes[0]) {
    throw Error("tree_forward: leaf features " + leaves.shape() + " do not match " + dims(batch * sizes[0], dv) +
                " for " + std::to_string(sizes[0]) + " leaves");
  }
  const auto& k = kernels::active();
  const std::uint32_t K = layout_.height;
  Tensor out(batch, K * dv);
  if (cache) {
    cache->batch = batch;
    cache->ffn.assign(K, {});
  }
  Tensor prev = leaves;
  for (std::uint32_t lvl = 1; lvl <= K; ++lvl) {
    const std::size_t n_child = sizes[lvl - 1];
    const std::size_t n = sizes[lvl];
    const auto& parent = layout_.parent_row[lvl - 1];
    Tensor sum(batch * n, dv);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t i = 0; i < n_child; ++i) {
        k.axpy(1.0, prev.row(b * n_child + i).data(), sum.row(b * n + parent[i]).data(), dv);
      }
    }
    Tensor x = ffn_[lvl - 1].forward(sum, cache ? &cache->ffn[lvl - 1] : nullptr);
    const double scale = eta_ == Readout::Mean ? 1.0 / static_cast<double>(n) : 1.0;
    for (std::size_t b = 0; b < batch; ++b) {
      double* dst = out.row(b).data() + (lvl - 1) * dv;
      for (std::size_t i = 0; i < n; ++i) k.axpy(scale, x.row(b * n + i).data(), dst, dv);
    }
    prev = std::move(x);
  }
  return out;
}

Tensor StructureEncoder::tree_backward(const TreeCache& cache, const Tensor& grad_out) {
  const std::size_t dv = proj_.out_dim();
  const std::uint32_t K = layout_.height;
  const std::size_t batch = cache.batch;
  if (grad_out.rows() != batch || grad_out.cols() != K * dv) {
    throw Error("tree_backward: gradient " + grad_out.shape() + " does not match " + dims(batch, K * dv));
  }
  const auto& sizes = layout_.level_size;
  const auto& k = kernels::active();
  Tensor carried;  // dL/dx for the level being processed, from the level above
  for (std::uint32_t lvl = K; lvl >= 1; --lvl) {
    const std::size_t n = sizes[lvl];
    Tensor d_x = carried.empty() ? Tensor(batch * n, dv) : std::move(carried);
    const double scale = eta_ == Readout::Mean ? 1.0 / static_cast<double>(n) : 1.0;
    for (std::size_t b = 0; b < batch; ++b) {
      const double* src = grad_out.row(b).data() + (lvl - 1) * dv;
      for (std::size_t i = 0; i < n; ++i) k.axpy(scale, src, d_x.row(b * n + i).data(), dv);
    }
    Tensor d_sum = ffn_[lvl - 1].backward(cache.ffn[lvl - 1], d_x);
    const std::size_t n_child = sizes[lvl - 1];
    const auto& parent = layout_.parent_row[lvl - 1];
    Tensor d_child(batch * n_child, dv);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t i = 0; i < n_child; ++i) {
        auto src = d_sum.row(b * n + parent[i]);
        std::copy(src.begin(), src.end(), d_child.row(b * n_child + i).begin());
      }
    }
    carried = std::move(d_child);
  }
  return carried;
}

void StructureEncoder::zero_grad() {
  label_scale_grad_.fill(0.0);
  label_shift_grad_.fill(0.0);
  proj_.zero_grad();
  for (auto& f : ffn_) f.zero_grad();
}

void StructureEncoder::visit(const ParamVisitor& f) {
  f("structure.label_scale", label_scale_, label_scale_grad_);
  f("structure.label_shift", label_shift_, label_shift_grad_);
  proj_.visit("structure.proj", f);
  for (std::size_t k = 0; k < ffn_.size(); ++k) ffn_[k].visit("structure.ffn" + std::to_string(k + 1), f);
}

void StructureEncoder::branch_bits(const TreeCache& cache, std::vector<bool>& bits) const {
  for (const auto& c : cache.ffn) append_positive_mask(c.pre, bits);
}

// ---------------------------------------------------------------------------
// Full model

namespace {

void validate_config(const ModelConfig& c) {
  if (c.d_B == 0 || c.d_V == 0) throw Error("d_B and d_V must be positive");
  if (c.K == 0) throw Error("K must be at least 1");
  if (!(c.tau > 0.0) || !std::isfinite(c.tau)) throw Error("tau must be positive");
  if (!(c.lambda_clr >= 0.0) || !std::isfinite(c.lambda_clr)) throw Error("lambda_clr must be non-negative");
  if (c.vocab_size == 0) throw Error("vocab_size must be positive");
}

}  // namespace

HillModel::HillModel(const ModelConfig& config, const CodingTree& tree, std::uint64_t seed,
                     std::unique_ptr<TextEncoder> encoder)
    : HillModel(config, tree, Rng(seed), std::move(encoder)) {}

HillModel::HillModel(const ModelConfig& config, const CodingTree& tree, Rng rng,
                     std::unique_ptr<TextEncoder> encoder)
    : config_((validate_config(config), config)),
      encoder_(encoder ? std::move(encoder) : std::make_unique<BagOfWordsEncoder>(config.vocab_size, config.d_B, rng)),
      structure_(config, tree, tree.leaf_count(), rng),
      proj_text_(Mlp2::init(config.d_B, config.d_V, config.d_V, rng, false)),
      proj_tree_(Mlp2::init(config.K * config.d_V, config.d_V, config.d_V, rng, false)),
      classifier_(Linear::init(config.d_B + config.K * config.d_V, tree.leaf_count(), rng)) {
  if (encoder_->dim() != config.d_B) {
    throw Error("text encoder produces " + std::to_string(encoder_->dim()) + " dims, d_B is " +
                std::to_string(config.d_B));
  }
}

HillModel::HillModel(const HillModel& other)
    : config_(other.config_),
      encoder_(other.encoder_->clone()),
      structure_(other.structure_),
      proj_text_(other.proj_text_),
      proj_tree_(other.proj_tree_),
      classifier_(other.classifier_) {}

HillModel& HillModel::operator=(const HillModel& other) {
  if (this != &other) {
    HillModel copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Tensor HillModel::classify(const Tensor& h_doc, const Tensor& h_tree) const {
  if (h_doc.cols() != config_.d_B || h_tree.cols() != tree_dim() || h_doc.rows() != h_tree.rows()) {
    throw Error("classify: inputs " + h_doc.shape() + " and " + h_tree.shape() + " do not match d_B = " +
                std::to_string(config_.d_B) + ", d_T = " + std::to_string(tree_dim()));
  }
  return sigmoid(classifier_.forward(concat_cols(h_doc, h_tree)));
}

HillModel::Forward HillModel::forward(std::span<const TokenSpan> docs, const Tensor* targets,
                                      bool with_contrastive) const {
  if (docs.empty()) throw Error("forward: empty batch");
  Forward f;
  f.batch = docs.size();
  f.h_doc = encoder_->encode(docs, &f.encoder);
  require_finite(f.h_doc, "text encoder output");
  Tensor x0 = structure_.project_labels(f.h_doc, &f.projection);
  f.h_tree = structure_.tree_forward(x0, f.batch, &f.tree);
  f.features = concat_cols(f.h_doc, f.h_tree);
  f.probs = sigmoid(classifier_.forward(f.features));

  if (targets) {
    if (targets->rows() != f.batch || targets->cols() != label_count()) {
      throw Error("forward: targets " + targets->shape() + " do not match " + dims(f.batch, label_count()));
    }
    auto bce = bce_loss(f.probs, *targets);
    f.classification_loss = bce.loss;
    f.probs_grad = std::move(bce.grad);
  }
  if (with_contrastive) {
    if (f.batch < 2) throw Error("contrastive loss needs a batch of at least 2 documents");
    f.contrastive = true;
    f.h = proj_text_.forward(f.h_doc, &f.proj_text_cache);
    f.h_hat = proj_tree_.forward(f.h_tree, &f.proj_tree_cache);
    f.clr = nt_xent(f.h, f.h_hat, config_.tau, config_.ntxent_form);
    f.contrastive_loss = f.clr.loss;
  }
  f.loss = total_loss(f.classification_loss, f.contrastive_loss, f.contrastive ? config_.lambda_clr : 0.0);
  return f;
}

void HillModel::backward(const Forward& f) {
  if (f.probs_grad.empty()) throw Error("backward: forward pass ran without targets");
  Tensor d_logits = sigmoid_backward(f.probs, f.probs_grad);
  auto d_feat = concat_cols_backward(classifier_.backward(f.features, d_logits), config_.d_B);
  Tensor d_doc = std::move(d_feat.a);
  Tensor d_tree = std::move(d_feat.b);

  if (f.contrastive && config_.lambda_clr != 0.0) {
    Tensor g_h = f.clr.grad_h;
    Tensor g_hat = f.clr.grad_h_hat;
    for (auto& x : g_h.data()) x *= config_.lambda_clr;
    for (auto& x : g_hat.data()) x *= config_.lambda_clr;
    d_doc.add_scaled(proj_text_.backward(f.proj_text_cache, g_h));
    d_tree.add_scaled(proj_tree_.backward(f.proj_tree_cache, g_hat));
  }

  Tensor d_leaves = structure_.tree_backward(f.tree, d_tree);
  d_doc.add_scaled(structure_.project_labels_backward(f.projection, d_leaves));
  encoder_->backward(*f.encoder, d_doc);
}

std::vector<LabelSet> HillModel::predict(std::span<const TokenSpan> docs) const {
  std::vector<LabelSet> out;
  if (docs.empty()) return out;
  Forward f = forward(docs, nullptr, false);
  out.resize(f.batch);
  for (std::size_t b = 0; b < f.batch; ++b) {
    for (std::size_t j = 0; j < label_count(); ++j) {
      if (f.probs(b, j) > 0.5) out[b].push_back(static_cast<std::uint32_t>(j));
    }
  }
  return out;
}

void HillModel::zero_grad() {
  encoder_->zero_grad();
  structure_.zero_grad();
  proj_text_.zero_grad();
  proj_tree_.zero_grad();
  classifier_.zero_grad();
}

void HillModel::visit(const ParamVisitor& f) {
  encoder_->visit(f);
  structure_.visit(f);
  proj_text_.visit("proj_text", f);
  proj_tree_.visit("proj_tree", f);
  classifier_.visit("classifier", f);
}

std::vector<NamedTensor> HillModel::state() const {
  std::vector<NamedTensor> out;
  const_cast<HillModel*>(this)->visit(
      [&](std::string_view name, Tensor& value, Tensor&) { out.push_back({std::string(name), value}); });
  return out;
}

void HillModel::load_state(const std::vector<NamedTensor>& tensors) {
  std::map<std::string, const Tensor*, std::less<>> by_name;
  for (const auto& t : tensors) {
    if (!by_name.emplace(t.name, &t.value).second) throw Error("checkpoint repeats tensor " + t.name);
  }
  std::size_t used = 0;
  // Validate everything before assigning anything.
  visit([&](std::string_view name, Tensor& value, Tensor&) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw Error("checkpoint is missing tensor " + std::string(name));
    if (!it->second->same_shape(value)) {
      throw Error("checkpoint tensor " + std::string(name) + " has shape " + it->second->shape() + ", model needs " +
                  value.shape());
    }
    require_finite(*it->second, "checkpoint");
    ++used;
  });
  if (used != by_name.size()) throw Error("checkpoint has tensors the model does not know");
  visit([&](std::string_view name, Tensor& value, Tensor&) { value = *by_name.find(name)->second; });
}

std::uint64_t HillModel::branch_signature(const Forward& f) const {
  std::vector<bool> bits;
  encoder_->branch_bits(*f.encoder, bits);
  structure_.branch_bits(f.tree, bits);
  if (f.contrastive) {
    append_positive_mask(f.proj_text_cache.pre, bits);
    append_positive_mask(f.proj_tree_cache.pre, bits);
  }
  for (double p : f.probs.data()) bits.push_back(p < kProbClamp || p > 1.0 - kProbClamp);
  std::uint64_t hash = 1469598103934665603ULL;
  for (bool bit : bits) {
    hash ^= bit ? 0x9eU : 0x3cU;
    hash *= 1099511628211ULL;
  }
  return hash;
}

Tensor label_targets(std::span<const LabelSet> labels, std::size_t label_count) {
  Tensor t(labels.size(), label_count);
  for (std::size_t b = 0; b < labels.size(); ++b) {
    for (auto j : labels[b]) {
      if (j >= label_count) {
        throw Error("label " + std::to_string(j) + " out of range for " + std::to_string(label_count) + " labels");
      }
      t(b, j) = 1.0;
    }
  }
  return t;
}

}  // namespace hill
