#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "hill/checkpoint.hpp"
#include "hill/coding_tree.hpp"
#include "hill/datagen.hpp"
#include "hill/layers.hpp"
#include "hill/metrics.hpp"
#include "hill/tensor.hpp"

namespace hill {

enum class Readout { Sum, Mean };
enum class NtXentForm { SimClr, Literal };

struct ModelConfig {
  std::size_t d_B = 32;  // document embedding size
  std::size_t d_V = 16;  // tree node embedding size; h_T has K * d_V entries
  std::uint32_t K = 3;   // coding tree height
  double tau = 1.0;
  double lambda_clr = 0.1;
  Readout eta = Readout::Sum;
  NtXentForm ntxent_form = NtXentForm::SimClr;
  std::size_t vocab_size = 2000;
};

using TokenSpan = std::span<const TokenId>;

// ---------------------------------------------------------------------------
// Losses

struct LossGrad {
  double loss = 0.0;
  Tensor grad;
};

inline constexpr double kProbClamp = 1e-7;

/// Mean binary cross-entropy (nats) over every entry of `probs`, with
/// probabilities clamped to [1e-7, 1 - 1e-7] before the logs. The gradient
/// is taken at the clamped value and is not zeroed by the clamp.
LossGrad bce_loss(const Tensor& probs, const Tensor& targets);

struct NtXentResult {
  double loss = 0.0;
  Tensor grad_h;
  Tensor grad_h_hat;
};

/// Contrastive loss over rows of `h` and `h_hat` (row i of each is a positive
/// pair), cosine similarity scaled by 1/tau. Rows are divided by
/// max(|row|, 1e-8), so a zero row is similar to nothing rather than an error.
///
/// SimClr: every one of the 2B vectors is an anchor; its positive is the
/// other view of the same row and the denominator runs over all 2B - 1
/// other vectors. The loss is the mean over the 2B anchors.
///
/// Literal: anchor i scores exp(cos(h_i, h_hat_i) / tau) against the sum
/// of exp(cos(h_j, h_hat_j) / tau) over the other rows j != i; mean over i.
NtXentResult nt_xent(const Tensor& h, const Tensor& h_hat, double tau, NtXentForm form);

/// L_C + lambda * L_clr.
double total_loss(double classification, double contrastive, double lambda_clr);

// ---------------------------------------------------------------------------
// Text encoder

struct EncoderCache {
  virtual ~EncoderCache() = default;
};

/// Maps token sequences to document embeddings h_D.
class TextEncoder {
 public:
  virtual ~TextEncoder() = default;
  virtual std::size_t dim() const = 0;
  /// B x dim. Fills `cache` for a later backward when non-null.
  virtual Tensor encode(std::span<const TokenSpan> docs, std::unique_ptr<EncoderCache>* cache) const = 0;
  virtual void backward(const EncoderCache& cache, const Tensor& grad_out) = 0;
  virtual void zero_grad() = 0;
  virtual void visit(const ParamVisitor& f) = 0;
  /// Appends a fingerprint of the piecewise branches taken in `cache`.
  virtual void branch_bits(const EncoderCache& cache, std::vector<bool>& bits) const = 0;
  virtual std::unique_ptr<TextEncoder> clone() const = 0;

  Tensor encode_one(TokenSpan tokens) const;
};

/// Token ids (taken modulo the vocabulary) index an embedding table; the rows
/// are summed and passed through one Linear + ReLU.
class BagOfWordsEncoder final : public TextEncoder {
 public:
  BagOfWordsEncoder(std::size_t vocab, std::size_t dim, Rng& rng);

  std::size_t dim() const override { return dense_.out_dim(); }
  Tensor encode(std::span<const TokenSpan> docs, std::unique_ptr<EncoderCache>* cache) const override;
  void backward(const EncoderCache& cache, const Tensor& grad_out) override;
  void zero_grad() override;
  void visit(const ParamVisitor& f) override;
  void branch_bits(const EncoderCache& cache, std::vector<bool>& bits) const override;
  std::unique_ptr<TextEncoder> clone() const override;

 private:
  Tensor embedding_;
  Tensor embedding_grad_;
  Linear dense_;
};

// ---------------------------------------------------------------------------
// Structure encoder

/// Row layout of an aligned coding tree for batched propagation. Level 0 rows
/// are the leaves in vertex order; level k rows are the nodes at depth
/// K - k in ascending handle order.
struct TreeLayout {
  std::uint32_t height = 0;
  std::vector<std::size_t> level_size;                // K + 1 entries
  std::vector<std::vector<std::uint32_t>> parent_row;  // for levels 0..K-1

  static TreeLayout from_tree(const CodingTree& tree);
};

class StructureEncoder {
 public:
  struct ProjectionCache {
    Tensor h_doc;     // B x d_B
    Tensor expanded;  // (B * |Y|) x d_B
  };
  struct TreeCache {
    std::size_t batch = 0;
    std::vector<Mlp2::Cache> ffn;  // level k at index k - 1; input is the child sum
  };

  StructureEncoder(const ModelConfig& config, const CodingTree& tree, std::size_t label_count, Rng& rng);

  std::size_t label_count() const { return label_scale_.rows(); }
  std::size_t output_dim() const { return layout_.height * proj_.out_dim(); }
  const TreeLayout& layout() const { return layout_; }

  /// X_{G_L} for each document: row j of block b is
  /// (a_j h_b + c_j) W + w0, i.e. a learned |Y| x 1 expansion of h_D followed by
  /// a d_B x d_V linear map. Output is (B * |Y|) x d_V.
  Tensor project_labels(const Tensor& h_doc, ProjectionCache* cache = nullptr) const;
  /// Returns dL/dh_doc and accumulates parameter grads.
  Tensor project_labels_backward(const ProjectionCache& cache, const Tensor& grad_out);

  /// Bottom-up child-sum + per-level FFN, then per-level readout
  /// concatenated: B x (K * d_V).
  Tensor tree_forward(const Tensor& leaves, std::size_t batch, TreeCache* cache = nullptr) const;
  /// Returns dL/d(leaves) and accumulates FFN grads.
  Tensor tree_backward(const TreeCache& cache, const Tensor& grad_out);

  void zero_grad();
  void visit(const ParamVisitor& f);
  void branch_bits(const TreeCache& cache, std::vector<bool>& bits) const;

  std::vector<Mlp2>& level_ffns() { return ffn_; }
  Linear& projection() { return proj_; }
  Tensor& label_scale() { return label_scale_; }
  Tensor& label_shift() { return label_shift_; }

 private:
  Tensor label_scale_;  // |Y| x 1
  Tensor label_shift_;  // |Y| x 1
  Tensor label_scale_grad_;
  Tensor label_shift_grad_;
  Linear proj_;
  std::vector<Mlp2> ffn_;
  Readout eta_;
  TreeLayout layout_;
};

// ---------------------------------------------------------------------------
// Full model

class HillModel {
 public:
  struct Forward {
    std::size_t batch = 0;
    std::unique_ptr<EncoderCache> encoder;
    Tensor h_doc;
    StructureEncoder::ProjectionCache projection;
    StructureEncoder::TreeCache tree;
    Tensor h_tree;
    Tensor features;
    Tensor probs;
    bool contrastive = false;
    Mlp2::Cache proj_text_cache;
    Mlp2::Cache proj_tree_cache;
    Tensor h;
    Tensor h_hat;
    double classification_loss = 0.0;
    double contrastive_loss = 0.0;
    double loss = 0.0;
    Tensor probs_grad;     // dL_C/dP
    NtXentResult clr;      // dL_clr/dh, dL_clr/dh_hat
  };

  /// `tree` must be an aligned coding tree of height config.K over the label
  /// graph (one leaf per label).
  HillModel(const ModelConfig& config, const CodingTree& tree, std::uint64_t seed,
            std::unique_ptr<TextEncoder> encoder = nullptr);
  HillModel(const HillModel& other);
  HillModel& operator=(const HillModel& other);
  HillModel(HillModel&&) noexcept = default;
  HillModel& operator=(HillModel&&) noexcept = default;

  const ModelConfig& config() const { return config_; }
  std::size_t label_count() const { return structure_.label_count(); }
  std::size_t tree_dim() const { return structure_.output_dim(); }

  /// P = sigmoid([h_D; h_T] W_c + b_c) for a batch.
  Tensor classify(const Tensor& h_doc, const Tensor& h_tree) const;

  /// Forward pass. With `targets` (B x |Y| of 0/1) the losses are filled in;
  /// the contrastive branch runs when `with_contrastive` is set (needs B >= 2).
  Forward forward(std::span<const TokenSpan> docs, const Tensor* targets, bool with_contrastive) const;
  /// Accumulates dL/dtheta for the total loss of `fwd` into the grad buffers.
  void backward(const Forward& fwd);

  std::vector<LabelSet> predict(std::span<const TokenSpan> docs) const;

  void zero_grad();
  /// Names: encoder.*, structure.*, proj_text.*, proj_tree.*, classifier.*.
  void visit(const ParamVisitor& f);
  std::vector<NamedTensor> state() const;
  void load_state(const std::vector<NamedTensor>& tensors);

  /// Bits for every ReLU mask and probability clamp the forward took.
  std::uint64_t branch_signature(const Forward& fwd) const;

  StructureEncoder& structure() { return structure_; }
  TextEncoder& encoder() { return *encoder_; }

 private:
  HillModel(const ModelConfig& config, const CodingTree& tree, Rng rng, std::unique_ptr<TextEncoder> encoder);

  ModelConfig config_;
  std::unique_ptr<TextEncoder> encoder_;
  StructureEncoder structure_;
  Mlp2 proj_text_;
  Mlp2 proj_tree_;
  Linear classifier_;
};

/// B x |Y| 0/1 matrix from label sets.
Tensor label_targets(std::span<const LabelSet> labels, std::size_t label_count);

}  // namespace hill
