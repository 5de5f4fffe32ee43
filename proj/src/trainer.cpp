#include "hill/trainer.hpp"

#include <algorithm>
#include <numeric>

#include <spdlog/spdlog.h>

#include "hill/adam.hpp"
#include "hill/entropy_min.hpp"
#include "hill/error.hpp"

namespace hill {

namespace {

std::vector<TokenSpan> token_spans(const Dataset& data, std::span<const std::size_t> idx) {
  std::vector<TokenSpan> out;
  out.reserve(idx.size());
  for (auto i : idx) out.emplace_back(data[i].tokens);
  return out;
}

std::vector<LabelSet> gold_labels(const Dataset& data) {
  std::vector<LabelSet> out;
  out.reserve(data.size());
  for (const auto& ex : data) out.emplace_back(ex.labels.begin(), ex.labels.end());
  return out;
}

// Batches of `size` in the given order; a trailing singleton joins the batch
// before it so every batch can form negatives.
std::vector<std::span<const std::size_t>> make_batches(std::span<const std::size_t> order, std::size_t size) {
  std::vector<std::span<const std::size_t>> out;
  for (std::size_t start = 0; start < order.size(); start += size) {
    out.push_back(order.subspan(start, std::min(size, order.size() - start)));
  }
  if (out.size() >= 2 && out.back().size() == 1) {
    const auto& prev = out[out.size() - 2];
    out[out.size() - 2] = order.subspan(prev.data() - order.data(), prev.size() + 1);
    out.pop_back();
  }
  return out;
}

}  // namespace

CodingTree label_coding_tree(const LabelHierarchy& hierarchy, std::uint32_t K) {
  auto graph = std::make_shared<const Graph>(hierarchy.to_graph());
  CodingTree tree = K == 1 ? CodingTree::initial(graph) : build_coding_tree(graph, K);
  tree.align();
  return tree;
}

HillModel make_model(const TrainConfig& config, const LabelHierarchy& hierarchy) {
  return HillModel(config.model, label_coding_tree(hierarchy, config.model.K), config.seed);
}

std::vector<LabelSet> predict(const HillModel& model, const Dataset& data, std::size_t batch_size) {
  if (batch_size == 0) throw Error("prediction batch size must be positive");
  std::vector<LabelSet> out;
  out.reserve(data.size());
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    auto chunk = std::span<const std::size_t>(idx).subspan(start, std::min(batch_size, data.size() - start));
    auto docs = token_spans(data, chunk);
    for (auto& p : model.predict(docs)) out.push_back(std::move(p));
  }
  return out;
}

Scores evaluate(const HillModel& model, const Dataset& data) {
  auto preds = predict(model, data);
  auto golds = gold_labels(data);
  return {micro_f1(preds, golds), macro_f1(preds, golds, model.label_count())};
}

std::vector<EpochReport> train(HillModel& model, const Dataset& train_set, const Dataset* dev_set,
                               const TrainConfig& config, const std::function<void(const EpochReport&)>& on_epoch) {
  if (train_set.empty()) throw Error("training set is empty");
  if (config.batch_size == 0) throw Error("batch_size must be positive");
  if (!(config.lr_encoder > 0.0) || !(config.lr_structure > 0.0)) throw Error("learning rates must be positive");
  const bool contrastive = model.config().lambda_clr > 0.0;
  if (contrastive && (config.batch_size == 1 || train_set.size() == 1)) {
    throw Error("lambda_clr > 0 needs batches of at least 2 documents");
  }
  const std::size_t labels = model.label_count();
  for (const auto& ex : train_set) {
    for (auto y : ex.labels) {
      if (y >= labels) throw Error("training label " + std::to_string(y) + " is outside the " +
                                   std::to_string(labels) + "-label hierarchy");
    }
  }

  std::vector<ParamSlot> slots;
  model.visit([&](std::string_view name, Tensor& value, Tensor& grad) {
    const bool encoder = name.starts_with("encoder.");
    slots.push_back({&value, &grad, encoder ? config.lr_encoder : config.lr_structure});
  });
  AdamState adam;
  Rng shuffle_rng(config.seed ^ 0x5eed5eed5eedULL);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<EpochReport> reports;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochReport rep;
    rep.epoch = epoch;
    for (auto batch : make_batches(order, config.batch_size)) {
      auto docs = token_spans(train_set, batch);
      std::vector<LabelSet> gold;
      gold.reserve(batch.size());
      for (auto i : batch) gold.emplace_back(train_set[i].labels.begin(), train_set[i].labels.end());
      Tensor targets = label_targets(gold, labels);

      model.zero_grad();
      auto fwd = model.forward(docs, &targets, contrastive);
      model.backward(fwd);
      adam_step(slots, adam);

      const double w = static_cast<double>(batch.size());
      rep.loss += fwd.loss * w;
      rep.classification_loss += fwd.classification_loss * w;
      rep.contrastive_loss += fwd.contrastive_loss * w;
    }
    const double n = static_cast<double>(train_set.size());
    rep.loss /= n;
    rep.classification_loss /= n;
    rep.contrastive_loss /= n;
    if (dev_set && !dev_set->empty()) {
      rep.has_dev = true;
      rep.dev = evaluate(model, *dev_set);
    }
    spdlog::info("epoch {} loss {:.6f} dev micro {:.4f} macro {:.4f}", epoch, rep.loss, rep.dev.micro_f1,
                 rep.dev.macro_f1);
    if (on_epoch) on_epoch(rep);
    reports.push_back(rep);
  }
  return reports;
}

std::vector<SweepPoint> sweep_heights(const TrainConfig& base, const LabelHierarchy& hierarchy,
                                      const Dataset& train_set, const Dataset& dev_set,
                                      std::span<const std::uint32_t> heights) {
  std::vector<SweepPoint> out;
  for (auto K : heights) {
    TrainConfig cfg = base;
    cfg.model.K = K;
    CodingTree tree = label_coding_tree(hierarchy, K);
    HillModel model(cfg.model, tree, cfg.seed);
    auto reports = train(model, train_set, nullptr, cfg);
    SweepPoint p;
    p.K = K;
    p.tree_entropy = tree.entropy();
    p.final_loss = reports.empty() ? 0.0 : reports.back().loss;
    p.dev = evaluate(model, dev_set);
    spdlog::info("K {} tree entropy {:.4f} dev micro {:.4f} macro {:.4f}", K, p.tree_entropy, p.dev.micro_f1,
                 p.dev.macro_f1);
    out.push_back(p);
  }
  return out;
}

}  // namespace hill
