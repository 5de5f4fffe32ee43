#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hill/coding_tree.hpp"
#include "hill/datagen.hpp"
#include "hill/metrics.hpp"
#include "hill/model.hpp"

namespace hill {

struct TrainConfig {
  ModelConfig model;
  double lr_encoder = 3e-3;
  double lr_structure = 3e-3;
  std::size_t batch_size = 16;
  std::size_t epochs = 20;
  std::uint64_t seed = 42;
};

struct Scores {
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
};

struct EpochReport {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // mean total loss over training documents
  double classification_loss = 0.0;
  double contrastive_loss = 0.0;
  bool has_dev = false;
  Scores dev;
};

/// Aligned coding tree of height K over the hierarchy's label graph.
CodingTree label_coding_tree(const LabelHierarchy& hierarchy, std::uint32_t K);

/// Model over label_coding_tree(hierarchy, config.model.K), seeded by config.seed.
HillModel make_model(const TrainConfig& config, const LabelHierarchy& hierarchy);

std::vector<LabelSet> predict(const HillModel& model, const Dataset& data, std::size_t batch_size = 64);
Scores evaluate(const HillModel& model, const Dataset& data);

/// Minibatch Adam over shuffled training data. Encoder parameters use
/// lr_encoder, everything else lr_structure. The contrastive branch runs
/// whenever lambda_clr > 0. `on_epoch` is called after every epoch.
std::vector<EpochReport> train(HillModel& model, const Dataset& train_set, const Dataset* dev_set,
                               const TrainConfig& config,
                               const std::function<void(const EpochReport&)>& on_epoch = {});

struct SweepPoint {
  std::uint32_t K = 0;
  double tree_entropy = 0.0;
  double final_loss = 0.0;
  Scores dev;
};

/// Trains one model per height and scores it on `dev_set`.
std::vector<SweepPoint> sweep_heights(const TrainConfig& base, const LabelHierarchy& hierarchy,
                                      const Dataset& train_set, const Dataset& dev_set,
                                      std::span<const std::uint32_t> heights);

/// JSON config with keys d_B, d_V, K, tau, lambda_clr, eta, lr_encoder,
/// lr_structure, batch_size, epochs, seed, ntxent_form, vocab_size. Missing
/// keys keep their defaults; unknown keys are rejected.
TrainConfig parse_train_config(std::string_view json);
TrainConfig load_train_config(const std::filesystem::path& path);
std::string train_config_to_json(const TrainConfig& config);

std::string epoch_report_to_json(const EpochReport& report);

}  // namespace hill
