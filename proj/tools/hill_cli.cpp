#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hill/coding_tree.hpp"
#include "hill/datagen.hpp"
#include "hill/entropy_min.hpp"
#include "hill/error.hpp"
#include "hill/graph.hpp"
#include "hill/log.hpp"
#include "hill/metrics.hpp"
#include "hill/oracle.hpp"
#include "hill/trainer.hpp"

namespace fs = std::filesystem;
using namespace hill;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string fixed4(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

std::vector<LabelSet> label_sets(const Dataset& data) {
  std::vector<LabelSet> out;
  for (const auto& ex : data) out.emplace_back(ex.labels.begin(), ex.labels.end());
  return out;
}

struct TrainArgs {
  std::string config;
  std::string hierarchy;
  std::string train;
  std::string dev;
  std::string out = ".";
  std::int64_t seed = -1;
  std::uint64_t data_seed = 42;
};

SyntheticData training_data(const TrainArgs& a) {
  if (a.hierarchy.empty() && a.train.empty() && a.dev.empty()) return default_synthetic(a.data_seed);
  if (a.hierarchy.empty() || a.train.empty()) throw Error("--hierarchy and --train must be given together");
  SyntheticData d{LabelHierarchy::load(a.hierarchy), load_dataset(a.train), {}};
  if (!a.dev.empty()) d.dev = load_dataset(a.dev);
  return d;
}

TrainConfig training_config(const TrainArgs& a) {
  TrainConfig cfg = a.config.empty() ? TrainConfig{} : load_train_config(a.config);
  if (a.seed >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed);
  return cfg;
}

void run_train(const TrainArgs& a) {
  const TrainConfig cfg = training_config(a);
  const SyntheticData data = training_data(a);
  const fs::path out = a.out;
  fs::create_directories(out);

  CodingTree tree = label_coding_tree(data.hierarchy, cfg.model.K);
  write_text(out / "tree.json", tree_to_json(tree));
  HillModel model(cfg.model, tree, cfg.seed);

  std::ofstream report(out / "report.jsonl");
  if (!report) throw Error("cannot write " + (out / "report.jsonl").string());
  auto reports = train(model, data.train, data.dev.empty() ? nullptr : &data.dev, cfg,
                       [&](const EpochReport& r) { report << epoch_report_to_json(r) << '\n' << std::flush; });

  save_checkpoint(out / "checkpoint.json", model.state());
  write_text(out / "config.json", train_config_to_json(cfg));
  if (!data.dev.empty()) {
    Dataset pred;
    for (auto& labels : predict(model, data.dev)) pred.push_back({{}, std::vector<LabelId>(labels.begin(), labels.end())});
    save_dataset(out / "predictions.jsonl", pred);
  }
  const auto& last = reports.back();
  std::cout << "final_loss " << fixed4(last.loss) << '\n';
  if (last.has_dev) {
    std::cout << "dev_micro_f1 " << fixed4(last.dev.micro_f1) << '\n';
    std::cout << "dev_macro_f1 " << fixed4(last.dev.macro_f1) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structural-entropy coding trees and hierarchical text classification"};
  app.require_subcommand(1);

  std::string graph_path, tree_path, out_path, pred_path, gold_path;
  std::uint32_t height = 2;
  std::int64_t seed = 42;
  bool report_entropy = false;

  auto* entropy = app.add_subcommand("entropy", "Structural entropy of a coding tree");
  entropy->add_option("--graph", graph_path, "Edge list")->required();
  entropy->add_option("--tree", tree_path, "Coding tree JSON")->required();

  auto* build = app.add_subcommand("build-tree", "Greedy coding tree of a given height");
  build->add_option("--graph", graph_path, "Edge list")->required();
  build->add_option("--height", height, "Tree height K (2 <= K < |V|)")->required();
  build->add_option("--out", out_path, "Write the tree JSON here (stdout when omitted)");
  build->add_option("--seed", seed, "Accepted for uniformity; the construction is deterministic");
  build->add_flag("--report-entropy", report_entropy, "Print the entropy of the built tree");

  auto* oracle = app.add_subcommand("oracle", "Exact minimum entropy by exhaustive search, with the greedy gap");
  oracle->add_option("--graph", graph_path, "Edge list")->required();
  oracle->add_option("--height", height, "Tree height K (2 or 3)")->required();

  std::uint32_t depth = 3, branching = 4;
  CorpusParams corpus;
  std::size_t train_size = 2000;
  std::string data_dir = ".";
  auto* gen = app.add_subcommand("gen-data", "Write a synthetic hierarchy and corpus");
  gen->add_option("--out", data_dir, "Output directory");
  gen->add_option("--seed", seed, "Random seed");
  gen->add_option("--depth", depth, "Hierarchy depth below the root");
  gen->add_option("--branching", branching, "Children per internal label");
  gen->add_option("--docs", corpus.n_docs, "Documents in total");
  gen->add_option("--vocab", corpus.vocab, "Vocabulary size");
  gen->add_option("--train-size", train_size, "Documents written to train.jsonl; the rest go to dev.jsonl");

  TrainArgs targs;
  auto* trn = app.add_subcommand("train", "Train the model and write report, checkpoint, tree and predictions");
  trn->add_option("--config", targs.config, "JSON config");
  trn->add_option("--hierarchy", targs.hierarchy, "Taxonomy file (default: built-in synthetic data)");
  trn->add_option("--train", targs.train, "Training JSONL");
  trn->add_option("--dev", targs.dev, "Dev JSONL");
  trn->add_option("--out", targs.out, "Output directory");
  trn->add_option("--seed", targs.seed, "Override the config seed");
  trn->add_option("--data-seed", targs.data_seed, "Seed of the built-in synthetic data");

  std::vector<std::uint32_t> heights{2, 3, 4, 5};
  TrainArgs sargs;
  auto* sweep = app.add_subcommand("sweep", "Train once per coding tree height and report dev F1");
  sweep->add_option("--config", sargs.config, "JSON config");
  sweep->add_option("--hierarchy", sargs.hierarchy, "Taxonomy file (default: built-in synthetic data)");
  sweep->add_option("--train", sargs.train, "Training JSONL");
  sweep->add_option("--dev", sargs.dev, "Dev JSONL");
  sweep->add_option("--heights", heights, "Heights to try")->delimiter(',');
  sweep->add_option("--seed", sargs.seed, "Override the config seed");
  sweep->add_option("--data-seed", sargs.data_seed, "Seed of the built-in synthetic data");

  std::size_t label_count = 0;
  auto* eval = app.add_subcommand("eval", "Micro and macro F1 of predictions against gold labels");
  eval->add_option("--pred", pred_path, "Predictions JSONL")->required();
  eval->add_option("--gold", gold_path, "Gold JSONL")->required();
  eval->add_option("--label-count", label_count, "Number of labels (default: largest id seen + 1)");

  CLI11_PARSE(app, argc, argv);

  try {
    init_logging();
    if (*entropy) {
      auto graph = std::make_shared<const Graph>(load_edge_list(graph_path));
      auto tree = tree_from_json(graph, read_text(tree_path));
      std::cout << fixed4(tree.entropy()) << '\n';
    } else if (*build) {
      auto graph = std::make_shared<const Graph>(load_edge_list(graph_path));
      auto tree = build_coding_tree(graph, height);
      const auto json = tree_to_json(tree);
      if (out_path.empty()) {
        std::cout << json;
      } else {
        write_text(out_path, json);
      }
      if (report_entropy) std::cout << fixed4(tree.entropy()) << '\n';
    } else if (*oracle) {
      auto graph = std::make_shared<const Graph>(load_edge_list(graph_path));
      const auto best = oracle_min_entropy(graph, height);
      const auto greedy = build_coding_tree(graph, height);
      std::cout << "optimal " << fixed4(best.entropy) << '\n';
      std::cout << "greedy " << fixed4(greedy.entropy()) << '\n';
      std::cout << "gap " << fixed4(greedy.entropy() - best.entropy) << '\n';
    } else if (*gen) {
      if (seed < 0) throw Error("--seed must be non-negative");
      corpus.seed = static_cast<std::uint64_t>(seed);
      if (train_size > corpus.n_docs) throw Error("--train-size exceeds --docs");
      const auto h = gen_hierarchy(depth, branching, corpus.seed);
      auto docs = gen_corpus(h, corpus);
      Dataset dev(docs.begin() + static_cast<std::ptrdiff_t>(train_size), docs.end());
      docs.resize(train_size);
      const fs::path dir = data_dir;
      fs::create_directories(dir);
      write_text(dir / "hierarchy.tsv", h.to_taxonomy());
      save_dataset(dir / "train.jsonl", docs);
      save_dataset(dir / "dev.jsonl", dev);
      std::cout << "labels " << h.size() << "\ntrain " << docs.size() << "\ndev " << dev.size() << '\n';
    } else if (*trn) {
      run_train(targs);
    } else if (*sweep) {
      const TrainConfig cfg = training_config(sargs);
      const SyntheticData data = training_data(sargs);
      if (data.dev.empty()) throw Error("sweep needs a dev set");
      for (const auto& p : sweep_heights(cfg, data.hierarchy, data.train, data.dev, heights)) {
        std::cout << "K " << p.K << " entropy " << fixed4(p.tree_entropy) << " micro_f1 " << fixed4(p.dev.micro_f1)
                  << " macro_f1 " << fixed4(p.dev.macro_f1) << '\n';
      }
    } else if (*eval) {
      const auto preds = label_sets(load_dataset(pred_path));
      const auto golds = label_sets(load_dataset(gold_path));
      if (label_count == 0) {
        for (const auto* sets : {&preds, &golds}) {
          for (const auto& s : *sets) {
            for (auto y : s) label_count = std::max<std::size_t>(label_count, y + 1);
          }
        }
      }
      std::cout << "micro_f1 " << fixed4(micro_f1(preds, golds)) << '\n';
      std::cout << "macro_f1 " << fixed4(macro_f1(preds, golds, label_count)) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
