#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hill/graph.hpp"

namespace hill {

using LabelId = std::uint32_t;
using TokenId = std::uint32_t;

/// Single-parent rooted taxonomy. Label 0 is the root; ids follow BFS order
/// with children in listed order.
class LabelHierarchy {
 public:
  LabelHierarchy(std::vector<std::string> names, std::vector<std::int64_t> parents);

  std::size_t size() const { return names_.size(); }
  LabelId root() const { return 0; }
  const std::string& name(LabelId id) const { return names_.at(id); }
  /// -1 for the root.
  std::int64_t parent(LabelId id) const { return parents_.at(id); }
  std::uint32_t depth(LabelId id) const { return depths_.at(id); }
  std::uint32_t max_depth() const;
  const std::vector<LabelId>& children(LabelId id) const { return children_.at(id); }
  std::vector<LabelId> leaves() const;

  /// Labels on the path from the root's child down to `id` (root excluded).
  std::vector<LabelId> path_to(LabelId id) const;

  /// Every label's parent is in the set, or is the root. Also rejects
  /// unknown ids.
  bool is_parent_closed(const std::vector<LabelId>& labels) const;

  /// Undirected parent-child edges; one vertex per label, root included.
  Graph to_graph() const;

  /// Taxonomy text: one line per internal label, "parent\tchild1\tchild2...".
  std::string to_taxonomy() const;
  static LabelHierarchy parse_taxonomy(std::string_view text);
  static LabelHierarchy load(const std::filesystem::path& path);

  bool operator==(const LabelHierarchy&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<std::int64_t> parents_;
  std::vector<std::uint32_t> depths_;
  std::vector<std::vector<LabelId>> children_;
};

struct Example {
  std::vector<TokenId> tokens;
  std::vector<LabelId> labels;  // ascending

  bool operator==(const Example&) const = default;
};

using Dataset = std::vector<Example>;

/// Complete `branching`-ary tree with `depth` levels below the root. The shape
/// is fully determined by the two sizes; `seed` only has to be reproducible.
LabelHierarchy gen_hierarchy(std::uint32_t depth, std::uint32_t branching, std::uint64_t seed);

struct CorpusParams {
  std::size_t n_docs = 2500;
  std::size_t vocab = 2000;
  std::uint64_t seed = 42;
  std::size_t min_tokens = 20;
  std::size_t max_tokens = 40;
  /// Probability that a token is drawn from the words of a label on the
  /// document's path rather than uniformly from the vocabulary.
  double signal = 0.5;
  std::size_t words_per_label = 4;
};

/// Each document picks a leaf uniformly, labels itself with the root-to-leaf
/// path (root excluded) and mixes label words with uniform noise. Label j owns
/// the words [(j - 1) * w, j * w).
Dataset gen_corpus(const LabelHierarchy& h, const CorpusParams& params);

struct SyntheticData {
  LabelHierarchy hierarchy;
  Dataset train;
  Dataset dev;
};

/// Depth-3 branching-4 hierarchy with one 2,500-document corpus split into
/// the first 2,000 documents for training and the last 500 for dev.
SyntheticData default_synthetic(std::uint64_t seed = 42);

/// JSON lines: {"tokens":[...],"labels":[...]}.
std::string dataset_to_jsonl(const Dataset& data);
Dataset dataset_from_jsonl(std::string_view text);
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, const Dataset& data);

}  // namespace hill
