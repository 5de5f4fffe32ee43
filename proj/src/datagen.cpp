#include "hill/datagen.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "hill/error.hpp"

namespace hill {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

LabelHierarchy::LabelHierarchy(std::vector<std::string> names, std::vector<std::int64_t> parents)
    : names_(std::move(names)), parents_(std::move(parents)) {
  const auto n = names_.size();
  if (n == 0) throw Error("label hierarchy is empty");
  if (parents_.size() != n) throw Error("label hierarchy: names and parents differ in length");
  if (parents_[0] != -1) throw Error("label hierarchy: label 0 must be the root");
  depths_.assign(n, 0);
  children_.assign(n, {});
  for (std::size_t i = 1; i < n; ++i) {
    const auto p = parents_[i];
    // BFS numbering puts every parent before its children, which also rules
    // out cycles and second roots.
    if (p < 0 || static_cast<std::size_t>(p) >= i) {
      throw Error("label hierarchy: label " + names_[i] + " has an invalid parent");
    }
    depths_[i] = depths_[p] + 1;
    children_[p].push_back(static_cast<LabelId>(i));
  }
}

std::uint32_t LabelHierarchy::max_depth() const { return *std::max_element(depths_.begin(), depths_.end()); }

std::vector<LabelId> LabelHierarchy::leaves() const {
  std::vector<LabelId> out;
  for (LabelId i = 0; i < size(); ++i) {
    if (children_[i].empty()) out.push_back(i);
  }
  return out;
}

std::vector<LabelId> LabelHierarchy::path_to(LabelId id) const {
  std::vector<LabelId> path;
  for (auto v = static_cast<std::int64_t>(id); v > 0; v = parents_.at(v)) path.push_back(static_cast<LabelId>(v));
  std::reverse(path.begin(), path.end());
  return path;
}

bool LabelHierarchy::is_parent_closed(const std::vector<LabelId>& labels) const {
  std::vector<char> in(size(), 0);
  for (auto l : labels) {
    if (l >= size()) return false;
    in[l] = 1;
  }
  for (auto l : labels) {
    const auto p = parents_[l];
    if (p > 0 && !in[p]) return false;
  }
  return true;
}

Graph LabelHierarchy::to_graph() const {
  if (size() < 2) throw Error("label hierarchy needs at least one edge to form a graph");
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < size(); ++i) edges.emplace_back(static_cast<Vertex>(parents_[i]), static_cast<Vertex>(i));
  return Graph(size(), edges);
}

std::string LabelHierarchy::to_taxonomy() const {
  std::string out;
  for (LabelId i = 0; i < size(); ++i) {
    if (children_[i].empty()) continue;
    out += names_[i];
    for (auto c : children_[i]) {
      out += '\t';
      out += names_[c];
    }
    out += '\n';
  }
  return out;
}

LabelHierarchy LabelHierarchy::parse_taxonomy(std::string_view text) {
  std::map<std::string, std::vector<std::string>> kids;
  std::map<std::string, std::string> parent_of;
  std::vector<std::string> order;  // first-seen order of parents
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() < 2 || std::any_of(fields.begin(), fields.end(), [](auto& f) { return f.empty(); })) {
      throw Error("taxonomy line " + std::to_string(line_no) + ": expected parent<TAB>child...");
    }
    const auto& parent = fields[0];
    if (kids.count(parent)) throw Error("taxonomy line " + std::to_string(line_no) + ": parent " + parent + " listed twice");
    order.push_back(parent);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      if (fields[i] == parent || parent_of.count(fields[i])) {
        throw Error("taxonomy line " + std::to_string(line_no) + ": label " + fields[i] + " has more than one parent");
      }
      parent_of[fields[i]] = parent;
    }
    kids[parent].assign(fields.begin() + 1, fields.end());
  }
  std::vector<std::string> roots;
  for (const auto& p : order) {
    if (!parent_of.count(p)) roots.push_back(p);
  }
  if (roots.size() != 1) throw Error("taxonomy must have exactly one root, found " + std::to_string(roots.size()));

  std::vector<std::string> names{roots[0]};
  std::vector<std::int64_t> parents{-1};
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto it = kids.find(names[i]);
    if (it == kids.end()) continue;
    for (const auto& c : it->second) {
      names.push_back(c);
      parents.push_back(static_cast<std::int64_t>(i));
    }
  }
  if (names.size() != parent_of.size() + 1) throw Error("taxonomy contains a cycle or a detached subtree");
  return LabelHierarchy(std::move(names), std::move(parents));
}

LabelHierarchy LabelHierarchy::load(const std::filesystem::path& path) { return parse_taxonomy(read_file(path)); }

LabelHierarchy gen_hierarchy(std::uint32_t depth, std::uint32_t branching, std::uint64_t seed) {
  if (depth < 2) throw Error("hierarchy depth must be at least 2, got " + std::to_string(depth));
  if (branching < 2) throw Error("hierarchy branching must be at least 2, got " + std::to_string(branching));
  (void)seed;
  std::vector<std::string> names{"root"};
  std::vector<std::int64_t> parents{-1};
  std::size_t level_begin = 0, level_end = 1;
  for (std::uint32_t d = 0; d < depth; ++d) {
    for (std::size_t p = level_begin; p < level_end; ++p) {
      for (std::uint32_t c = 0; c < branching; ++c) {
        names.push_back("L" + std::to_string(names.size()));
        parents.push_back(static_cast<std::int64_t>(p));
      }
    }
    level_begin = level_end;
    level_end = names.size();
  }
  return LabelHierarchy(std::move(names), std::move(parents));
}

Dataset gen_corpus(const LabelHierarchy& h, const CorpusParams& params) {
  if (h.size() < 2) throw Error("cannot generate a corpus for an empty hierarchy");
  if (params.n_docs == 0) throw Error("corpus needs at least one document");
  if (params.min_tokens == 0 || params.min_tokens > params.max_tokens) throw Error("invalid document length range");
  if (params.words_per_label == 0) throw Error("words_per_label must be positive");
  if ((h.size() - 1) * params.words_per_label > params.vocab) {
    throw Error("vocabulary of " + std::to_string(params.vocab) + " is too small for " +
                std::to_string(h.size() - 1) + " labels");
  }
  if (params.signal < 0.0 || params.signal > 1.0) throw Error("signal must lie in [0, 1]");

  std::mt19937_64 rng(params.seed);
  const auto leaves = h.leaves();
  std::uniform_int_distribution<std::size_t> pick_leaf(0, leaves.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_len(params.min_tokens, params.max_tokens);
  std::uniform_int_distribution<TokenId> pick_noise(0, static_cast<TokenId>(params.vocab - 1));
  std::uniform_int_distribution<std::size_t> pick_word(0, params.words_per_label - 1);
  std::bernoulli_distribution is_signal(params.signal);

  Dataset data;
  data.reserve(params.n_docs);
  for (std::size_t d = 0; d < params.n_docs; ++d) {
    Example ex;
    ex.labels = h.path_to(leaves[pick_leaf(rng)]);
    std::uniform_int_distribution<std::size_t> pick_label(0, ex.labels.size() - 1);
    const auto len = pick_len(rng);
    ex.tokens.reserve(len);
    for (std::size_t t = 0; t < len; ++t) {
      if (is_signal(rng)) {
        const auto label = ex.labels[pick_label(rng)];
        ex.tokens.push_back(static_cast<TokenId>((label - 1) * params.words_per_label + pick_word(rng)));
      } else {
        ex.tokens.push_back(pick_noise(rng));
      }
    }
    std::sort(ex.labels.begin(), ex.labels.end());
    data.push_back(std::move(ex));
  }
  return data;
}

SyntheticData default_synthetic(std::uint64_t seed) {
  auto h = gen_hierarchy(3, 4, seed);
  CorpusParams params;
  params.seed = seed;
  Dataset all = gen_corpus(h, params);
  Dataset dev(all.begin() + 2000, all.end());
  all.resize(2000);
  return {std::move(h), std::move(all), std::move(dev)};
}

std::string dataset_to_jsonl(const Dataset& data) {
  std::string out;
  for (const auto& ex : data) {
    nlohmann::ordered_json row;
    row["tokens"] = ex.tokens;
    row["labels"] = ex.labels;
    out += row.dump();
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::uint32_t> ids(const nlohmann::json& arr, const char* what) {
  std::vector<std::uint32_t> out;
  for (const auto& v : arr.get<std::vector<nlohmann::json>>()) {
    if (!v.is_number_unsigned() || v.get<std::uint64_t>() > std::numeric_limits<std::uint32_t>::max()) {
      throw Error(std::string(what) + " ids must be non-negative 32-bit integers, got " + v.dump());
    }
    out.push_back(v.get<std::uint32_t>());
  }
  return out;
}

}  // namespace

Dataset dataset_from_jsonl(std::string_view text) {
  Dataset data;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto row = nlohmann::json::parse(line);
      Example ex;
      if (row.contains("tokens")) ex.tokens = ids(row.at("tokens"), "token");
      ex.labels = ids(row.at("labels"), "label");
      std::sort(ex.labels.begin(), ex.labels.end());
      ex.labels.erase(std::unique(ex.labels.begin(), ex.labels.end()), ex.labels.end());
      data.push_back(std::move(ex));
    } catch (const nlohmann::json::exception& e) {
      throw Error("dataset line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return data;
}

Dataset load_dataset(const std::filesystem::path& path) { return dataset_from_jsonl(read_file(path)); }

void save_dataset(const std::filesystem::path& path, const Dataset& data) { write_file(path, dataset_to_jsonl(data)); }

}  // namespace hill
