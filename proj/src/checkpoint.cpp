#include "hill/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hill/error.hpp"

namespace hill {

std::string checkpoint_to_json(const std::vector<NamedTensor>& tensors) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& [name, value] : tensors) {
    if (doc.contains(name)) throw Error("checkpoint: duplicate tensor name " + name);
    nlohmann::ordered_json entry;
    entry["shape"] = {value.rows(), value.cols()};
    entry["values"] = std::vector<double>(value.data().begin(), value.data().end());
    doc[name] = std::move(entry);
  }
  return doc.dump() + "\n";
}

std::vector<NamedTensor> checkpoint_from_json(std::string_view json) {
  std::vector<NamedTensor> out;
  try {
    const auto doc = nlohmann::ordered_json::parse(json);
    if (!doc.is_object()) throw Error("checkpoint: expected a JSON object");
    for (const auto& [name, entry] : doc.items()) {
      const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
      if (shape.size() != 2) throw Error("checkpoint: tensor " + name + " needs a 2-D shape");
      out.push_back({name, Tensor(shape[0], shape[1], entry.at("values").get<std::vector<double>>())});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("checkpoint: ") + e.what());
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(tensors);
}

std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_json(buf.str());
}

}  // namespace hill
