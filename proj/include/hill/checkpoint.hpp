#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hill/tensor.hpp"

namespace hill {

struct NamedTensor {
  std::string name;
  Tensor value;
};

/// JSON object name -> {"shape": [rows, cols], "values": [...]}, keys in the
/// given order. Doubles are printed in shortest round-trip form, so loading
/// returns bit-identical values.
std::string checkpoint_to_json(const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> checkpoint_from_json(std::string_view json);

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path);

}  // namespace hill
