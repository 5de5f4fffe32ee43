#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hill/tensor.hpp"

namespace hill {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::int64_t step = 0;
};

struct ParamSlot {
  Tensor* value;
  const Tensor* grad;
  double lr;
};

/// One bias-corrected Adam update over every slot. Moments are sized on the
/// first call. Throws before touching anything if a gradient is non-finite
/// or the slot layout changed between calls.
void adam_step(std::span<const ParamSlot> params, AdamState& state, const AdamConfig& config = {});

}  // namespace hill
