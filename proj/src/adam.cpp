#include "hill/adam.hpp"

#include <cmath>

#include "hill/error.hpp"

namespace hill {

void adam_step(std::span<const ParamSlot> params, AdamState& state, const AdamConfig& config) {
  for (const auto& p : params) {
    if (!p.value->same_shape(*p.grad)) {
      throw Error("adam: gradient " + p.grad->shape() + " does not match parameter " + p.value->shape());
    }
    require_finite(*p.grad, "adam gradient");
  }
  if (state.step == 0) {
    state.m.clear();
    state.v.clear();
    for (const auto& p : params) {
      state.m.emplace_back(p.value->rows(), p.value->cols());
      state.v.emplace_back(p.value->rows(), p.value->cols());
    }
  } else if (state.m.size() != params.size()) {
    throw Error("adam: parameter count changed between steps");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!state.m[i].same_shape(*params[i].value)) throw Error("adam: parameter shape changed between steps");
  }

  ++state.step;
  const auto t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& value = *params[i].value;
    const auto& grad = *params[i].grad;
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < value.size(); ++j) {
      const double g = grad[j];
      m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * g;
      v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * g * g;
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      value[j] -= params[i].lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

}  // namespace hill
