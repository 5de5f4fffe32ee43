#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include "hill/tensor.hpp"

namespace hill {

/// |a - n| / max(|a|, |n|, floor). The floor keeps gradients that are zero
/// up to rounding from reporting huge relative errors.
double relative_error(double analytic, double numeric, double floor = 1e-8);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  /// Samples dropped because the probe crossed a non-differentiable point.
  std::size_t skipped = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

struct GradCheckOptions {
  double step = 1e-5;
  double floor = 1e-8;
  /// Optional fingerprint of every piecewise branch (ReLU masks, clamps)
  /// taken by the current forward pass. When set, a sample whose +/- probes
  /// change the fingerprint is skipped: central differences are meaningless
  /// across a kink.
  std::function<std::uint64_t()> branch_signature;
};

/// Central finite differences of `loss` with respect to the selected entries
/// of `param`, compared against `analytic` (same shape as param). `param` is
/// restored exactly after each probe.
GradCheckResult check_gradient(const std::function<double()>& loss, Tensor& param, const Tensor& analytic,
                               std::span<const std::size_t> indices, const GradCheckOptions& options = {});

}  // namespace hill
