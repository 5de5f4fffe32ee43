#include "hill/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "hill/error.hpp"

namespace hill {

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

GradCheckResult check_gradient(const std::function<double()>& loss, Tensor& param, const Tensor& analytic,
                               std::span<const std::size_t> indices, const GradCheckOptions& options) {
  if (!param.same_shape(analytic)) {
    throw Error("check_gradient: analytic gradient " + analytic.shape() + " vs parameter " + param.shape());
  }
  GradCheckResult result;
  const std::uint64_t base_signature = options.branch_signature ? options.branch_signature() : 0;
  for (std::size_t idx : indices) {
    if (idx >= param.size()) throw Error("check_gradient: index out of range");
    const double saved = param[idx];
    param[idx] = saved + options.step;
    const double plus = loss();
    const bool plus_same = !options.branch_signature || options.branch_signature() == base_signature;
    param[idx] = saved - options.step;
    const double minus = loss();
    const bool minus_same = !options.branch_signature || options.branch_signature() == base_signature;
    param[idx] = saved;
    if (!plus_same || !minus_same) {
      ++result.skipped;
      continue;
    }
    const double numeric = (plus - minus) / (2.0 * options.step);
    const double err = relative_error(analytic[idx], numeric, options.floor);
    ++result.checked;
    if (err >= result.max_rel_error) {
      result.max_rel_error = err;
      result.worst_index = idx;
      result.worst_analytic = analytic[idx];
      result.worst_numeric = numeric;
    }
  }
  if (options.branch_signature) options.branch_signature();  // leave caches at the base point
  return result;
}

}  // namespace hill
