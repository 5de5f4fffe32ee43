#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace hill {

using LabelSet = std::vector<std::uint32_t>;

/// F1 of pooled true/false positives and negatives over all labels and
/// instances; 0 when precision and recall are both 0.
double micro_f1(const std::vector<LabelSet>& preds, const std::vector<LabelSet>& golds);

/// Unweighted mean of per-label F1 over all `label_count` labels. A label
/// with no true positive (including one absent from both sides) scores 0.
double macro_f1(const std::vector<LabelSet>& preds, const std::vector<LabelSet>& golds,
                std::size_t label_count);

}  // namespace hill
