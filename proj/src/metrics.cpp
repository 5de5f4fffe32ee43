#include "hill/metrics.hpp"

#include <algorithm>
#include <string>

#include "hill/error.hpp"

namespace hill {

namespace {

struct Counts {
  std::int64_t tp = 0, fp = 0, fn = 0;
};

double f1(const Counts& c) {
  if (c.tp == 0) return 0.0;
  const double precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  const double recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  return 2.0 * precision * recall / (precision + recall);
}

LabelSet normalized(const LabelSet& s) {
  LabelSet out = s;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Walks two sorted sets, reporting each label as tp / fp / fn.
template <class F>
void classify(const LabelSet& pred, const LabelSet& gold, F&& on) {
  std::size_t i = 0, j = 0;
  while (i < pred.size() || j < gold.size()) {
    if (j == gold.size() || (i < pred.size() && pred[i] < gold[j])) {
      on(pred[i++], 1);  // fp
    } else if (i == pred.size() || gold[j] < pred[i]) {
      on(gold[j++], 2);  // fn
    } else {
      on(pred[i], 0);  // tp
      ++i;
      ++j;
    }
  }
}

void require_same_length(const std::vector<LabelSet>& preds, const std::vector<LabelSet>& golds) {
  if (preds.size() != golds.size()) {
    throw Error("prediction count " + std::to_string(preds.size()) + " does not match gold count " +
                std::to_string(golds.size()));
  }
}

}  // namespace

double micro_f1(const std::vector<LabelSet>& preds, const std::vector<LabelSet>& golds) {
  require_same_length(preds, golds);
  Counts c;
  for (std::size_t n = 0; n < preds.size(); ++n) {
    classify(normalized(preds[n]), normalized(golds[n]), [&c](std::uint32_t, int kind) {
      (kind == 0 ? c.tp : kind == 1 ? c.fp : c.fn) += 1;
    });
  }
  return f1(c);
}

double macro_f1(const std::vector<LabelSet>& preds, const std::vector<LabelSet>& golds, std::size_t label_count) {
  require_same_length(preds, golds);
  if (label_count == 0) throw Error("macro_f1 needs at least one label");
  std::vector<Counts> per(label_count);
  for (std::size_t n = 0; n < preds.size(); ++n) {
    classify(normalized(preds[n]), normalized(golds[n]), [&](std::uint32_t label, int kind) {
      if (label >= label_count) {
        throw Error("label " + std::to_string(label) + " outside [0, " + std::to_string(label_count) + ")");
      }
      auto& c = per[label];
      (kind == 0 ? c.tp : kind == 1 ? c.fp : c.fn) += 1;
    });
  }
  double sum = 0.0;
  for (const auto& c : per) sum += f1(c);
  return sum / static_cast<double>(label_count);
}

}  // namespace hill
