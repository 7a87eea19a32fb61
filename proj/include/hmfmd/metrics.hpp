#pragma once

#include <span>
#include <vector>

namespace hmfmd {

struct ScoredLabels {
  std::vector<double> scores;
  std::vector<int> labels;
};

/// Area under the ROC curve as the Mann-Whitney statistic: the fraction of
/// (positive, negative) pairs where the positive scores higher, ties counted
/// as one half. O(N log N). Throws EvaluationError unless both classes occur.
double roc_auc(std::span<const double> scores, std::span<const int> labels);
double roc_auc(const ScoredLabels& sl);

/// Literal double loop over all positive-negative pairs. Reference for roc_auc.
double auc_pairwise_oracle(std::span<const double> scores, std::span<const int> labels);
double auc_pairwise_oracle(const ScoredLabels& sl);

/// Mean of a loss history.
double mean(std::span<const double> values);

}  // namespace hmfmd
