#include "hmfmd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hmfmd/errors.hpp"

namespace hmfmd {

namespace {

// Returns (n_pos, n_neg) after validating the pair of lists.
std::pair<std::size_t, std::size_t> class_counts(std::span<const double> scores,
                                                 std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw InvalidInput("auc: " + std::to_string(scores.size()) + " scores vs " +
                       std::to_string(labels.size()) + " labels");
  }
  std::size_t pos = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw InvalidInput("auc: labels must be 0 or 1");
    if (std::isnan(scores[i])) throw InvalidInput("auc: NaN score");
    pos += static_cast<std::size_t>(labels[i]);
  }
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) {
    throw EvaluationError("auc undefined: need both classes (positives " + std::to_string(pos) +
                          ", negatives " + std::to_string(neg) + ")");
  }
  return {pos, neg};
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  const auto [n_pos, n_neg] = class_counts(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the pair credit, kept integral so the result is exact.
  std::size_t twice_credit = 0;
  std::size_t neg_below = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t pos = 0, neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? pos : neg) += 1;
      ++j;
    }
    twice_credit += 2 * pos * neg_below + pos * neg;
    neg_below += neg;
    i = j;
  }
  return static_cast<double>(twice_credit) / (2.0 * static_cast<double>(n_pos) *
                                              static_cast<double>(n_neg));
}

double roc_auc(const ScoredLabels& sl) { return roc_auc(sl.scores, sl.labels); }

double auc_pairwise_oracle(std::span<const double> scores, std::span<const int> labels) {
  const auto [n_pos, n_neg] = class_counts(scores, labels);
  double credit = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      if (scores[i] > scores[j]) {
        credit += 1.0;
      } else if (scores[i] == scores[j]) {
        credit += 0.5;
      }
    }
  }
  return credit / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auc_pairwise_oracle(const ScoredLabels& sl) { return auc_pairwise_oracle(sl.scores, sl.labels); }

double mean(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("mean: empty input");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace hmfmd
