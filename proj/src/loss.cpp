#include "hmfmd/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hmfmd/errors.hpp"

namespace hmfmd {

namespace {

void validate(std::span<const double> preds, std::span<const int> labels,
              std::span<const double> weights) {
  if (preds.empty()) throw InvalidInput("weighted_bce_loss: empty input");
  if (preds.size() != labels.size() || preds.size() != weights.size()) {
    throw InvalidInput("weighted_bce_loss: length mismatch (" + std::to_string(preds.size()) +
                       ", " + std::to_string(labels.size()) + ", " +
                       std::to_string(weights.size()) + ")");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw InvalidInput("weighted_bce_loss: label " + std::to_string(labels[i]) +
                         " at index " + std::to_string(i) + " not in {0,1}");
    }
  }
}

}  // namespace

double weighted_bce_loss(std::span<const double> preds, std::span<const int> labels,
                         std::span<const double> weights) {
  validate(preds, labels, weights);
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (weights[i] == 0.0) continue;
    const double p = std::clamp(preds[i], kProbClamp, 1.0 - kProbClamp);
    const double term = labels[i] == 1 ? std::log(p) : std::log(1.0 - p);
    total -= weights[i] * term;
  }
  const double loss = total / static_cast<double>(preds.size());
  if (!std::isfinite(loss)) throw NumericalError("weighted_bce_loss: non-finite loss");
  return loss;
}

std::vector<double> weighted_bce_grad(std::span<const double> preds, std::span<const int> labels,
                                      std::span<const double> weights) {
  validate(preds, labels, weights);
  const double inv_n = 1.0 / static_cast<double>(preds.size());
  std::vector<double> grad(preds.size(), 0.0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double p = preds[i];
    if (p < kProbClamp || p > 1.0 - kProbClamp) continue;
    grad[i] = labels[i] == 1 ? -weights[i] * inv_n / p : weights[i] * inv_n / (1.0 - p);
  }
  return grad;
}

}  // namespace hmfmd
