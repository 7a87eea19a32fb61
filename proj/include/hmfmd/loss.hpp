#pragma once

#include <span>
#include <vector>

namespace hmfmd {

/// Predictions are clamped to [eps, 1 - eps] before taking logarithms.
inline constexpr double kProbClamp = 1e-7;

/// (1/N) sum_n -w_n [y_n log p_n + (1 - y_n) log(1 - p_n)], y_n the ground truth.
double weighted_bce_loss(std::span<const double> preds, std::span<const int> labels,
                         std::span<const double> weights);

/// Gradient of weighted_bce_loss with respect to each prediction. Zero where
/// the clamp is active.
std::vector<double> weighted_bce_grad(std::span<const double> preds, std::span<const int> labels,
                                      std::span<const double> weights);

}  // namespace hmfmd
