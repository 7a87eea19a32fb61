#pragma once

#include <functional>
#include <span>

#include "hmfmd/matrix.hpp"

namespace hmfmd {

/// Compares analytic gradients against central differences
/// (f(theta + eps) - f(theta - eps)) / (2 eps), one coordinate at a time.
///
/// `loss_fn` must read the current values of `params` (they are perturbed in
/// place and restored). Returns max |a - n| / max(1e-8, |a| + |n|).
double finite_diff_gradcheck(const std::function<double()>& loss_fn,
                             std::span<Matrix* const> params,
                             std::span<const Matrix* const> analytic, double eps = 1e-5);

}  // namespace hmfmd
