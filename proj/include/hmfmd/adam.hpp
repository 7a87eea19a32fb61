#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hmfmd/matrix.hpp"

namespace hmfmd {

struct AdamState {
  std::size_t step = 0;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Zero moments shaped like `params`.
AdamState make_adam_state(std::span<const Matrix* const> params, double lr = 0.001,
                          double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

/// One bias-corrected Adam update in place.
void adam_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads,
               AdamState& state);

}  // namespace hmfmd
