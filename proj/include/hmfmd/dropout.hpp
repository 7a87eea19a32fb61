#pragma once

#include "hmfmd/matrix.hpp"
#include "hmfmd/rng.hpp"

namespace hmfmd {

/// Inverted-dropout mask (entries 0 or 1/(1-p)). Returns an empty matrix when
/// dropout is inactive, which apply_mask treats as identity.
Matrix dropout_mask(std::size_t rows, std::size_t cols, double p, bool training, RngStream& rng);

void apply_mask(Matrix& m, const Matrix& mask);

}  // namespace hmfmd
