#pragma once

#include <cstddef>

#include "hmfmd/matrix.hpp"
#include "hmfmd/rng.hpp"

namespace hmfmd {

enum class InitScheme { uniform_scaled, zeros };

/// rows x cols tensor. uniform_scaled draws U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Matrix seeded_init(std::size_t rows, std::size_t cols, InitScheme scheme, std::size_t fan_in,
                   RngStream& rng);

}  // namespace hmfmd
