#include "hmfmd/init.hpp"

#include <cmath>

#include "hmfmd/errors.hpp"

namespace hmfmd {

Matrix seeded_init(std::size_t rows, std::size_t cols, InitScheme scheme, std::size_t fan_in,
                   RngStream& rng) {
  if (fan_in == 0) throw InvalidInput("seeded_init: fan_in must be positive");
  Matrix m(rows, cols);
  if (scheme == InitScheme::zeros) return m;
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& v : m.values()) v = rng.uniform(-bound, bound);
  return m;
}

}  // namespace hmfmd
