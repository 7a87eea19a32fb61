#include "hmfmd/dropout.hpp"

#include "hmfmd/errors.hpp"

namespace hmfmd {

Matrix dropout_mask(std::size_t rows, std::size_t cols, double p, bool training, RngStream& rng) {
  if (p < 0.0 || p >= 1.0) throw InvalidInput("dropout rate must lie in [0, 1)");
  if (!training || p == 0.0) return {};
  Matrix mask(rows, cols);
  const double keep = 1.0 / (1.0 - p);
  for (double& v : mask.values()) v = rng.uniform() < p ? 0.0 : keep;
  return mask;
}

void apply_mask(Matrix& m, const Matrix& mask) {
  if (mask.empty()) return;
  require_same_shape(m, mask, "dropout mask");
  for (std::size_t i = 0; i < m.size(); ++i) m[i] *= mask[i];
}

}  // namespace hmfmd
