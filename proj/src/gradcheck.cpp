#include "hmfmd/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "hmfmd/errors.hpp"

namespace hmfmd {

double finite_diff_gradcheck(const std::function<double()>& loss_fn,
                             std::span<Matrix* const> params,
                             std::span<const Matrix* const> analytic, double eps) {
  if (eps < 1e-6 || eps > 1e-4) throw InvalidInput("gradcheck: eps must lie in [1e-6, 1e-4]");
  if (params.size() != analytic.size()) throw InvalidInput("gradcheck: tensor count mismatch");
  double worst = 0.0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    Matrix& p = *params[t];
    const Matrix& a = *analytic[t];
    require_same_shape(p, a, "gradcheck");
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p[i];
      p[i] = saved + eps;
      const double up = loss_fn();
      p[i] = saved - eps;
      const double down = loss_fn();
      p[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw NumericalError("gradcheck: non-finite loss");
      }
      const double numeric = (up - down) / (2.0 * eps);
      const double denom = std::max(1e-8, std::abs(a[i]) + std::abs(numeric));
      worst = std::max(worst, std::abs(a[i] - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace hmfmd
