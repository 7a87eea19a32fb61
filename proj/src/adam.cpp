#include "hmfmd/adam.hpp"

#include <cmath>
#include <string>

#include "hmfmd/errors.hpp"

namespace hmfmd {

AdamState make_adam_state(std::span<const Matrix* const> params, double lr, double beta1,
                          double beta2, double eps) {
  AdamState s;
  s.lr = lr;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.eps = eps;
  for (const Matrix* p : params) {
    s.first_moment.emplace_back(p->rows(), p->cols());
    s.second_moment.emplace_back(p->rows(), p->cols());
  }
  return s;
}

void adam_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads,
               AdamState& s) {
  if (params.size() != grads.size() || params.size() != s.first_moment.size() ||
      params.size() != s.second_moment.size()) {
    throw InvalidInput("adam_step: tensor count mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->same_shape(*grads[i]) || !params[i]->same_shape(s.first_moment[i])) {
      throw InvalidInput("adam_step: shape mismatch at tensor " + std::to_string(i));
    }
  }
  ++s.step;
  const double t = static_cast<double>(s.step);
  const double c1 = 1.0 - std::pow(s.beta1, t);
  const double c2 = 1.0 - std::pow(s.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    double* p = params[i]->data();
    const double* g = grads[i]->data();
    double* m = s.first_moment[i].data();
    double* v = s.second_moment[i].data();
    for (std::size_t j = 0; j < params[i]->size(); ++j) {
      m[j] = s.beta1 * m[j] + (1.0 - s.beta1) * g[j];
      v[j] = s.beta2 * v[j] + (1.0 - s.beta2) * g[j] * g[j];
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      p[j] -= s.lr * m_hat / (std::sqrt(v_hat) + s.eps);
    }
  }
}

}  // namespace hmfmd
