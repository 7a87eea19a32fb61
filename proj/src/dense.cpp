#include "hmfmd/dense.hpp"

#include <cmath>

#include "hmfmd/dropout.hpp"
#include "hmfmd/errors.hpp"
#include "hmfmd/init.hpp"

namespace hmfmd {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

DenseHeadParams init_dense_head(std::size_t in_dim, RngStream& rng) {
  DenseHeadParams p;
  p.w = seeded_init(1, in_dim, InitScheme::uniform_scaled, in_dim, rng);
  p.b = seeded_init(1, 1, InitScheme::uniform_scaled, in_dim, rng);
  return p;
}

double dense_sigmoid_head(std::span<const double> h, const DenseHeadParams& p, double dropout_p,
                          bool training, RngStream* rng, DenseTrace* trace) {
  if (h.size() != p.in_dim()) {
    throw ShapeError("dense head: input size " + std::to_string(h.size()) + " != " +
                     std::to_string(p.in_dim()));
  }
  DenseTrace local;
  DenseTrace& t = trace ? *trace : local;
  t.input.assign(h.begin(), h.end());
  if (training && dropout_p > 0.0) {
    if (!rng) throw InvalidInput("dense head: dropout requires an rng");
    t.mask = dropout_mask(1, h.size(), dropout_p, training, *rng);
    for (std::size_t i = 0; i < h.size(); ++i) t.input[i] *= t.mask[i];
  } else {
    t.mask = Matrix();
  }
  double z = p.b[0];
  for (std::size_t i = 0; i < h.size(); ++i) z += p.w[i] * t.input[i];
  if (!std::isfinite(z)) throw NumericalError("dense head: non-finite logit");
  t.prob = sigmoid(z);
  return t.prob;
}

std::vector<double> dense_sigmoid_head_backward(const DenseTrace& t, const DenseHeadParams& p,
                                                double grad_prob, DenseHeadParams& g) {
  const double grad_z = grad_prob * t.prob * (1.0 - t.prob);
  std::vector<double> grad_h(p.in_dim());
  for (std::size_t i = 0; i < p.in_dim(); ++i) {
    g.w[i] += grad_z * t.input[i];
    grad_h[i] = grad_z * p.w[i];
    if (!t.mask.empty()) grad_h[i] *= t.mask[i];
  }
  g.b[0] += grad_z;
  return grad_h;
}

}  // namespace hmfmd
