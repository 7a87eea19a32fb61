#include "hmfmd/transformer.hpp"

#include <cmath>

#include "hmfmd/dropout.hpp"
#include "hmfmd/errors.hpp"
#include "hmfmd/init.hpp"

namespace hmfmd {

namespace {

constexpr double kLayerNormEps = 1e-5;

// Row-wise layer norm. Writes xhat and rstd for the backward pass.
Matrix layer_norm(const Matrix& x, const Matrix& gamma, const Matrix& beta, Matrix& xhat,
                  std::vector<double>& rstd) {
  const std::size_t n = x.cols();
  Matrix y(x.rows(), n);
  xhat = Matrix(x.rows(), n);
  rstd.assign(x.rows(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : row) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    rstd[r] = inv;
    for (std::size_t c = 0; c < n; ++c) {
      const double h = (row[c] - mean) * inv;
      xhat(r, c) = h;
      y(r, c) = gamma[c] * h + beta[c];
    }
  }
  return y;
}

Matrix layer_norm_backward(const Matrix& grad_y, const Matrix& xhat,
                           const std::vector<double>& rstd, const Matrix& gamma,
                           Matrix& grad_gamma, Matrix& grad_beta) {
  const std::size_t n = grad_y.cols();
  Matrix grad_x(grad_y.rows(), n);
  std::vector<double> gh(n);
  for (std::size_t r = 0; r < grad_y.rows(); ++r) {
    double mean_gh = 0.0;
    double mean_gh_h = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      const double g = grad_y(r, c);
      grad_gamma[c] += g * xhat(r, c);
      grad_beta[c] += g;
      gh[c] = g * gamma[c];
      mean_gh += gh[c];
      mean_gh_h += gh[c] * xhat(r, c);
    }
    mean_gh /= static_cast<double>(n);
    mean_gh_h /= static_cast<double>(n);
    for (std::size_t c = 0; c < n; ++c) {
      grad_x(r, c) = rstd[r] * (gh[c] - mean_gh - xhat(r, c) * mean_gh_h);
    }
  }
  return grad_x;
}

}  // namespace

TransformerLayerParams init_transformer_layer(std::size_t d_model, std::size_t d_ff,
                                              std::size_t n_heads, RngStream& rng) {
  if (d_model == 0 || d_ff == 0) throw InvalidInput("transformer: d_model and d_ff must be >= 1");
  if (n_heads == 0 || d_model % n_heads != 0) {
    throw InvalidInput("transformer: d_model " + std::to_string(d_model) +
                       " not divisible by n_heads " + std::to_string(n_heads));
  }
  TransformerLayerParams p;
  p.d_model = d_model;
  p.n_heads = n_heads;
  p.wq = seeded_init(d_model, d_model, InitScheme::uniform_scaled, d_model, rng);
  p.wk = seeded_init(d_model, d_model, InitScheme::uniform_scaled, d_model, rng);
  p.wv = seeded_init(d_model, d_model, InitScheme::uniform_scaled, d_model, rng);
  p.wo = seeded_init(d_model, d_model, InitScheme::uniform_scaled, d_model, rng);
  p.w1 = seeded_init(d_model, d_ff, InitScheme::uniform_scaled, d_model, rng);
  p.b1 = seeded_init(1, d_ff, InitScheme::uniform_scaled, d_model, rng);
  p.w2 = seeded_init(d_ff, d_model, InitScheme::uniform_scaled, d_ff, rng);
  p.b2 = seeded_init(1, d_model, InitScheme::uniform_scaled, d_ff, rng);
  p.ln1_gamma = Matrix(1, d_model, 1.0);
  p.ln1_beta = Matrix(1, d_model, 0.0);
  p.ln2_gamma = Matrix(1, d_model, 1.0);
  p.ln2_beta = Matrix(1, d_model, 0.0);
  return p;
}

Matrix transformer_encoder_layer(const Matrix& x, const TransformerLayerParams& p,
                                 double dropout_p, bool training, RngStream& rng,
                                 TransformerTrace* trace, std::string_view where) {
  const std::size_t d = p.d_model;
  if (x.rows() == 0) throw InvalidInput(std::string(where) + ": empty sequence");
  if (x.cols() != d) {
    throw ShapeError(std::string(where) + ": input width " + std::to_string(x.cols()) +
                     " != d_model " + std::to_string(d));
  }
  if (p.n_heads == 0 || d % p.n_heads != 0) {
    throw ShapeError(std::string(where) + ": d_model not divisible by n_heads");
  }
  const std::size_t len = x.rows();
  const std::size_t dk = d / p.n_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

  TransformerTrace local;
  TransformerTrace& t = trace ? *trace : local;
  t.x = x;
  t.q = matmul(x, p.wq);
  t.k = matmul(x, p.wk);
  t.v = matmul(x, p.wv);
  t.attn.assign(p.n_heads, Matrix(len, len));
  t.context = Matrix(len, d);

  for (std::size_t h = 0; h < p.n_heads; ++h) {
    const std::size_t off = h * dk;
    Matrix& a = t.attn[h];
    for (std::size_t i = 0; i < len; ++i) {
      double row_max = -INFINITY;
      for (std::size_t j = 0; j < len; ++j) {
        double s = 0.0;
        for (std::size_t c = 0; c < dk; ++c) s += t.q(i, off + c) * t.k(j, off + c);
        a(i, j) = s * scale;
        row_max = std::max(row_max, a(i, j));
      }
      double z = 0.0;
      for (std::size_t j = 0; j < len; ++j) {
        a(i, j) = std::exp(a(i, j) - row_max);
        z += a(i, j);
      }
      for (std::size_t j = 0; j < len; ++j) a(i, j) /= z;
      for (std::size_t j = 0; j < len; ++j) {
        const double w = a(i, j);
        for (std::size_t c = 0; c < dk; ++c) t.context(i, off + c) += w * t.v(j, off + c);
      }
    }
  }

  Matrix attn_out = matmul(t.context, p.wo);
  t.mask1 = dropout_mask(len, d, dropout_p, training, rng);
  apply_mask(attn_out, t.mask1);
  add_inplace(attn_out, x);
  t.n1 = layer_norm(attn_out, p.ln1_gamma, p.ln1_beta, t.xhat1, t.rstd1);

  t.ff_pre = matmul(t.n1, p.w1);
  add_row_bias(t.ff_pre, p.b1);
  t.ff_act = t.ff_pre;
  for (double& v : t.ff_act.values()) v = v > 0.0 ? v : 0.0;
  Matrix ff_out = matmul(t.ff_act, p.w2);
  add_row_bias(ff_out, p.b2);
  t.mask2 = dropout_mask(len, d, dropout_p, training, rng);
  apply_mask(ff_out, t.mask2);
  add_inplace(ff_out, t.n1);
  t.out = layer_norm(ff_out, p.ln2_gamma, p.ln2_beta, t.xhat2, t.rstd2);

  if (!all_finite(t.out)) {
    throw NumericalError(std::string(where) + ": non-finite output");
  }
  return t.out;
}

Matrix transformer_encoder_layer_backward(const TransformerTrace& t,
                                          const TransformerLayerParams& p,
                                          const Matrix& grad_out, TransformerLayerParams& g) {
  require_same_shape(grad_out, t.out, "transformer backward");
  const std::size_t len = t.x.rows();
  const std::size_t d = p.d_model;
  const std::size_t dk = d / p.n_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

  // Second sub-layer: out = LN2(n1 + drop(ff)).
  Matrix grad_r2 =
      layer_norm_backward(grad_out, t.xhat2, t.rstd2, p.ln2_gamma, g.ln2_gamma, g.ln2_beta);
  Matrix grad_n1 = grad_r2;
  Matrix grad_ff = grad_r2;
  apply_mask(grad_ff, t.mask2);
  matmul_tn_acc(t.ff_act, grad_ff, g.w2);
  acc_col_sums(grad_ff, g.b2);
  Matrix grad_act = matmul_nt(grad_ff, p.w2);
  for (std::size_t i = 0; i < grad_act.size(); ++i) {
    if (t.ff_pre[i] <= 0.0) grad_act[i] = 0.0;
  }
  matmul_tn_acc(t.n1, grad_act, g.w1);
  acc_col_sums(grad_act, g.b1);
  matmul_nt_acc(grad_act, p.w1, grad_n1);

  // First sub-layer: n1 = LN1(x + drop(context * wo)).
  Matrix grad_r1 =
      layer_norm_backward(grad_n1, t.xhat1, t.rstd1, p.ln1_gamma, g.ln1_gamma, g.ln1_beta);
  Matrix grad_x = grad_r1;
  Matrix grad_attn = grad_r1;
  apply_mask(grad_attn, t.mask1);
  matmul_tn_acc(t.context, grad_attn, g.wo);
  Matrix grad_context = matmul_nt(grad_attn, p.wo);

  Matrix grad_q(len, d), grad_k(len, d), grad_v(len, d);
  std::vector<double> grad_a(len);
  for (std::size_t h = 0; h < p.n_heads; ++h) {
    const std::size_t off = h * dk;
    const Matrix& a = t.attn[h];
    for (std::size_t i = 0; i < len; ++i) {
      // dA_ij = <dContext_i, V_j>; dV_j += A_ij dContext_i
      double dot = 0.0;
      for (std::size_t j = 0; j < len; ++j) {
        double s = 0.0;
        for (std::size_t c = 0; c < dk; ++c) {
          s += grad_context(i, off + c) * t.v(j, off + c);
          grad_v(j, off + c) += a(i, j) * grad_context(i, off + c);
        }
        grad_a[j] = s;
        dot += a(i, j) * s;
      }
      for (std::size_t j = 0; j < len; ++j) {
        const double grad_s = a(i, j) * (grad_a[j] - dot) * scale;
        for (std::size_t c = 0; c < dk; ++c) {
          grad_q(i, off + c) += grad_s * t.k(j, off + c);
          grad_k(j, off + c) += grad_s * t.q(i, off + c);
        }
      }
    }
  }
  matmul_tn_acc(t.x, grad_q, g.wq);
  matmul_tn_acc(t.x, grad_k, g.wk);
  matmul_tn_acc(t.x, grad_v, g.wv);
  matmul_nt_acc(grad_q, p.wq, grad_x);
  matmul_nt_acc(grad_k, p.wk, grad_x);
  matmul_nt_acc(grad_v, p.wv, grad_x);
  return grad_x;
}

Matrix sinusoidal_positions(std::size_t length, std::size_t d_model) {
  Matrix pe(length, d_model);
  for (std::size_t pos = 0; pos < length; ++pos) {
    for (std::size_t i = 0; i < d_model; ++i) {
      const double rate =
          std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(d_model));
      const double angle = static_cast<double>(pos) * rate;
      pe(pos, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

}  // namespace hmfmd
