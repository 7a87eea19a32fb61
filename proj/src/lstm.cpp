#include "hmfmd/lstm.hpp"

#include <cmath>

#include "hmfmd/errors.hpp"
#include "hmfmd/init.hpp"

namespace hmfmd {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

LstmLayerParams init_lstm_layer(std::size_t input_dim, std::size_t hidden_dim, RngStream& rng) {
  if (input_dim == 0 || hidden_dim == 0) throw InvalidInput("lstm: dims must be >= 1");
  LstmLayerParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.w = seeded_init(4 * hidden_dim, input_dim, InitScheme::uniform_scaled, hidden_dim, rng);
  p.u = seeded_init(4 * hidden_dim, hidden_dim, InitScheme::uniform_scaled, hidden_dim, rng);
  p.b = seeded_init(1, 4 * hidden_dim, InitScheme::uniform_scaled, hidden_dim, rng);
  return p;
}

BiLstmParams init_bilstm(std::size_t input_dim, std::size_t hidden_dim, std::size_t num_layers,
                         RngStream& rng) {
  if (num_layers == 0) throw InvalidInput("bilstm: at least one layer required");
  BiLstmParams p;
  std::size_t in = input_dim;
  for (std::size_t k = 0; k < num_layers; ++k) {
    BiLstmLayer layer;
    layer.fwd = init_lstm_layer(in, hidden_dim, rng);
    layer.bwd = init_lstm_layer(in, hidden_dim, rng);
    p.layers.push_back(std::move(layer));
    in = 2 * hidden_dim;
  }
  return p;
}

Matrix lstm_direction_forward(const Matrix& x, const LstmLayerParams& p, bool reverse,
                              LstmTrace* trace) {
  const std::size_t len = x.rows();
  const std::size_t hd = p.hidden_dim;
  if (len == 0) throw InvalidInput("lstm: empty sequence");
  if (x.cols() != p.input_dim) {
    throw ShapeError("lstm: input width " + std::to_string(x.cols()) + " != " +
                     std::to_string(p.input_dim));
  }

  LstmTrace local;
  LstmTrace& t = trace ? *trace : local;
  t.reverse = reverse;
  t.x = x;
  t.gates = matmul_nt(x, p.w);  // input contribution for every position at once
  add_row_bias(t.gates, p.b);
  t.c = Matrix(len, hd);
  t.tanh_c = Matrix(len, hd);
  t.h = Matrix(len, hd);

  std::vector<double> z(4 * hd);
  const double* h_prev = nullptr;
  const double* c_prev = nullptr;
  for (std::size_t step = 0; step < len; ++step) {
    const std::size_t pos = reverse ? len - 1 - step : step;
    double* gate = t.gates.data() + pos * 4 * hd;
    for (std::size_t r = 0; r < 4 * hd; ++r) {
      double s = gate[r];
      if (h_prev) {
        const double* urow = p.u.data() + r * hd;
        for (std::size_t j = 0; j < hd; ++j) s += urow[j] * h_prev[j];
      }
      z[r] = s;
    }
    double* c = t.c.data() + pos * hd;
    double* tc = t.tanh_c.data() + pos * hd;
    double* h = t.h.data() + pos * hd;
    for (std::size_t j = 0; j < hd; ++j) {
      const double ig = sigmoid(z[j]);
      const double fg = sigmoid(z[hd + j]);
      const double gg = std::tanh(z[2 * hd + j]);
      const double og = sigmoid(z[3 * hd + j]);
      gate[j] = ig;
      gate[hd + j] = fg;
      gate[2 * hd + j] = gg;
      gate[3 * hd + j] = og;
      c[j] = (c_prev ? fg * c_prev[j] : 0.0) + ig * gg;
      tc[j] = std::tanh(c[j]);
      h[j] = og * tc[j];
    }
    h_prev = h;
    c_prev = c;
  }
  return t.h;
}

Matrix lstm_direction_backward(const LstmTrace& t, const LstmLayerParams& p,
                               const Matrix& grad_h, LstmLayerParams& g) {
  const std::size_t len = t.x.rows();
  const std::size_t hd = p.hidden_dim;
  require_same_shape(grad_h, t.h, "lstm backward");

  Matrix grad_z(len, 4 * hd);
  Matrix h_prev_rows(len, hd);  // h of the previously processed position (0 at start)
  std::vector<double> dh(hd, 0.0), dc(hd, 0.0), dh_next(hd, 0.0), dc_next(hd, 0.0);

  for (std::size_t step = len; step-- > 0;) {
    const std::size_t pos = t.reverse ? len - 1 - step : step;
    const bool has_prev = step > 0;
    const std::size_t prev = t.reverse ? pos + 1 : pos - 1;
    const double* gate = t.gates.data() + pos * 4 * hd;
    const double* tc = t.tanh_c.data() + pos * hd;
    double* dz = grad_z.data() + pos * 4 * hd;
    for (std::size_t j = 0; j < hd; ++j) {
      const double ig = gate[j], fg = gate[hd + j], gg = gate[2 * hd + j], og = gate[3 * hd + j];
      const double dhj = grad_h(pos, j) + dh_next[j];
      const double dcj = dhj * og * (1.0 - tc[j] * tc[j]) + dc_next[j];
      const double c_prev = has_prev ? t.c(prev, j) : 0.0;
      dz[j] = dcj * gg * ig * (1.0 - ig);
      dz[hd + j] = dcj * c_prev * fg * (1.0 - fg);
      dz[2 * hd + j] = dcj * ig * (1.0 - gg * gg);
      dz[3 * hd + j] = dhj * tc[j] * og * (1.0 - og);
      dc[j] = dcj * fg;
    }
    if (has_prev) {
      for (std::size_t j = 0; j < hd; ++j) h_prev_rows(pos, j) = t.h(prev, j);
    }
    // dh_prev = U^T dz
    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t r = 0; r < 4 * hd; ++r) {
      const double dzr = dz[r];
      if (dzr == 0.0) continue;
      const double* urow = p.u.data() + r * hd;
      for (std::size_t j = 0; j < hd; ++j) dh[j] += urow[j] * dzr;
    }
    dh_next.swap(dh);
    dc_next.swap(dc);
  }

  matmul_tn_acc(grad_z, t.x, g.w);
  matmul_tn_acc(grad_z, h_prev_rows, g.u);
  acc_col_sums(grad_z, g.b);
  return matmul(grad_z, p.w);
}

std::vector<double> bilstm_last_first_pool(const Matrix& x, const BiLstmParams& p,
                                           BiLstmTrace* trace) {
  if (x.rows() == 0) throw InvalidInput("bilstm: empty sequence");
  if (p.layers.empty()) throw InvalidInput("bilstm: no layers");
  BiLstmTrace local;
  BiLstmTrace& t = trace ? *trace : local;
  t.fwd.assign(p.layers.size(), {});
  t.bwd.assign(p.layers.size(), {});

  Matrix input = x;
  Matrix hf, hb;
  for (std::size_t k = 0; k < p.layers.size(); ++k) {
    hf = lstm_direction_forward(input, p.layers[k].fwd, false, &t.fwd[k]);
    hb = lstm_direction_forward(input, p.layers[k].bwd, true, &t.bwd[k]);
    if (k + 1 < p.layers.size()) {
      const Matrix parts[] = {hf, hb};
      input = hconcat(parts);
    }
  }
  const std::size_t hd = p.hidden_dim();
  std::vector<double> pooled(2 * hd);
  auto last = hf.row(hf.rows() - 1);
  auto first = hb.row(0);
  std::copy(last.begin(), last.end(), pooled.begin());
  std::copy(first.begin(), first.end(), pooled.begin() + static_cast<std::ptrdiff_t>(hd));
  if (!all_finite(std::span<const double>(pooled))) {
    throw NumericalError("bilstm: non-finite pooled output");
  }
  return pooled;
}

Matrix bilstm_last_first_pool_backward(const BiLstmTrace& t, const BiLstmParams& p,
                                       std::span<const double> grad_pooled, BiLstmParams& g) {
  const std::size_t hd = p.hidden_dim();
  if (grad_pooled.size() != 2 * hd) throw ShapeError("bilstm backward: pooled grad size");
  const std::size_t len = t.fwd.back().h.rows();

  Matrix grad_hf(len, hd), grad_hb(len, hd);
  for (std::size_t j = 0; j < hd; ++j) {
    grad_hf(len - 1, j) = grad_pooled[j];
    grad_hb(0, j) = grad_pooled[hd + j];
  }
  Matrix grad_in;
  for (std::size_t k = p.layers.size(); k-- > 0;) {
    grad_in = lstm_direction_backward(t.fwd[k], p.layers[k].fwd, grad_hf, g.layers[k].fwd);
    add_inplace(grad_in,
                lstm_direction_backward(t.bwd[k], p.layers[k].bwd, grad_hb, g.layers[k].bwd));
    if (k > 0) {
      const std::size_t h_below = p.layers[k - 1].fwd.hidden_dim;
      grad_hf = Matrix(len, h_below);
      grad_hb = Matrix(len, h_below);
      for (std::size_t r = 0; r < len; ++r) {
        for (std::size_t j = 0; j < h_below; ++j) {
          grad_hf(r, j) = grad_in(r, j);
          grad_hb(r, j) = grad_in(r, h_below + j);
        }
      }
    }
  }
  return grad_in;
}

}  // namespace hmfmd
