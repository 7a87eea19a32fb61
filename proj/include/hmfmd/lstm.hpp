#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hmfmd/matrix.hpp"
#include "hmfmd/rng.hpp"

namespace hmfmd {

/// One LSTM direction. Gate blocks are stacked row-wise in the order
/// input, forget, cell, output: rows [kH, (k+1)H) of w, u and b belong to gate k.
struct LstmLayerParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Matrix w;  // 4H x input_dim
  Matrix u;  // 4H x H
  Matrix b;  // 1 x 4H

  template <class F>
  void visit(F&& f, const std::string& prefix = "") {
    f(prefix + "w", w);
    f(prefix + "u", u);
    f(prefix + "b", b);
  }
  template <class F>
  void visit(F&& f, const std::string& prefix = "") const {
    f(prefix + "w", w);
    f(prefix + "u", u);
    f(prefix + "b", b);
  }
};

struct BiLstmLayer {
  LstmLayerParams fwd;
  LstmLayerParams bwd;
};

/// Stacked bidirectional LSTM. Layer k > 0 consumes the 2H-wide
/// [forward, backward] output sequence of layer k-1.
struct BiLstmParams {
  std::vector<BiLstmLayer> layers;

  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().fwd.input_dim; }
  std::size_t hidden_dim() const { return layers.empty() ? 0 : layers.back().fwd.hidden_dim; }
  std::size_t output_dim() const { return 2 * hidden_dim(); }

  template <class F>
  void visit(F&& f, const std::string& prefix = "") {
    visit_impl(*this, f, prefix);
  }
  template <class F>
  void visit(F&& f, const std::string& prefix = "") const {
    visit_impl(*this, f, prefix);
  }

 private:
  template <class Self, class F>
  static void visit_impl(Self& s, F& f, const std::string& p) {
    for (std::size_t k = 0; k < s.layers.size(); ++k) {
      const std::string base = p + "l" + std::to_string(k) + ".";
      s.layers[k].fwd.visit(f, base + "fwd.");
      s.layers[k].bwd.visit(f, base + "bwd.");
    }
  }
};

LstmLayerParams init_lstm_layer(std::size_t input_dim, std::size_t hidden_dim, RngStream& rng);
BiLstmParams init_bilstm(std::size_t input_dim, std::size_t hidden_dim, std::size_t num_layers,
                         RngStream& rng);

/// Per-position states of one direction, indexed by sequence position.
struct LstmTrace {
  bool reverse = false;
  Matrix x;       // L x input_dim
  Matrix gates;   // L x 4H, post-activation (i, f, g, o)
  Matrix c;       // L x H
  Matrix tanh_c;  // L x H
  Matrix h;       // L x H
};

/// Runs one direction over x. `reverse` processes positions L-1 .. 0.
/// Returns the L x H hidden sequence indexed by position.
Matrix lstm_direction_forward(const Matrix& x, const LstmLayerParams& p, bool reverse,
                              LstmTrace* trace = nullptr);

/// Accumulates gradients into `grads`; returns dL/dx.
Matrix lstm_direction_backward(const LstmTrace& trace, const LstmLayerParams& p,
                               const Matrix& grad_h, LstmLayerParams& grads);

struct BiLstmTrace {
  std::vector<LstmTrace> fwd;
  std::vector<LstmTrace> bwd;
};

/// Concatenation of the top layer's forward state at position L-1 and its
/// backward state at position 0. Length 2H.
std::vector<double> bilstm_last_first_pool(const Matrix& x, const BiLstmParams& p,
                                           BiLstmTrace* trace = nullptr);

/// Returns dL/dx for the pooled gradient.
Matrix bilstm_last_first_pool_backward(const BiLstmTrace& trace, const BiLstmParams& p,
                                       std::span<const double> grad_pooled, BiLstmParams& grads);

}  // namespace hmfmd
