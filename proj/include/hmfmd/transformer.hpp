#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "hmfmd/matrix.hpp"
#include "hmfmd/rng.hpp"

namespace hmfmd {

/// One post-norm transformer encoder layer.
///
/// Projections are applied as X * W (W is d_model x d_model). Attention has
/// no projection biases; the feed-forward block is ReLU with biases.
struct TransformerLayerParams {
  std::size_t d_model = 0;
  std::size_t n_heads = 1;
  Matrix wq, wk, wv, wo;  // d_model x d_model
  Matrix w1, b1;          // d_model x d_ff, 1 x d_ff
  Matrix w2, b2;          // d_ff x d_model, 1 x d_model
  Matrix ln1_gamma, ln1_beta, ln2_gamma, ln2_beta;  // 1 x d_model

  std::size_t d_ff() const { return w1.cols(); }

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
    f(p + "wq", s.wq);
    f(p + "wk", s.wk);
    f(p + "wv", s.wv);
    f(p + "wo", s.wo);
    f(p + "w1", s.w1);
    f(p + "b1", s.b1);
    f(p + "w2", s.w2);
    f(p + "b2", s.b2);
    f(p + "ln1_gamma", s.ln1_gamma);
    f(p + "ln1_beta", s.ln1_beta);
    f(p + "ln2_gamma", s.ln2_gamma);
    f(p + "ln2_beta", s.ln2_beta);
  }
};

/// Random projections and feed-forward weights, layer norms at identity.
TransformerLayerParams init_transformer_layer(std::size_t d_model, std::size_t d_ff,
                                              std::size_t n_heads, RngStream& rng);

/// Forward intermediates kept for the backward pass.
struct TransformerTrace {
  Matrix x, q, k, v;
  std::vector<Matrix> attn;  // per head, L x L, rows sum to 1
  Matrix context;            // concatenated head outputs, L x d_model
  Matrix mask1, mask2;
  Matrix xhat1, xhat2;       // normalized residual sums
  std::vector<double> rstd1, rstd2;
  Matrix n1;                 // output of the first layer norm
  Matrix ff_pre, ff_act;     // before / after ReLU
  Matrix out;
};

Matrix transformer_encoder_layer(const Matrix& x, const TransformerLayerParams& p,
                                 double dropout_p, bool training, RngStream& rng,
                                 TransformerTrace* trace = nullptr,
                                 std::string_view where = "transformer");

/// Accumulates parameter gradients into `grads` and returns dL/dx.
Matrix transformer_encoder_layer_backward(const TransformerTrace& trace,
                                          const TransformerLayerParams& p,
                                          const Matrix& grad_out, TransformerLayerParams& grads);

/// Fixed sinusoidal position table, L x d_model.
Matrix sinusoidal_positions(std::size_t length, std::size_t d_model);

}  // namespace hmfmd
