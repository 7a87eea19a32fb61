#include "hmfmd/verify.hpp"

#include <array>
#include <cmath>
#include <functional>

#include "hmfmd/dense.hpp"
#include "hmfmd/errors.hpp"
#include "hmfmd/gradcheck.hpp"
#include "hmfmd/loss.hpp"
#include "hmfmd/lstm.hpp"
#include "hmfmd/model.hpp"
#include "hmfmd/rng.hpp"
#include "hmfmd/tensors.hpp"
#include "hmfmd/transformer.hpp"

namespace hmfmd {

namespace {

constexpr std::uint64_t kSuiteSeed = 20240917;

Matrix random_matrix(std::size_t rows, std::size_t cols, RngStream& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = scale * rng.normal();
  return m;
}

double dot(const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

GradcheckEntry check(const std::string& name, const std::function<double()>& loss,
                     std::vector<Matrix*> params, std::vector<Matrix> grads, double corrupt) {
  std::vector<const Matrix*> analytic;
  std::size_t n = 0;
  for (auto& g : grads) {
    scale_inplace(g, 1.0 + corrupt);
    analytic.push_back(&g);
    n += g.size();
  }
  GradcheckEntry e;
  e.component = name;
  e.n_params = n;
  e.max_rel_error = finite_diff_gradcheck(loss, params, analytic, kGradcheckEps);
  e.passed = e.max_rel_error < kGradcheckTolerance;
  return e;
}

template <class P>
std::vector<Matrix> copy_tensors(const P& p) {
  std::vector<Matrix> out;
  for (const Matrix* m : tensor_ptrs(p)) out.push_back(*m);
  return out;
}

// Each layer gets a fixed random linear readout so the scalar loss touches
// every output coordinate.

GradcheckEntry transformer_check(double corrupt) {
  RngStream rng = RngStream(kSuiteSeed).derive("transformer", 0);
  const std::size_t L = 3, d = 4;
  auto p = init_transformer_layer(d, 4 * d, 2, rng);
  // Move layer norms off identity so their gradients are exercised.
  for (auto* m : {&p.ln1_gamma, &p.ln1_beta, &p.ln2_gamma, &p.ln2_beta, &p.b1, &p.b2}) {
    for (std::size_t i = 0; i < m->size(); ++i) (*m)[i] += 0.3 * rng.normal();
  }
  Matrix x = random_matrix(L, d, rng);
  const Matrix readout = random_matrix(L, d, rng);
  RngStream unused(0);

  auto loss = [&] { return dot(transformer_encoder_layer(x, p, 0.0, false, unused), readout); };
  TransformerTrace trace;
  transformer_encoder_layer(x, p, 0.0, false, unused, &trace);
  auto grads = zeros_like(p);
  Matrix dx = transformer_encoder_layer_backward(trace, p, readout, grads);

  auto params = tensor_ptrs(p);
  params.push_back(&x);
  auto analytic = copy_tensors(grads);
  analytic.push_back(dx);
  return check("transformer", loss, params, analytic, corrupt);
}

GradcheckEntry lstm_check(double corrupt) {
  RngStream rng = RngStream(kSuiteSeed).derive("lstm", 0);
  const std::size_t L = 4, in = 3, H = 3;
  // Two stacked bidirectional layers under the pooled readout, plus one
  // direction pair whose full hidden sequence is read out, so gradients
  // reach every gate at every step.
  auto stack = init_bilstm(in, H, 2, rng);
  auto single = init_lstm_layer(in, H, rng);
  for (auto* m : tensor_ptrs(stack)) scale_inplace(*m, 3.0);
  Matrix x = random_matrix(L, in, rng);
  std::vector<double> pooled_readout(2 * H);
  for (auto& r : pooled_readout) r = rng.normal();
  const Matrix seq_readout = random_matrix(L, H, rng);

  auto loss = [&] {
    return dot(bilstm_last_first_pool(x, stack), pooled_readout) +
           dot(lstm_direction_forward(x, single, false), seq_readout) +
           dot(lstm_direction_forward(x, single, true), seq_readout);
  };

  BiLstmTrace trace;
  LstmTrace tf, tb;
  bilstm_last_first_pool(x, stack, &trace);
  lstm_direction_forward(x, single, false, &tf);
  lstm_direction_forward(x, single, true, &tb);
  auto stack_grads = zeros_like(stack);
  auto single_grads = zeros_like(single);
  Matrix dx = bilstm_last_first_pool_backward(trace, stack, pooled_readout, stack_grads);
  add_inplace(dx, lstm_direction_backward(tf, single, seq_readout, single_grads));
  add_inplace(dx, lstm_direction_backward(tb, single, seq_readout, single_grads));

  auto params = tensor_ptrs(stack);
  for (auto* m : tensor_ptrs(single)) params.push_back(m);
  params.push_back(&x);
  auto analytic = copy_tensors(stack_grads);
  for (auto& m : copy_tensors(single_grads)) analytic.push_back(std::move(m));
  analytic.push_back(std::move(dx));
  return check("lstm", loss, params, analytic, corrupt);
}

GradcheckEntry head_check(double corrupt) {
  RngStream rng = RngStream(kSuiteSeed).derive("head", 0);
  auto p = init_dense_head(6, rng);
  Matrix h = random_matrix(1, 6, rng);
  auto loss = [&] {
    const double prob = dense_sigmoid_head(h.values(), p);
    return std::log(prob) + 2.0 * prob;
  };
  DenseTrace trace;
  const double prob = dense_sigmoid_head(h.values(), p, 0.0, false, nullptr, &trace);
  auto grads = zeros_like(p);
  const auto dh = dense_sigmoid_head_backward(trace, p, 1.0 / prob + 2.0, grads);

  auto params = tensor_ptrs(p);
  params.push_back(&h);
  auto analytic = copy_tensors(grads);
  analytic.emplace_back(1, dh.size(), dh);
  return check("head", loss, params, analytic, corrupt);
}

GradcheckEntry loss_check(double corrupt) {
  RngStream rng = RngStream(kSuiteSeed).derive("loss", 0);
  const std::size_t n = 8;
  Matrix preds(1, n);
  std::vector<int> labels(n);
  std::vector<double> weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    preds[i] = rng.uniform(0.05, 0.95);
    labels[i] = static_cast<int>(i % 2);
    weights[i] = rng.uniform(0.5, 2.0);
  }
  auto loss = [&] { return weighted_bce_loss(preds.values(), labels, weights); };
  const auto g = weighted_bce_grad(preds.values(), labels, weights);
  return check("loss", loss, {&preds}, {Matrix(1, n, g)}, corrupt);
}

GradcheckEntry discriminant_check(double corrupt) {
  RngStream rng = RngStream(kSuiteSeed).derive("discriminant", 0);
  ArchConfig arch;
  arch.hidden_dim = 3;
  const std::size_t L = 3, d = 4;
  auto p = init_discriminant(d, arch, rng);
  const Matrix x = random_matrix(L, d, rng);
  const std::array<int, 1> label = {1};
  const std::array<double, 1> weight = {1.0};
  const DropoutConfig dropout;
  RngStream unused(0);

  auto loss = [&] {
    const std::array<double, 1> prob = {discriminant_forward(x, p, dropout, false, unused)};
    return weighted_bce_loss(prob, label, weight);
  };
  DiscriminantTrace trace;
  const std::array<double, 1> prob = {discriminant_forward(x, p, dropout, false, unused, &trace)};
  auto grads = zeros_like(p);
  discriminant_backward(trace, p, weighted_bce_grad(prob, label, weight)[0], grads);
  return check("discriminant", loss, tensor_ptrs(p), copy_tensors(grads), corrupt);
}

GradcheckEntry fusion_check(double corrupt) {
  RngStream rng = RngStream(kSuiteSeed).derive("fusion", 0);
  ArchConfig arch;
  arch.hidden_dim = 3;
  const std::size_t L = 3;
  const std::map<Channel, std::size_t> widths = {
      {Channel::A, 2}, {Channel::V, 2}, {Channel::T, 2}, {Channel::Y, kPredictionChannelWidth}};
  auto p = init_fusion(widths, arch, rng);
  ChannelInputs inputs;
  for (const auto& [c, w] : widths) inputs[c] = random_matrix(L, w, rng);
  // Y is a replicated prediction vector, as in real Stage-2 inputs.
  for (std::size_t t = 1; t < L; ++t) {
    for (std::size_t j = 0; j < kPredictionChannelWidth; ++j) {
      inputs[Channel::Y](t, j) = inputs[Channel::Y](0, j);
    }
  }
  // Layer norm over two features returns +-1 unless the features nearly
  // coincide, which pushes upstream gradients below the roundoff floor of
  // central differences. Place both layer norms of each width-2 channel near
  // a tie so every coordinate carries a measurable gradient.
  auto near_tie = [&](Matrix& m) {
    for (std::size_t r = 0; r < m.rows(); ++r) m(r, 1) = m(r, 0) + 1e-3 * rng.normal();
  };
  for (Channel c : {Channel::A, Channel::V, Channel::T}) {
    auto& layer = p.transformers.at(c).front();
    scale_inplace(inputs[c], 2.0);
    near_tie(inputs[c]);
    near_tie(layer.wo);
    scale_inplace(layer.w2, 1e-3);
    near_tie(layer.b2);
    for (std::size_t k = 0; k < 2; ++k) layer.ln1_beta[k] = rng.normal();
    near_tie(layer.ln1_beta);
    for (std::size_t k = 0; k < 2; ++k) layer.ln1_gamma[k] = 1e-3 * (1.0 + 0.3 * rng.normal());
  }
  const std::array<int, 1> label = {0};
  const std::array<double, 1> weight = {1.0};
  const DropoutConfig dropout;
  RngStream unused(0);

  auto loss = [&] {
    const std::array<double, 1> prob = {fusion_forward(inputs, p, dropout, false, unused)};
    return weighted_bce_loss(prob, label, weight);
  };
  FusionTrace trace;
  const std::array<double, 1> prob = {fusion_forward(inputs, p, dropout, false, unused, &trace)};
  auto grads = zeros_like(p);
  fusion_backward(trace, p, weighted_bce_grad(prob, label, weight)[0], grads);
  return check("fusion", loss, tensor_ptrs(p), copy_tensors(grads), corrupt);
}

}  // namespace

GradcheckScope parse_gradcheck_scope(const std::string& s) {
  if (s == "layers") return GradcheckScope::layers;
  if (s == "models") return GradcheckScope::models;
  if (s == "all") return GradcheckScope::all;
  throw InvalidInput("unknown gradcheck scope '" + s + "' (expected layers, models or all)");
}

std::vector<GradcheckEntry> run_gradcheck_suite(GradcheckScope scope, double corrupt_factor) {
  std::vector<GradcheckEntry> out;
  if (scope != GradcheckScope::models) {
    out.push_back(transformer_check(corrupt_factor));
    out.push_back(lstm_check(corrupt_factor));
    out.push_back(head_check(corrupt_factor));
    out.push_back(loss_check(corrupt_factor));
  }
  if (scope != GradcheckScope::layers) {
    out.push_back(discriminant_check(corrupt_factor));
    out.push_back(fusion_check(corrupt_factor));
  }
  return out;
}

}  // namespace hmfmd
