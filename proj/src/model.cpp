#include "hmfmd/model.hpp"

#include "hmfmd/errors.hpp"

namespace hmfmd {

TransformerStack init_transformer_stack(std::size_t d_model, const ArchConfig& arch,
                                        RngStream& rng) {
  if (arch.transformer_layers == 0) throw InvalidInput("arch: transformer_layers must be >= 1");
  TransformerStack stack;
  for (std::size_t k = 0; k < arch.transformer_layers; ++k) {
    stack.push_back(
        init_transformer_layer(d_model, arch.ff_multiplier * d_model, arch.n_heads, rng));
  }
  return stack;
}

Matrix residual_encode(const Matrix& x, const TransformerStack& stack, bool positional_encoding,
                       double dropout_p, bool training, RngStream& rng, ResidualTrace* trace,
                       std::string_view where) {
  Matrix base = x;
  if (positional_encoding) add_inplace(base, sinusoidal_positions(x.rows(), x.cols()));
  if (trace) trace->layers.assign(stack.size(), {});
  Matrix h = base;
  for (std::size_t k = 0; k < stack.size(); ++k) {
    h = transformer_encoder_layer(h, stack[k], dropout_p, training, rng,
                                  trace ? &trace->layers[k] : nullptr, where);
  }
  add_inplace(h, base);
  return h;
}

Matrix residual_encode_backward(const ResidualTrace& trace, const TransformerStack& stack,
                                const Matrix& grad_h, TransformerStack& grads) {
  Matrix g = grad_h;
  for (std::size_t k = stack.size(); k-- > 0;) {
    g = transformer_encoder_layer_backward(trace.layers[k], stack[k], g, grads[k]);
  }
  add_inplace(g, grad_h);
  return g;
}

// ---------------------------------------------------------------------------

DiscriminantParams init_discriminant(std::size_t input_dim, const ArchConfig& arch,
                                     RngStream& rng) {
  DiscriminantParams p;
  p.transformer = init_transformer_stack(input_dim, arch, rng);
  p.bilstm = init_bilstm(input_dim, arch.hidden_dim, arch.lstm_layers, rng);
  p.head = init_dense_head(p.bilstm.output_dim(), rng);
  p.positional_encoding = arch.positional_encoding;
  return p;
}

double discriminant_forward(const Matrix& x, const DiscriminantParams& p,
                            const DropoutConfig& dropout, bool training, RngStream& rng,
                            DiscriminantTrace* trace) {
  if (p.transformer.empty()) throw InvalidInput("discriminant: no transformer layers");
  if (x.cols() != p.transformer.front().d_model) {
    throw ShapeError("discriminant: input width " + std::to_string(x.cols()) +
                     " != d_model " + std::to_string(p.transformer.front().d_model));
  }
  const Matrix h = residual_encode(x, p.transformer, p.positional_encoding, dropout.other,
                                   training, rng, trace ? &trace->encoder : nullptr,
                                   "discriminant.transformer");
  const auto pooled = bilstm_last_first_pool(h, p.bilstm, trace ? &trace->bilstm : nullptr);
  return dense_sigmoid_head(pooled, p.head, dropout.linear, training, &rng,
                            trace ? &trace->head : nullptr);
}

void discriminant_backward(const DiscriminantTrace& trace, const DiscriminantParams& p,
                           double grad_prob, DiscriminantParams& grads) {
  const auto grad_pooled = dense_sigmoid_head_backward(trace.head, p.head, grad_prob, grads.head);
  const Matrix grad_h =
      bilstm_last_first_pool_backward(trace.bilstm, p.bilstm, grad_pooled, grads.bilstm);
  residual_encode_backward(trace.encoder, p.transformer, grad_h, grads.transformer);
}

// ---------------------------------------------------------------------------

BaselineParams init_baseline(std::size_t input_dim, const ArchConfig& arch, RngStream& rng) {
  BaselineParams p;
  p.bilstm = init_bilstm(input_dim, arch.hidden_dim, arch.lstm_layers, rng);
  p.head = init_dense_head(p.bilstm.output_dim(), rng);
  return p;
}

double baseline_bilstm_forward(const Matrix& x, const BaselineParams& p,
                               const DropoutConfig& dropout, bool training, RngStream& rng,
                               BaselineTrace* trace) {
  const auto pooled = bilstm_last_first_pool(x, p.bilstm, trace ? &trace->bilstm : nullptr);
  return dense_sigmoid_head(pooled, p.head, dropout.linear, training, &rng,
                            trace ? &trace->head : nullptr);
}

void baseline_bilstm_backward(const BaselineTrace& trace, const BaselineParams& p,
                              double grad_prob, BaselineParams& grads) {
  const auto grad_pooled = dense_sigmoid_head_backward(trace.head, p.head, grad_prob, grads.head);
  bilstm_last_first_pool_backward(trace.bilstm, p.bilstm, grad_pooled, grads.bilstm);
}

// ---------------------------------------------------------------------------

std::vector<Channel> FusionParams::channels() const {
  std::vector<Channel> out;
  for (const auto& [c, stack] : transformers) out.push_back(c);
  return out;
}

FusionParams init_fusion(const std::map<Channel, std::size_t>& widths, const ArchConfig& arch,
                         RngStream& rng) {
  if (widths.empty()) throw InvalidInput("fusion: at least one channel required");
  FusionParams p;
  std::size_t total = 0;
  for (const auto& [c, w] : widths) {
    if (w == 0) throw InvalidInput("fusion: channel " + std::string(channel_name(c)) + " width 0");
    p.transformers[c] = init_transformer_stack(w, arch, rng);
    total += w;
  }
  p.bilstm = init_bilstm(total, arch.hidden_dim, arch.lstm_layers, rng);
  p.head = init_dense_head(p.bilstm.output_dim(), rng);
  p.positional_encoding = arch.positional_encoding;
  return p;
}

double fusion_forward(const ChannelInputs& channels, const FusionParams& p,
                      const DropoutConfig& dropout, bool training, RngStream& rng,
                      FusionTrace* trace) {
  for (const auto& [c, x] : channels) {
    if (!p.transformers.contains(c)) {
      throw InvalidInput("fusion: model has no channel " + std::string(channel_name(c)));
    }
  }
  for (const auto& [c, stack] : p.transformers) {
    if (!channels.contains(c)) {
      throw InvalidInput("fusion: missing input channel " + std::string(channel_name(c)));
    }
  }
  const std::size_t len = channels.begin()->second.rows();
  std::vector<Matrix> encoded;
  if (trace) {
    trace->encoders.clear();
    trace->offsets.clear();
  }
  std::size_t offset = 0;
  for (const auto& [c, x] : channels) {
    if (x.rows() != len) {
      throw InvalidInput("fusion: channel " + std::string(channel_name(c)) + " has length " +
                         std::to_string(x.rows()) + ", expected " + std::to_string(len));
    }
    const auto& stack = p.transformers.at(c);
    if (x.cols() != stack.front().d_model) {
      throw ShapeError("fusion: channel " + std::string(channel_name(c)) + " width " +
                       std::to_string(x.cols()) + " != " + std::to_string(stack.front().d_model));
    }
    const std::string where = "fusion.transformer[" + std::string(channel_name(c)) + "]";
    encoded.push_back(residual_encode(x, stack, p.positional_encoding, dropout.other, training,
                                      rng, trace ? &trace->encoders[c] : nullptr, where));
    if (trace) trace->offsets.push_back(offset);
    offset += x.cols();
  }
  const Matrix z = hconcat(encoded);
  const auto pooled = bilstm_last_first_pool(z, p.bilstm, trace ? &trace->bilstm : nullptr);
  return dense_sigmoid_head(pooled, p.head, dropout.linear, training, &rng,
                            trace ? &trace->head : nullptr);
}

void fusion_backward(const FusionTrace& trace, const FusionParams& p, double grad_prob,
                     FusionParams& grads) {
  const auto grad_pooled = dense_sigmoid_head_backward(trace.head, p.head, grad_prob, grads.head);
  const Matrix grad_z =
      bilstm_last_first_pool_backward(trace.bilstm, p.bilstm, grad_pooled, grads.bilstm);
  std::size_t k = 0;
  for (const auto& [c, stack] : p.transformers) {
    const std::size_t off = trace.offsets[k++];
    const std::size_t w = stack.front().d_model;
    Matrix g(grad_z.rows(), w);
    for (std::size_t r = 0; r < grad_z.rows(); ++r) {
      for (std::size_t j = 0; j < w; ++j) g(r, j) = grad_z(r, off + j);
    }
    residual_encode_backward(trace.encoders.at(c), stack, g, grads.transformers.at(c));
  }
}

ChannelInputs raw_channels(const Sample& sample) {
  ChannelInputs out;
  for (Modality m : kModalities) out[channel_of(m)] = sample.features(m);
  return out;
}

ChannelInputs build_fusion_input(const Sample& sample, const std::map<Modality, double>& preds,
                                 std::size_t L_target) {
  for (Modality m : kModalities) {
    if (!preds.contains(m)) {
      throw InvalidInput("build_fusion_input: sample " + sample.id +
                         " missing prediction for modality " + std::string(modality_name(m)));
    }
    if (sample.features(m).rows() != L_target) {
      throw InvalidInput("build_fusion_input: sample " + sample.id + " modality " +
                         std::string(modality_name(m)) + " has length " +
                         std::to_string(sample.features(m).rows()) + ", expected " +
                         std::to_string(L_target));
    }
  }
  ChannelInputs out = raw_channels(sample);
  Matrix y(L_target, kPredictionChannelWidth);
  for (std::size_t r = 0; r < L_target; ++r) {
    for (Modality m : kModalities) y(r, index_of(m)) = preds.at(m);
  }
  out[Channel::Y] = std::move(y);
  return out;
}

}  // namespace hmfmd
