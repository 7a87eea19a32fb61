#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hmfmd/data.hpp"
#include "hmfmd/dense.hpp"
#include "hmfmd/lstm.hpp"
#include "hmfmd/modality.hpp"
#include "hmfmd/rng.hpp"
#include "hmfmd/transformer.hpp"

namespace hmfmd {

struct ArchConfig {
  std::size_t hidden_dim = 32;
  std::size_t lstm_layers = 2;
  std::size_t transformer_layers = 1;
  std::size_t n_heads = 1;
  std::size_t ff_multiplier = 4;  // d_ff = ff_multiplier * d_model
  bool positional_encoding = false;

  friend bool operator==(const ArchConfig&, const ArchConfig&) = default;
};

/// `other` applies inside transformer layers, `linear` to the head input.
struct DropoutConfig {
  double other = 0.2;
  double linear = 0.2;
};

using TransformerStack = std::vector<TransformerLayerParams>;

TransformerStack init_transformer_stack(std::size_t d_model, const ArchConfig& arch,
                                        RngStream& rng);

struct ResidualTrace {
  std::vector<TransformerTrace> layers;
};

/// H = T(X') + X' where T is the transformer stack and X' is X, optionally
/// with sinusoidal positions added.
Matrix residual_encode(const Matrix& x, const TransformerStack& stack, bool positional_encoding,
                       double dropout_p, bool training, RngStream& rng,
                       ResidualTrace* trace = nullptr, std::string_view where = "transformer");
Matrix residual_encode_backward(const ResidualTrace& trace, const TransformerStack& stack,
                                const Matrix& grad_h, TransformerStack& grads);

// ---------------------------------------------------------------------------
// Stage-1 discriminant module: transformer + residual, BiLSTM pooling, head.

struct DiscriminantParams {
  TransformerStack transformer;
  BiLstmParams bilstm;
  DenseHeadParams head;
  bool positional_encoding = false;

  std::size_t input_dim() const { return bilstm.input_dim(); }

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
    for (std::size_t k = 0; k < s.transformer.size(); ++k) {
      s.transformer[k].visit(f, p + "transformer." + std::to_string(k) + ".");
    }
    s.bilstm.visit(f, p + "bilstm.");
    s.head.visit(f, p + "head.");
  }
};

DiscriminantParams init_discriminant(std::size_t input_dim, const ArchConfig& arch,
                                     RngStream& rng);

struct DiscriminantTrace {
  ResidualTrace encoder;
  BiLstmTrace bilstm;
  DenseTrace head;
};

double discriminant_forward(const Matrix& x, const DiscriminantParams& p,
                            const DropoutConfig& dropout, bool training, RngStream& rng,
                            DiscriminantTrace* trace = nullptr);
void discriminant_backward(const DiscriminantTrace& trace, const DiscriminantParams& p,
                           double grad_prob, DiscriminantParams& grads);

// ---------------------------------------------------------------------------
// Baseline comparator: BiLSTM pooling and head only.

struct BaselineParams {
  BiLstmParams bilstm;
  DenseHeadParams head;

  std::size_t input_dim() const { return bilstm.input_dim(); }

  template <class F>
  void visit(F&& f, const std::string& prefix = "") {
    bilstm.visit(f, prefix + "bilstm.");
    head.visit(f, prefix + "head.");
  }
  template <class F>
  void visit(F&& f, const std::string& prefix = "") const {
    bilstm.visit(f, prefix + "bilstm.");
    head.visit(f, prefix + "head.");
  }
};

BaselineParams init_baseline(std::size_t input_dim, const ArchConfig& arch, RngStream& rng);

struct BaselineTrace {
  BiLstmTrace bilstm;
  DenseTrace head;
};

double baseline_bilstm_forward(const Matrix& x, const BaselineParams& p,
                               const DropoutConfig& dropout, bool training, RngStream& rng,
                               BaselineTrace* trace = nullptr);
void baseline_bilstm_backward(const BaselineTrace& trace, const BaselineParams& p,
                              double grad_prob, BaselineParams& grads);

// ---------------------------------------------------------------------------
// Stage-2 fusion model: one transformer stack per channel, concatenation along
// features, shared BiLSTM and head.

/// Keyed by channel; std::map iteration gives the canonical A, V, T, Y order.
using ChannelInputs = std::map<Channel, Matrix>;

struct FusionParams {
  std::map<Channel, TransformerStack> transformers;
  BiLstmParams bilstm;
  DenseHeadParams head;
  bool positional_encoding = false;

  std::vector<Channel> channels() const;
  std::size_t width(Channel c) const { return transformers.at(c).front().d_model; }

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
    for (auto& [channel, stack] : s.transformers) {
      for (std::size_t k = 0; k < stack.size(); ++k) {
        stack[k].visit(f, p + "transformer[" + std::string(channel_name(channel)) + "]." +
                              std::to_string(k) + ".");
      }
    }
    s.bilstm.visit(f, p + "bilstm.");
    s.head.visit(f, p + "head.");
  }
};

/// Width of the Y channel (one prediction per modality).
inline constexpr std::size_t kPredictionChannelWidth = 3;

FusionParams init_fusion(const std::map<Channel, std::size_t>& widths, const ArchConfig& arch,
                         RngStream& rng);

struct FusionTrace {
  std::map<Channel, ResidualTrace> encoders;
  std::vector<std::size_t> offsets;  // column offset of each channel in Z
  BiLstmTrace bilstm;
  DenseTrace head;
};

double fusion_forward(const ChannelInputs& channels, const FusionParams& p,
                      const DropoutConfig& dropout, bool training, RngStream& rng,
                      FusionTrace* trace = nullptr);
void fusion_backward(const FusionTrace& trace, const FusionParams& p, double grad_prob,
                     FusionParams& grads);

/// Raw A, V, T sequences plus the Y channel: the three predictions (order
/// A, V, T) replicated over L_target rows.
ChannelInputs build_fusion_input(const Sample& sample, const std::map<Modality, double>& preds,
                                 std::size_t L_target);

/// Raw modality channels of a sample (no Y).
ChannelInputs raw_channels(const Sample& sample);

// ---------------------------------------------------------------------------
// Adapters used by the generic training loop.

struct DiscriminantModel {
  using Params = DiscriminantParams;
  using Input = Matrix;
  using Trace = DiscriminantTrace;
  DropoutConfig dropout;

  double forward(const Input& x, const Params& p, bool training, RngStream& rng,
                 Trace* t = nullptr) const {
    return discriminant_forward(x, p, dropout, training, rng, t);
  }
  void backward(const Trace& t, const Params& p, double g, Params& grads) const {
    discriminant_backward(t, p, g, grads);
  }
};

struct BaselineModel {
  using Params = BaselineParams;
  using Input = Matrix;
  using Trace = BaselineTrace;
  DropoutConfig dropout;

  double forward(const Input& x, const Params& p, bool training, RngStream& rng,
                 Trace* t = nullptr) const {
    return baseline_bilstm_forward(x, p, dropout, training, rng, t);
  }
  void backward(const Trace& t, const Params& p, double g, Params& grads) const {
    baseline_bilstm_backward(t, p, g, grads);
  }
};

struct FusionModel {
  using Params = FusionParams;
  using Input = ChannelInputs;
  using Trace = FusionTrace;
  DropoutConfig dropout;

  double forward(const Input& x, const Params& p, bool training, RngStream& rng,
                 Trace* t = nullptr) const {
    return fusion_forward(x, p, dropout, training, rng, t);
  }
  void backward(const Trace& t, const Params& p, double g, Params& grads) const {
    fusion_backward(t, p, g, grads);
  }
};

}  // namespace hmfmd
