#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hmfmd/adam.hpp"
#include "hmfmd/data.hpp"
#include "hmfmd/errors.hpp"
#include "hmfmd/loss.hpp"
#include "hmfmd/metrics.hpp"
#include "hmfmd/model.hpp"
#include "hmfmd/tensors.hpp"

namespace hmfmd {

enum class LossWeightMode { uniform, class_balanced };

struct TrainConfig {
  double lr = 0.001;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 100;
  std::size_t patience = 3;
  double dropout_linear = 0.4;         // Stage-2 head input
  double dropout_other = 0.2;          // transformer layers, both stages
  double stage1_dropout_linear = 0.2;  // Stage-1 head input
  std::uint64_t seed = 1;
  LossWeightMode loss_weight_mode = LossWeightMode::uniform;
  std::size_t L_target = 0;
  ArchConfig arch;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
  DropoutConfig stage1_dropout() const { return {dropout_other, stage1_dropout_linear}; }
  DropoutConfig stage2_dropout() const { return {dropout_other, dropout_linear}; }
};

struct TrainReport {
  std::vector<double> train_loss;
  std::vector<double> dev_auc;
  std::size_t best_epoch = 0;  // 1-based
  double best_dev_auc = 0.0;
  bool stopped_early = false;

  std::size_t epochs() const { return dev_auc.size(); }
};

enum class StopDecision { continue_training, stop };

/// Stop iff each of the last `patience` entries is <= the maximum reached
/// before them (strict increase required to reset patience).
StopDecision early_stop_check(std::span<const double> dev_auc_history, std::size_t patience);

using Predictions = std::map<std::string, double>;

/// Per-sample loss weights w_n for the given labels.
std::vector<double> loss_weights(std::span<const int> labels, LossWeightMode mode);

/// Probabilities with dropout disabled.
template <class M>
std::vector<double> predict_all(const M& model, const typename M::Params& params,
                                std::span<const typename M::Input* const> inputs) {
  RngStream unused(0);
  std::vector<double> out;
  out.reserve(inputs.size());
  for (const auto* x : inputs) out.push_back(model.forward(*x, params, false, unused));
  return out;
}

/// Minibatch Adam on weighted BCE with per-epoch dev AUC early stopping.
/// Leaves the best-dev-AUC parameters in `params`.
template <class M>
TrainReport fit(const M& model, typename M::Params& params,
                std::span<const typename M::Input* const> train_x, std::span<const int> train_y,
                std::span<const double> train_w,
                std::span<const typename M::Input* const> dev_x, std::span<const int> dev_y,
                const TrainConfig& cfg, const RngStream& rng) {
  cfg.validate();
  if (train_x.empty()) throw InvalidInput("fit: empty train partition");
  if (train_x.size() != train_y.size() || train_x.size() != train_w.size()) {
    throw InvalidInput("fit: train inputs, labels and weights differ in length");
  }
  {
    std::size_t pos = 0;
    for (int y : dev_y) pos += static_cast<std::size_t>(y == 1);
    if (dev_y.empty() || pos == 0 || pos == dev_y.size()) {
      throw EvaluationError("fit: dev partition must contain both classes for AUC");
    }
  }

  auto param_ptrs = tensor_ptrs(params);
  typename M::Params grads = zeros_like(params);
  auto grad_ptrs = tensor_ptrs(std::as_const(grads));
  AdamState adam =
      make_adam_state(tensor_ptrs(std::as_const(params)), cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);

  TrainReport report;
  typename M::Params best = params;
  double best_auc = -std::numeric_limits<double>::infinity();
  typename M::Trace trace;
  const std::size_t n = train_x.size();
  std::vector<std::size_t> order(n);

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    RngStream shuffle_rng = rng.derive("shuffle", epoch);
    shuffle_indices(order, shuffle_rng);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      const double inv_b = 1.0 / static_cast<double>(stop - start);
      set_zero(grads);
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t i = order[k];
        RngStream drop_rng = rng.derive("dropout", (epoch - 1) * n + k);
        const double p = model.forward(*train_x[i], params, true, drop_rng, &trace);
        const double pv[] = {p};
        const int yv[] = {train_y[i]};
        const double wv[] = {train_w[i]};
        loss_sum += weighted_bce_loss(pv, yv, wv);
        const double g = weighted_bce_grad(pv, yv, wv)[0] * inv_b;
        model.backward(trace, params, g, grads);
      }
      adam_step(param_ptrs, grad_ptrs, adam);
    }
    report.train_loss.push_back(loss_sum / static_cast<double>(n));

    const auto dev_pred = predict_all(model, params, dev_x);
    const double auc = roc_auc(dev_pred, dev_y);
    report.dev_auc.push_back(auc);
    if (auc > best_auc) {
      best_auc = auc;
      best = params;
      report.best_epoch = epoch;
    }
    if (early_stop_check(report.dev_auc, cfg.patience) == StopDecision::stop) {
      report.stopped_early = true;
      break;
    }
  }
  report.best_dev_auc = best_auc;
  params = std::move(best);
  return report;
}

// ---------------------------------------------------------------------------
// Two-stage pipeline.

using Stage1Params = std::variant<DiscriminantParams, BaselineParams>;

struct Stage1Result {
  Modality modality = Modality::A;
  Variant variant = Variant::ours;
  Stage1Params params;
  TrainReport report;
  Predictions predictions;  // every sample in every partition
};

/// Master-seed-derived stream for one training job, keyed by a tag.
RngStream job_stream(std::uint64_t seed, const std::string& tag);

Stage1Result train_stage1(const Dataset& dataset, Modality modality, Variant variant,
                          const TrainConfig& cfg);

Predictions predict_stage1(const Stage1Params& params, Modality modality, const DropoutConfig&,
                           const Dataset& dataset, std::span<const std::size_t> indices);

/// Frozen Stage-1 outputs consumed by Stage 2.
struct Stage1Artifacts {
  Stage1Variant variant;
  std::array<Predictions, 3> predictions;  // indexed by Modality

  static Stage1Artifacts from_results(std::span<const Stage1Result> results);
  /// Stage-1 predictions of one sample, throws InvalidInput if any is missing.
  std::map<Modality, double> for_sample(const std::string& id) const;
};

struct Stage2Result {
  std::vector<Channel> channels;
  FusionParams params;
  TrainReport report;
  Predictions predictions;
  std::optional<Stage1Variant> stage1_variant;  // set when Y is used
};

/// Channel inputs of one sample for the requested subset.
ChannelInputs fusion_inputs(const Sample& sample, const std::vector<Channel>& channels,
                            const Stage1Artifacts* stage1, std::size_t L_target);

Stage2Result train_stage2(const Dataset& dataset, const Stage1Artifacts* stage1,
                          const std::vector<Channel>& channels, const TrainConfig& cfg);

Predictions predict_fusion(const FusionParams& params, const std::vector<Channel>& channels,
                           const Stage1Artifacts* stage1, const Dataset& dataset,
                           std::span<const std::size_t> indices);

/// Per-id arithmetic mean across models. All maps must share one id set.
Predictions ensemble_average(std::span<const Predictions> prediction_lists);

struct Evaluation {
  double auc = 0.0;
  Predictions predictions;
};

/// AUC over one partition from per-id predictions covering it.
Evaluation evaluate_predictions(const Predictions& predictions, const Dataset& dataset,
                                Partition partition);

}  // namespace hmfmd
