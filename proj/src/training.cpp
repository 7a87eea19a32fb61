#include "hmfmd/training.hpp"

#include <algorithm>
#include <cmath>

namespace hmfmd {

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw InvalidInput("train config: lr must be > 0");
  if (batch_size == 0) throw InvalidInput("train config: batch_size must be >= 1");
  if (max_epochs == 0) throw InvalidInput("train config: max_epochs must be >= 1");
  if (patience == 0) throw InvalidInput("train config: patience must be >= 1");
  for (double d : {dropout_linear, dropout_other, stage1_dropout_linear}) {
    if (!(d >= 0.0 && d < 1.0)) throw InvalidInput("train config: dropout must lie in [0, 1)");
  }
  if (arch.hidden_dim == 0 || arch.lstm_layers == 0 || arch.transformer_layers == 0 ||
      arch.n_heads == 0 || arch.ff_multiplier == 0) {
    throw InvalidInput("train config: architecture sizes must be >= 1");
  }
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) ||
      !(adam_eps > 0.0)) {
    throw InvalidInput("train config: invalid Adam hyperparameters");
  }
}

StopDecision early_stop_check(std::span<const double> history, std::size_t patience) {
  if (patience == 0 || history.size() <= patience) return StopDecision::continue_training;
  const auto split = history.end() - static_cast<std::ptrdiff_t>(patience);
  const double best_before = *std::max_element(history.begin(), split);
  const bool improved = std::any_of(split, history.end(), [&](double v) { return v > best_before; });
  return improved ? StopDecision::continue_training : StopDecision::stop;
}

std::vector<double> loss_weights(std::span<const int> labels, LossWeightMode mode) {
  std::vector<double> w(labels.size(), 1.0);
  if (mode == LossWeightMode::uniform) return w;
  std::size_t pos = 0;
  for (int y : labels) pos += static_cast<std::size_t>(y == 1);
  const std::size_t neg = labels.size() - pos;
  const double n = static_cast<double>(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::size_t count = labels[i] == 1 ? pos : neg;
    w[i] = n / (2.0 * static_cast<double>(count));
  }
  return w;
}

RngStream job_stream(std::uint64_t seed, const std::string& tag) {
  return RngStream(seed).derive(tag);
}

namespace {

struct PartitionView {
  std::vector<std::size_t> idx;
  std::vector<int> labels;
};

PartitionView view(const Dataset& ds, Partition p) {
  PartitionView v;
  v.idx = ds.indices(p);
  for (std::size_t i : v.idx) v.labels.push_back(ds.samples[i].label);
  return v;
}

std::vector<std::size_t> all_indices(const Dataset& ds) {
  std::vector<std::size_t> idx(ds.samples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return idx;
}

template <class M>
Predictions predict_ids(const M& model, const typename M::Params& params,
                        const std::vector<const typename M::Input*>& inputs, const Dataset& ds,
                        std::span<const std::size_t> idx) {
  const auto probs = predict_all(model, params, std::span(inputs));
  Predictions out;
  for (std::size_t k = 0; k < idx.size(); ++k) out[ds.samples[idx[k]].id] = probs[k];
  return out;
}

template <class M>
TrainReport fit_on(const M& model, typename M::Params& params,
                   const std::vector<typename M::Input>& inputs_by_sample, const Dataset& ds,
                   const TrainConfig& cfg, const RngStream& rng) {
  const auto train = view(ds, Partition::train);
  const auto dev = view(ds, Partition::dev);
  if (train.idx.empty()) throw InvalidInput("dataset has no train partition");
  if (dev.idx.empty()) throw InvalidInput("dataset has no dev partition");
  std::vector<const typename M::Input*> tx, dx;
  for (std::size_t i : train.idx) tx.push_back(&inputs_by_sample[i]);
  for (std::size_t i : dev.idx) dx.push_back(&inputs_by_sample[i]);
  const auto weights = loss_weights(train.labels, cfg.loss_weight_mode);
  return fit(model, params, std::span(tx), std::span(train.labels), std::span(weights),
             std::span(dx), std::span(dev.labels), cfg, rng);
}

void require_length(const Dataset& ds, const TrainConfig& cfg) {
  if (cfg.L_target != 0 && cfg.L_target != ds.L_target) {
    throw InvalidInput("train config L_target " + std::to_string(cfg.L_target) +
                       " != dataset L_target " + std::to_string(ds.L_target));
  }
}

}  // namespace

Stage1Result train_stage1(const Dataset& dataset, Modality modality, Variant variant,
                          const TrainConfig& cfg) {
  cfg.validate();
  require_length(dataset, cfg);
  const RngStream base = job_stream(cfg.seed, "stage1/" + std::string(modality_name(modality)));
  RngStream init_rng = base.derive("init");
  const RngStream train_rng = base.derive("train");
  const std::size_t dim = dataset.dim(modality);

  std::vector<Matrix> inputs;
  inputs.reserve(dataset.samples.size());
  for (const auto& s : dataset.samples) inputs.push_back(s.features(modality));

  Stage1Result result;
  result.modality = modality;
  result.variant = variant;
  const auto idx = all_indices(dataset);
  if (variant == Variant::ours) {
    DiscriminantModel model{cfg.stage1_dropout()};
    auto params = init_discriminant(dim, cfg.arch, init_rng);
    result.report = fit_on(model, params, inputs, dataset, cfg, train_rng);
    result.params = std::move(params);
  } else {
    BaselineModel model{cfg.stage1_dropout()};
    auto params = init_baseline(dim, cfg.arch, init_rng);
    result.report = fit_on(model, params, inputs, dataset, cfg, train_rng);
    result.params = std::move(params);
  }
  result.predictions =
      predict_stage1(result.params, modality, cfg.stage1_dropout(), dataset, idx);
  return result;
}

Predictions predict_stage1(const Stage1Params& params, Modality modality,
                           const DropoutConfig& dropout, const Dataset& dataset,
                           std::span<const std::size_t> indices) {
  std::vector<const Matrix*> inputs;
  for (std::size_t i : indices) inputs.push_back(&dataset.samples[i].features(modality));
  if (const auto* p = std::get_if<DiscriminantParams>(&params)) {
    return predict_ids(DiscriminantModel{dropout}, *p, inputs, dataset, indices);
  }
  return predict_ids(BaselineModel{dropout}, std::get<BaselineParams>(params), inputs, dataset,
                     indices);
}

Stage1Artifacts Stage1Artifacts::from_results(std::span<const Stage1Result> results) {
  Stage1Artifacts a;
  std::array<bool, 3> seen{};
  for (const auto& r : results) {
    a.variant[r.modality] = r.variant;
    a.predictions[index_of(r.modality)] = r.predictions;
    seen[index_of(r.modality)] = true;
  }
  for (Modality m : kModalities) {
    if (!seen[index_of(m)]) {
      throw InvalidInput("stage-1 artifacts missing modality " + std::string(modality_name(m)));
    }
  }
  return a;
}

std::map<Modality, double> Stage1Artifacts::for_sample(const std::string& id) const {
  std::map<Modality, double> out;
  for (Modality m : kModalities) {
    const auto& preds = predictions[index_of(m)];
    const auto it = preds.find(id);
    if (it == preds.end()) {
      throw InvalidInput("stage-1 predictions for modality " + std::string(modality_name(m)) +
                         " missing sample " + id);
    }
    out[m] = it->second;
  }
  return out;
}

ChannelInputs fusion_inputs(const Sample& sample, const std::vector<Channel>& channels,
                            const Stage1Artifacts* stage1, std::size_t L_target) {
  const bool wants_y = std::find(channels.begin(), channels.end(), Channel::Y) != channels.end();
  ChannelInputs all;
  if (wants_y) {
    if (!stage1) throw InvalidInput("channel Y requested without stage-1 artifacts");
    all = build_fusion_input(sample, stage1->for_sample(sample.id), L_target);
  } else {
    all = raw_channels(sample);
  }
  ChannelInputs out;
  for (Channel c : channels) out[c] = std::move(all.at(c));
  return out;
}

namespace {

std::map<Channel, std::size_t> channel_widths(const Dataset& ds,
                                              const std::vector<Channel>& channels) {
  std::map<Channel, std::size_t> widths;
  for (Channel c : channels) {
    widths[c] = c == Channel::Y ? kPredictionChannelWidth : ds.dim(static_cast<Modality>(c));
  }
  return widths;
}

}  // namespace

Stage2Result train_stage2(const Dataset& dataset, const Stage1Artifacts* stage1,
                          const std::vector<Channel>& channels, const TrainConfig& cfg) {
  cfg.validate();
  require_length(dataset, cfg);
  if (channels.empty()) throw InvalidInput("stage 2: at least one channel required");
  const bool wants_y = std::find(channels.begin(), channels.end(), Channel::Y) != channels.end();
  if (wants_y && !stage1) throw InvalidInput("stage 2: channel Y requested without stage-1 artifacts");

  Stage2Result result;
  result.channels = channels;
  std::sort(result.channels.begin(), result.channels.end());
  if (wants_y) result.stage1_variant = stage1->variant;

  const RngStream base = job_stream(cfg.seed, "stage2/" + format_channel_list(result.channels));
  RngStream init_rng = base.derive("init");
  const RngStream train_rng = base.derive("train");

  std::vector<ChannelInputs> inputs;
  inputs.reserve(dataset.samples.size());
  for (const auto& s : dataset.samples) {
    inputs.push_back(fusion_inputs(s, result.channels, stage1, dataset.L_target));
  }
  FusionModel model{cfg.stage2_dropout()};
  result.params = init_fusion(channel_widths(dataset, result.channels), cfg.arch, init_rng);
  result.report = fit_on(model, result.params, inputs, dataset, cfg, train_rng);

  std::vector<const ChannelInputs*> ptrs;
  for (const auto& x : inputs) ptrs.push_back(&x);
  result.predictions = predict_ids(model, result.params, ptrs, dataset, all_indices(dataset));
  return result;
}

Predictions predict_fusion(const FusionParams& params, const std::vector<Channel>& channels,
                           const Stage1Artifacts* stage1, const Dataset& dataset,
                           std::span<const std::size_t> indices) {
  std::vector<ChannelInputs> inputs;
  for (std::size_t i : indices) {
    inputs.push_back(fusion_inputs(dataset.samples[i], channels, stage1, dataset.L_target));
  }
  std::vector<const ChannelInputs*> ptrs;
  for (const auto& x : inputs) ptrs.push_back(&x);
  return predict_ids(FusionModel{}, params, ptrs, dataset, indices);
}

namespace {

// Mean of `values` from an error-free (double-double) sum followed by one
// remainder correction of the quotient. Averaging k copies of x returns x.
double compensated_mean(std::span<const double> values) {
  double hi = 0.0, lo = 0.0;
  for (double x : values) {
    const double s = hi + x;
    const double bb = s - hi;
    lo += (hi - (s - bb)) + (x - bb);
    hi = s;
  }
  const double k = static_cast<double>(values.size());
  const double q = hi / k;
  const double r = std::fma(-q, k, hi) + lo;
  return q + r / k;
}

}  // namespace

Predictions ensemble_average(std::span<const Predictions> lists) {
  if (lists.empty()) throw InvalidInput("ensemble_average: no prediction lists");
  const Predictions& first = lists.front();
  for (std::size_t k = 1; k < lists.size(); ++k) {
    const Predictions& other = lists[k];
    bool same = other.size() == first.size();
    for (auto a = first.begin(), b = other.begin(); same && a != first.end(); ++a, ++b) {
      same = a->first == b->first;
    }
    if (!same) {
      throw InvalidInput("ensemble_average: prediction list " + std::to_string(k) +
                         " has a different id set");
    }
  }
  Predictions out;
  std::vector<double> column(lists.size());
  for (const auto& [id, p0] : first) {
    for (std::size_t k = 0; k < lists.size(); ++k) column[k] = lists[k].at(id);
    out[id] = compensated_mean(column);
  }
  return out;
}

Evaluation evaluate_predictions(const Predictions& predictions, const Dataset& dataset,
                                Partition partition) {
  Evaluation ev;
  std::vector<double> scores;
  std::vector<int> labels;
  for (std::size_t i : dataset.indices(partition)) {
    const Sample& s = dataset.samples[i];
    const auto it = predictions.find(s.id);
    if (it == predictions.end()) throw InvalidInput("evaluate: no prediction for sample " + s.id);
    scores.push_back(it->second);
    labels.push_back(s.label);
    ev.predictions[s.id] = it->second;
  }
  ev.auc = roc_auc(scores, labels);
  return ev;
}

}  // namespace hmfmd
