#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "hmfmd/errors.hpp"
#include "hmfmd/metrics.hpp"
#include "hmfmd/synth.hpp"
#include "hmfmd/training.hpp"

namespace hmfmd {
namespace {

struct StopPoint {
  std::size_t epochs;  // epochs run
  std::size_t best;    // 1-based
};

StopPoint run_checker(const std::vector<double>& h, std::size_t patience) {
  std::size_t best = 0;
  for (std::size_t t = 1; t <= h.size(); ++t) {
    if (best == 0 || h[t - 1] > h[best - 1]) best = t;
    if (early_stop_check(std::span(h).first(t), patience) == StopDecision::stop) return {t, best};
  }
  return {h.size(), best};
}

// Rescans every prefix from scratch.
StopPoint brute_force(const std::vector<double>& h, std::size_t patience) {
  for (std::size_t t = patience + 1; t <= h.size(); ++t) {
    double before = -1e300;
    for (std::size_t i = 0; i + patience < t; ++i) before = std::max(before, h[i]);
    bool improved = false;
    for (std::size_t i = t - patience; i < t; ++i) improved = improved || h[i] > before;
    if (!improved) {
      std::size_t best = 1;
      for (std::size_t i = 1; i < t; ++i)
        if (h[i] > h[best - 1]) best = i + 1;
      return {t, best};
    }
  }
  std::size_t best = 1;
  for (std::size_t i = 1; i < h.size(); ++i)
    if (h[i] > h[best - 1]) best = i + 1;
  return {h.size(), best};
}

TEST(EarlyStop, MonotoneDeclineStopsAfterPatience) {
  const std::vector<double> h = {0.6, 0.59, 0.58, 0.57};
  const auto s = run_checker(h, 3);
  EXPECT_EQ(s.epochs, 4u);
  EXPECT_EQ(s.best, 1u);
}

TEST(EarlyStop, TieDoesNotResetPatience) {
  const std::vector<double> h = {0.6, 0.6, 0.6, 0.6, 0.7};
  EXPECT_EQ(run_checker(h, 3).epochs, 4u);
}

TEST(EarlyStop, StrictImprovementResets) {
  const std::vector<double> h = {0.6, 0.5, 0.5, 0.61, 0.5, 0.5, 0.5};
  const auto s = run_checker(h, 3);
  EXPECT_EQ(s.epochs, 7u);
  EXPECT_EQ(s.best, 4u);
}

TEST(EarlyStop, AgreesWithRescanOnRandomHistories) {
  RngStream rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t patience = 1 + rng.uniform_index(5);
    std::vector<double> h(1 + rng.uniform_index(100));
    for (double& v : h) v = static_cast<double>(rng.uniform_index(20)) / 20.0;
    const auto a = run_checker(h, patience);
    const auto b = brute_force(h, patience);
    ASSERT_EQ(a.epochs, b.epochs) << "trial " << trial;
    ASSERT_EQ(a.best, b.best) << "trial " << trial;
  }
}

TEST(LossWeights, ClassBalancedEqualizesClassMass) {
  const std::vector<int> y = {1, 0, 0, 0};
  const auto w = loss_weights(y, LossWeightMode::class_balanced);
  EXPECT_NEAR(w[0], 3.0 * w[1], 1e-12);
  double sum = 0;
  for (double v : w) sum += v;
  EXPECT_NEAR(sum, 4.0, 1e-12);
  for (double v : loss_weights(y, LossWeightMode::uniform)) EXPECT_EQ(v, 1.0);
}

TEST(Ensemble, IdenticalModelsReproduceScores) {
  const Predictions p = {{"a", 0.1}, {"b", 0.7}, {"c", 0.3}};
  const std::vector<Predictions> lists = {p, p, p};
  const auto avg = ensemble_average(lists);
  for (const auto& [id, v] : p) EXPECT_EQ(avg.at(id), v);
}

TEST(Ensemble, AveragesPerId) {
  const std::vector<Predictions> lists = {{{"a", 0.2}, {"b", 0.9}}, {{"a", 0.4}, {"b", 0.3}}};
  const auto avg = ensemble_average(lists);
  EXPECT_DOUBLE_EQ(avg.at("a"), 0.3);
  EXPECT_DOUBLE_EQ(avg.at("b"), 0.6);
}

TEST(Ensemble, RejectsMismatchedIds) {
  const std::vector<Predictions> lists = {{{"a", 0.2}}, {{"b", 0.4}}};
  EXPECT_THROW(ensemble_average(lists), InvalidInput);
  EXPECT_THROW(ensemble_average(std::span<const Predictions>{}), InvalidInput);
}

class SmallTraining : public ::testing::Test {
 protected:
  static Dataset make() {
    SynthConfig c;
    c.n_train = 60;
    c.n_dev = 30;
    c.n_test = 10;
    c.L_target = 5;
    c.window_max = 3;
    c.modality_dims = {3, 4, 5};
    return generate_synthetic(c);
  }
  static TrainConfig cfg() {
    TrainConfig t;
    t.lr = 0.01;
    t.batch_size = 16;
    t.max_epochs = 4;
    t.patience = 2;
    t.L_target = 5;
    t.arch.hidden_dim = 6;
    t.arch.lstm_layers = 1;
    return t;
  }
  Dataset ds = make();
};

TEST_F(SmallTraining, BestParametersAreRestored) {
  const auto r = train_stage1(ds, Modality::A, Variant::ours, cfg());
  ASSERT_GE(r.report.epochs(), 1u);
  ASSERT_LE(r.report.epochs(), 4u);
  EXPECT_EQ(r.report.dev_auc[r.report.best_epoch - 1], r.report.best_dev_auc);
  EXPECT_EQ(r.predictions.size(), ds.samples.size());
  EXPECT_DOUBLE_EQ(evaluate_predictions(r.predictions, ds, Partition::dev).auc,
                   r.report.best_dev_auc);
}

TEST_F(SmallTraining, SameSeedIsBitwiseIdentical) {
  const auto a = train_stage1(ds, Modality::V, Variant::baseline_bilstm, cfg());
  const auto b = train_stage1(ds, Modality::V, Variant::baseline_bilstm, cfg());
  EXPECT_EQ(a.predictions, b.predictions);
  EXPECT_EQ(a.report.train_loss, b.report.train_loss);
  auto other = cfg();
  other.seed = 2;
  const auto c = train_stage1(ds, Modality::V, Variant::baseline_bilstm, other);
  EXPECT_NE(a.predictions, c.predictions);
}

TEST_F(SmallTraining, StageTwoWithPredictionChannel) {
  std::vector<Stage1Result> s1;
  for (Modality m : kModalities) s1.push_back(train_stage1(ds, m, Variant::ours, cfg()));
  const auto artifacts = Stage1Artifacts::from_results(s1);
  EXPECT_EQ(artifacts.variant.tag(), "A,V,T");
  const auto r = train_stage2(ds, &artifacts, parse_channel_list("A,V,T,Y"), cfg());
  ASSERT_TRUE(r.stage1_variant.has_value());
  EXPECT_EQ(r.params.channels().size(), 4u);
  EXPECT_DOUBLE_EQ(evaluate_predictions(r.predictions, ds, Partition::dev).auc,
                   r.report.best_dev_auc);
  EXPECT_THROW(train_stage2(ds, nullptr, parse_channel_list("A,Y"), cfg()), InvalidInput);
}

TEST_F(SmallTraining, SingleClassDevIsRejected) {
  for (auto& s : ds.samples) {
    if (s.partition == Partition::dev) s.label = 1;
  }
  EXPECT_THROW(train_stage1(ds, Modality::A, Variant::ours, cfg()), EvaluationError);
}

TEST_F(SmallTraining, MismatchedLengthIsRejected) {
  auto c = cfg();
  c.L_target = 6;
  EXPECT_THROW(train_stage1(ds, Modality::A, Variant::ours, c), InvalidInput);
}

TEST(TrainConfig, ValidateRejectsBadValues) {
  TrainConfig c;
  c.L_target = 4;
  EXPECT_NO_THROW(c.validate());
  c.lr = 0.0;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = TrainConfig{};
  c.L_target = 4;
  c.dropout_linear = 1.0;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = TrainConfig{};
  c.batch_size = 0;
  c.L_target = 4;
  EXPECT_THROW(c.validate(), InvalidInput);
}

}  // namespace
}  // namespace hmfmd
