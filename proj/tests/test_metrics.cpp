#include <cmath>

#include <gtest/gtest.h>

#include "hmfmd/errors.hpp"
#include "hmfmd/metrics.hpp"
#include "hmfmd/rng.hpp"

namespace hmfmd {
namespace {

// Labels and scores drawn once with numpy (seed 12345); AUC from sklearn.
const std::vector<int> kLabels = {1, 0, 1, 0, 0, 1, 1, 1, 1, 0, 1, 0, 1, 1, 0, 0, 0, 1, 1, 1,
                                  1, 0, 1, 1, 1, 1, 0, 0, 0, 0, 0, 1, 0, 1, 0, 0, 0, 1, 1, 0};
const std::vector<double> kScores = {0.1, 0.2, 0.3, 0.5, 0.3, 0.8, 0.2, 0.1, 0.1, 0.6,
                                     0.9, 0.6, 0.9, 0.7, 0.9, 0.9, 0.5, 0.9, 0.5, 0.3,
                                     0.5, 0.7, 0.3, 0.9, 0.3, 0.3, 0.3, 0.4, 0.0, 0.6,
                                     0.3, 0.1, 0.6, 0.2, 0.3, 0.4, 0.2, 0.2, 0.5, 0.5};

TEST(Auc, MatchesReferenceWithTies) {
  EXPECT_NEAR(roc_auc(kScores, kLabels), 0.43107769423558906, 1e-15);
  EXPECT_NEAR(auc_pairwise_oracle(kScores, kLabels), 0.43107769423558906, 1e-15);
}

TEST(Auc, PerfectAndInvertedRankings) {
  const std::vector<double> s = {0.1, 0.4, 0.35, 0.8};
  const std::vector<int> y = {0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(roc_auc(s, y), 0.75);
  const std::vector<int> sep = {0, 1, 0, 1};
  const std::vector<double> s2 = {0.1, 0.9, 0.2, 0.8};
  EXPECT_DOUBLE_EQ(roc_auc(s2, sep), 1.0);
  const std::vector<int> inv = {1, 0, 1, 0};
  EXPECT_DOUBLE_EQ(roc_auc(s2, inv), 0.0);
}

TEST(Auc, AllTiedIsHalf) {
  const std::vector<double> s(6, 0.3);
  const std::vector<int> y = {1, 0, 1, 0, 0, 1};
  EXPECT_DOUBLE_EQ(roc_auc(s, y), 0.5);
}

TEST(Auc, FlippedLabelsComplement) {
  std::vector<int> flipped;
  for (int y : kLabels) flipped.push_back(1 - y);
  EXPECT_NEAR(roc_auc(kScores, kLabels) + roc_auc(kScores, flipped), 1.0, 1e-15);
}

TEST(Auc, InvariantUnderMonotoneTransform) {
  std::vector<double> t;
  for (double s : kScores) t.push_back(3.0 * s * s * s + 7.0);
  EXPECT_DOUBLE_EQ(roc_auc(t, kLabels), roc_auc(kScores, kLabels));
}

TEST(Auc, AgreesWithPairwiseOnRandomInstances) {
  RngStream rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(200);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.uniform_index(10)) / 10.0;
      y[i] = rng.bernoulli(0.4) ? 1 : 0;
    }
    y[0] = 0;
    y[1] = 1;
    EXPECT_NEAR(roc_auc(s, y), auc_pairwise_oracle(s, y), 1e-12);
  }
}

TEST(Auc, SingleClassIsUndefined) {
  const std::vector<double> s = {0.1, 0.2};
  const std::vector<int> y = {1, 1};
  EXPECT_THROW(roc_auc(s, y), EvaluationError);
  EXPECT_THROW(auc_pairwise_oracle(s, y), EvaluationError);
}

TEST(Auc, RejectsLengthMismatchAndNan) {
  const std::vector<double> s = {0.1, 0.2, 0.3};
  const std::vector<int> y = {1, 0};
  EXPECT_THROW(roc_auc(s, y), Error);
  const std::vector<double> bad = {0.1, std::nan("")};
  const std::vector<int> y2 = {1, 0};
  EXPECT_THROW(roc_auc(bad, y2), Error);
}

TEST(Mean, Basic) {
  const std::vector<double> v = {1.0, 2.0, 6.0};
  EXPECT_DOUBLE_EQ(mean(v), 3.0);
}

}  // namespace
}  // namespace hmfmd
