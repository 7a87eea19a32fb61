#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "hmfmd/dropout.hpp"
#include "hmfmd/errors.hpp"
#include "hmfmd/init.hpp"
#include "hmfmd/matrix.hpp"
#include "hmfmd/rng.hpp"
#include "test_support.hpp"

namespace hmfmd {
namespace {

TEST(Matrix, ConstructorRejectsLengthMismatch) {
  EXPECT_THROW(Matrix(2, 3, std::vector<double>(5)), ShapeError);
  EXPECT_NO_THROW(Matrix(2, 3, std::vector<double>(6)));
}

TEST(Matrix, MatmulSmallProduct) {
  const Matrix a(2, 3, {1, 2, 3, 4, 5, 6});
  const Matrix b(3, 2, {7, 8, 9, 10, 11, 12});
  EXPECT_EQ(matmul(a, b), Matrix(2, 2, {58, 64, 139, 154}));
  EXPECT_THROW(matmul(a, a), ShapeError);
}

TEST(Matrix, TransposedProductsAgreeWithExplicitTranspose) {
  const Matrix a = test::fill(3, 4, 0.2);
  const Matrix b = test::fill(5, 4, 1.1);
  Matrix bt(4, 5);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 4; ++c) bt(c, r) = b(r, c);
  const Matrix nt = matmul_nt(a, b);
  const Matrix ref = matmul(a, bt);
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_DOUBLE_EQ(nt[i], ref[i]);

  Matrix at(4, 3);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 4; ++c) at(c, r) = a(r, c);
  const Matrix c = test::fill(3, 2, 0.7);
  Matrix acc(4, 2, 1.0);
  matmul_tn_acc(a, c, acc);
  const Matrix want = matmul(at, c);
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_DOUBLE_EQ(acc[i], 1.0 + want[i]);
}

TEST(Matrix, HconcatAndBias) {
  const Matrix parts[] = {Matrix(2, 1, {1, 2}), Matrix(2, 2, {3, 4, 5, 6})};
  EXPECT_EQ(hconcat(parts), Matrix(2, 3, {1, 3, 4, 2, 5, 6}));
  Matrix m(2, 2, 1.0);
  add_row_bias(m, Matrix(1, 2, {10, 20}));
  EXPECT_EQ(m, Matrix(2, 2, {11, 21, 11, 21}));
  Matrix sums(1, 2);
  acc_col_sums(m, sums);
  EXPECT_EQ(sums, Matrix(1, 2, {22, 42}));
}

TEST(Matrix, FiniteCheck) {
  Matrix m(1, 2, 0.0);
  EXPECT_TRUE(all_finite(m));
  m[1] = NAN;
  EXPECT_FALSE(all_finite(m));
}

// Reference outputs of the SplitMix64 generator seeded with 0.
TEST(Rng, MatchesSplitMix64Reference) {
  RngStream r(0);
  EXPECT_EQ(r.next_u64(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(r.next_u64(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(r.next_u64(), 0x06c45d188009454fULL);
}

TEST(Rng, SameSeedSameStream) {
  RngStream a(99), b(99);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.normal(), b.normal());
}

TEST(Rng, DerivedStreamsDifferByTagAndIndex) {
  const RngStream root(5);
  std::set<std::uint64_t> firsts;
  for (const char* tag : {"init", "train", "dropout"}) {
    for (std::uint64_t i = 0; i < 4; ++i) firsts.insert(root.derive(tag, i).next_u64());
  }
  EXPECT_EQ(firsts.size(), 12u);
  EXPECT_EQ(root.derive("init").next_u64(), RngStream(5).derive("init").next_u64());
}

TEST(Rng, UniformMomentsAndRange) {
  RngStream r(1);
  double sum = 0, sq = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 0.002);
}

TEST(Rng, NormalMoments) {
  RngStream r(2);
  double sum = 0, sq = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.02);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(Rng, UniformIndexCoversRange) {
  RngStream r(3);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 7000; ++i) counts[r.uniform_index(7)]++;
  for (int c : counts) EXPECT_GT(c, 800);
  EXPECT_THROW(r.uniform_index(0), InvalidInput);
}

TEST(Init, ZerosSchemeIsExactlyZero) {
  RngStream r(1);
  const Matrix m = seeded_init(4, 5, InitScheme::zeros, 5, r);
  for (double v : m.values()) EXPECT_EQ(v, 0.0);
}

TEST(Init, SameSeedIdenticalTensors) {
  RngStream a(11), b(11);
  EXPECT_EQ(seeded_init(3, 3, InitScheme::uniform_scaled, 3, a),
            seeded_init(3, 3, InitScheme::uniform_scaled, 3, b));
}

TEST(Init, UniformScaledBoundAndMean) {
  RngStream r(4);
  const std::size_t n = 100000;
  const Matrix m = seeded_init(1, n, InitScheme::uniform_scaled, 100, r);
  double sum = 0;
  for (double v : m.values()) {
    ASSERT_LE(std::abs(v), 0.1);
    sum += v;
  }
  // Var of U(-0.1, 0.1) is 0.01/3; three standard errors of the mean.
  const double sigma = std::sqrt(0.01 / 3.0 / static_cast<double>(n));
  EXPECT_LT(std::abs(sum / static_cast<double>(n)), 3.0 * sigma);
}

TEST(Init, ZeroFanInRejected) {
  RngStream r(1);
  EXPECT_THROW(seeded_init(2, 2, InitScheme::uniform_scaled, 0, r), InvalidInput);
}

TEST(Dropout, InactiveWhenNotTrainingOrZeroRate) {
  RngStream r(1);
  EXPECT_TRUE(dropout_mask(3, 3, 0.5, false, r).empty());
  EXPECT_TRUE(dropout_mask(3, 3, 0.0, true, r).empty());
  EXPECT_THROW(dropout_mask(3, 3, 1.0, true, r), InvalidInput);
}

TEST(Dropout, InvertedScalingPreservesMean) {
  RngStream r(8);
  const Matrix mask = dropout_mask(1, 200000, 0.4, true, r);
  double sum = 0;
  for (double v : mask.values()) {
    ASSERT_TRUE(v == 0.0 || std::abs(v - 1.0 / 0.6) < 1e-15);
    sum += v;
  }
  EXPECT_NEAR(sum / 200000.0, 1.0, 0.01);
}

}  // namespace
}  // namespace hmfmd
