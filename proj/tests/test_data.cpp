#include <cmath>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "hmfmd/data.hpp"
#include "hmfmd/errors.hpp"
#include "hmfmd/metrics.hpp"
#include "hmfmd/synth.hpp"
#include "test_support.hpp"

namespace hmfmd {
namespace {

namespace fs = std::filesystem;

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// Returns the what() of the ParseError thrown by f, or "" if none.
template <class F>
std::string parse_error(F&& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

TEST(FeatureCsv, GroupsByIdAndOrdersByTimestep) {
  test::TempDir dir("csv");
  write(dir / "a.csv", "sample_id,timestep,f0,f1\ns1,1,3,4\ns1,0,1,2\ns2,0,5,6\n");
  const auto t = load_feature_csv(dir / "a.csv", Modality::A, 2);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.at("s1").data, Matrix(2, 2, {1, 2, 3, 4}));
  EXPECT_EQ(t.at("s2").data, Matrix(1, 2, {5, 6}));
  EXPECT_EQ(feature_csv_dim(dir / "a.csv"), 2u);
}

TEST(FeatureCsv, ErrorsCarryLineNumbers) {
  test::TempDir dir("csv");
  write(dir / "a.csv", "sample_id,timestep,f0\ns1,0,1\ns1,1,abc\n");
  EXPECT_NE(parse_error([&] { load_feature_csv(dir / "a.csv", Modality::A, 1); }).find("a.csv:3:"),
            std::string::npos);
  write(dir / "b.csv", "sample_id,timestep,f0\ns1,0,1\ns1,0,2\n");
  EXPECT_NE(parse_error([&] { load_feature_csv(dir / "b.csv", Modality::A, 1); }).find(":3:"),
            std::string::npos);
  write(dir / "c.csv", "sample_id,timestep,f0\ns1,0\n");
  EXPECT_NE(parse_error([&] { load_feature_csv(dir / "c.csv", Modality::A, 1); }).find(":2:"),
            std::string::npos);
  write(dir / "d.csv", "id,t,f0\n");
  EXPECT_NE(parse_error([&] { load_feature_csv(dir / "d.csv", Modality::A, 1); }).find(":1:"),
            std::string::npos);
}

TEST(FeatureCsv, DimensionMismatchIsShapeError) {
  test::TempDir dir("csv");
  write(dir / "a.csv", "sample_id,timestep,f0,f1\ns1,0,1,2\n");
  EXPECT_THROW(load_feature_csv(dir / "a.csv", Modality::A, 3), ShapeError);
}

TEST(Labels, RejectsValuesOutsideBinary) {
  test::TempDir dir("csv");
  write(dir / "labels.csv", "sample_id,label\ns1,1\ns2,2\n");
  EXPECT_NE(parse_error([&] { load_labels(dir / "labels.csv"); }).find(":3:"), std::string::npos);
  write(dir / "labels.csv", "sample_id,label\ns1,1\ns1,0\n");
  EXPECT_THROW(load_labels(dir / "labels.csv"), ParseError);
  write(dir / "parts.csv", "sample_id,partition\ns1,holdout\n");
  EXPECT_THROW(load_partitions(dir / "parts.csv"), ParseError);
}

TEST(NormalizeLength, FrontPadsShortSequences) {
  const Matrix m(2, 2, {1, 2, 3, 4});
  EXPECT_EQ(normalize_length(m, 4), Matrix(4, 2, {0, 0, 0, 0, 1, 2, 3, 4}));
  EXPECT_EQ(normalize_length(m, 3, -1.0), Matrix(3, 2, {-1, -1, 1, 2, 3, 4}));
}

TEST(NormalizeLength, KeepsLastRowsOfLongSequences) {
  const Matrix m(4, 1, {1, 2, 3, 4});
  EXPECT_EQ(normalize_length(m, 2), Matrix(2, 1, {3, 4}));
  EXPECT_EQ(normalize_length(m, 4), m);
  EXPECT_THROW(normalize_length(m, 0), InvalidInput);
}

std::array<FeatureTable, 3> tables_for(const std::vector<std::string>& ids) {
  std::array<FeatureTable, 3> t;
  for (Modality m : kModalities) {
    for (const auto& id : ids) t[index_of(m)][id] = {m, Matrix(2, 1 + index_of(m), 1.0), "x"};
  }
  return t;
}

TEST(Assemble, BuildsAlignedSamples) {
  const auto t = tables_for({"a", "b"});
  const Dataset ds = assemble_dataset(t, {{"a", 1}, {"b", 0}},
                                      {{"a", Partition::train}, {"b", Partition::dev}}, 3);
  ASSERT_EQ(ds.samples.size(), 2u);
  EXPECT_EQ(ds.modality_dims, (std::array<std::size_t, 3>{1, 2, 3}));
  EXPECT_EQ(ds.samples[0].features(Modality::T).rows(), 3u);
  EXPECT_EQ(ds.indices(Partition::dev), std::vector<std::size_t>{1});
}

TEST(Assemble, ReportsMissingModality) {
  auto t = tables_for({"a", "b"});
  t[index_of(Modality::V)].erase("b");
  try {
    assemble_dataset(t, {{"a", 1}, {"b", 0}}, {{"a", Partition::train}, {"b", Partition::dev}},
                     3);
    FAIL() << "expected AssemblyError";
  } catch (const AssemblyError& e) {
    EXPECT_NE(std::string(e.what()).find("b"), std::string::npos);
  }
}

TEST(Assemble, RejectsUnlabeledAndUnpartitioned) {
  const auto t = tables_for({"a", "b"});
  EXPECT_THROW(assemble_dataset(t, {{"a", 1}}, {{"a", Partition::train}}, 2), AssemblyError);
  EXPECT_THROW(assemble_dataset(t, {{"a", 1}, {"b", 0}}, {{"a", Partition::train}}, 2),
               AssemblyError);
}

TEST(Assemble, RejectsInconsistentDims) {
  auto t = tables_for({"a", "b"});
  t[0]["b"].data = Matrix(2, 4, 0.0);
  EXPECT_THROW(assemble_dataset(t, {{"a", 1}, {"b", 0}},
                                {{"a", Partition::train}, {"b", Partition::train}}, 2),
               AssemblyError);
}

Dataset tiny_dataset(std::size_t n) {
  SynthConfig c;
  c.n_train = n;
  c.n_dev = 4;
  c.n_test = 2;
  return generate_synthetic(c);
}

TEST(BatchIter, LastBatchHoldsRemainder) {
  const Dataset ds = tiny_dataset(10);
  RngStream rng(1);
  const auto batches = batch_iter(ds, Partition::train, 3, false, rng);
  std::vector<std::size_t> sizes;
  for (const auto& b : batches) sizes.push_back(b.size());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{3, 3, 3, 1}));
}

TEST(BatchIter, ShuffledBatchesCoverPartitionOnce) {
  const Dataset ds = tiny_dataset(10);
  RngStream rng(1);
  std::multiset<std::size_t> seen;
  for (const auto& b : batch_iter(ds, Partition::train, 4, true, rng)) seen.insert(b.begin(), b.end());
  const auto want = ds.indices(Partition::train);
  EXPECT_EQ(seen, std::multiset<std::size_t>(want.begin(), want.end()));
  EXPECT_THROW(batch_iter(ds, Partition::train, 0, false, rng), InvalidInput);
}

TEST(DatasetDir, CsvRoundTrip) {
  test::TempDir dir("ds");
  const Dataset ds = tiny_dataset(6);
  write_dataset_csv(ds, dir.path());
  const Dataset back = load_dataset_dir(dir.path(), ds.L_target);
  ASSERT_EQ(back.samples.size(), ds.samples.size());
  EXPECT_EQ(back.modality_dims, ds.modality_dims);
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    EXPECT_EQ(back.samples[i].id, ds.samples[i].id);
    EXPECT_EQ(back.samples[i].label, ds.samples[i].label);
    EXPECT_EQ(back.samples[i].partition, ds.samples[i].partition);
    for (Modality m : kModalities) {
      EXPECT_EQ(back.samples[i].features(m), ds.samples[i].features(m));
    }
  }
}

TEST(Synth, SameSeedSameData) {
  SynthConfig c;
  c.n_train = 20;
  c.n_dev = 10;
  c.n_test = 10;
  const Dataset a = generate_synthetic(c);
  const Dataset b = generate_synthetic(c);
  ASSERT_EQ(a.samples.size(), 40u);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].id, b.samples[i].id);
    EXPECT_EQ(a.samples[i].label, b.samples[i].label);
    for (Modality m : kModalities) EXPECT_EQ(a.samples[i].features(m), b.samples[i].features(m));
  }
  c.seed += 1;
  const Dataset d = generate_synthetic(c);
  EXPECT_NE(d.samples[0].features(Modality::A), a.samples[0].features(Modality::A));
}

TEST(Synth, RejectsBadConfig) {
  SynthConfig c;
  c.window_max = c.L_target + 1;
  EXPECT_THROW(generate_synthetic(c), InvalidInput);
  c = SynthConfig{};
  c.positive_rate = 1.0;
  EXPECT_THROW(generate_synthetic(c), InvalidInput);
}

// Logistic regression on per-sample mean feature vectors, trained on train and
// scored on dev.
double mean_feature_probe_auc(const Dataset& ds, Modality m) {
  const std::size_t d = ds.dim(m);
  auto mean_row = [&](const Sample& s) {
    const Matrix& x = s.features(m);
    std::vector<double> v(d, 0.0);
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t c = 0; c < d; ++c) v[c] += x(r, c) / static_cast<double>(x.rows());
    return v;
  };
  std::vector<double> w(d, 0.0);
  double b = 0.0;
  const auto train = ds.indices(Partition::train);
  for (int it = 0; it < 300; ++it) {
    std::vector<double> gw(d, 0.0);
    double gb = 0.0;
    for (std::size_t i : train) {
      const auto v = mean_row(ds.samples[i]);
      double z = b;
      for (std::size_t c = 0; c < d; ++c) z += w[c] * v[c];
      const double err = 1.0 / (1.0 + std::exp(-z)) - ds.samples[i].label;
      for (std::size_t c = 0; c < d; ++c) gw[c] += err * v[c];
      gb += err;
    }
    const double step = 0.5 / static_cast<double>(train.size());
    for (std::size_t c = 0; c < d; ++c) w[c] -= step * gw[c];
    b -= step * gb;
  }
  ScoredLabels sl;
  for (std::size_t i : ds.indices(Partition::dev)) {
    const auto v = mean_row(ds.samples[i]);
    double z = b;
    for (std::size_t c = 0; c < d; ++c) z += w[c] * v[c];
    sl.scores.push_back(z);
    sl.labels.push_back(ds.samples[i].label);
  }
  return roc_auc(sl);
}

TEST(Synth, SignalIsLearnableByLinearProbe) {
  const Dataset ds = generate_synthetic(SynthConfig{});
  for (Modality m : kModalities) EXPECT_GT(mean_feature_probe_auc(ds, m), 0.8) << modality_name(m);
}

TEST(Synth, ZeroSignalIsChance) {
  SynthConfig c;
  c.signal = {0.0, 0.0, 0.0};
  const Dataset ds = generate_synthetic(c);
  for (Modality m : kModalities) {
    const double auc = mean_feature_probe_auc(ds, m);
    EXPECT_GE(auc, 0.4) << modality_name(m);
    EXPECT_LE(auc, 0.6) << modality_name(m);
  }
}

TEST(Synth, PositiveRateRespected) {
  SynthConfig c;
  c.n_train = 2000;
  c.positive_rate = 0.3;
  const Dataset ds = generate_synthetic(c);
  double pos = 0;
  const auto idx = ds.indices(Partition::train);
  for (std::size_t i : idx) pos += ds.samples[i].label;
  EXPECT_NEAR(pos / static_cast<double>(idx.size()), 0.3, 0.04);
}

}  // namespace
}  // namespace hmfmd
