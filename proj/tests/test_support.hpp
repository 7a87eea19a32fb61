#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "hmfmd/lstm.hpp"
#include "hmfmd/matrix.hpp"
#include "hmfmd/transformer.hpp"

namespace hmfmd::test {

/// Closed-form fill shared with tests/oracles/reference_values.py:
/// m[k] = scale * sin(1.3 k + phase) over the row-major index.
inline Matrix fill(std::size_t rows, std::size_t cols, double phase, double scale = 0.5) {
  Matrix m(rows, cols);
  for (std::size_t k = 0; k < m.size(); ++k) {
    m[k] = scale * std::sin(1.3 * static_cast<double>(k) + phase);
  }
  return m;
}

// Same construction as transformer_params() in tests/oracles/reference_values.py.
inline TransformerLayerParams oracle_transformer(std::size_t d, std::size_t dff, std::size_t heads,
                                          double base) {
  TransformerLayerParams p;
  p.d_model = d;
  p.n_heads = heads;
  p.wq = fill(d, d, base + 0.1);
  p.wk = fill(d, d, base + 0.2);
  p.wv = fill(d, d, base + 0.3);
  p.wo = fill(d, d, base + 0.4);
  p.w1 = fill(d, dff, base + 0.5);
  p.b1 = fill(1, dff, base + 0.6, 0.1);
  p.w2 = fill(dff, d, base + 0.7);
  p.b2 = fill(1, d, base + 0.8, 0.1);
  p.ln1_gamma = fill(1, d, base + 0.9, 0.1);
  for (double& v : p.ln1_gamma.values()) v += 1.0;
  p.ln1_beta = fill(1, d, base + 1.0, 0.1);
  p.ln2_gamma = fill(1, d, base + 1.1, 0.1);
  for (double& v : p.ln2_gamma.values()) v += 1.0;
  p.ln2_beta = fill(1, d, base + 1.2, 0.1);
  return p;
}

inline BiLstmParams oracle_bilstm(std::size_t in, std::size_t h, std::size_t layers, double base) {
  BiLstmParams ps;
  for (std::size_t k = 0; k < layers; ++k) {
    BiLstmLayer layer;
    const std::size_t width = k == 0 ? in : 2 * h;
    for (int dir = 0; dir < 2; ++dir) {
      LstmLayerParams& p = dir == 0 ? layer.fwd : layer.bwd;
      const double ph = base + 10.0 * static_cast<double>(k) + 2.0 * dir;
      p.input_dim = width;
      p.hidden_dim = h;
      p.w = fill(4 * h, width, ph + 0.1);
      p.u = fill(4 * h, h, ph + 0.2);
      p.b = fill(1, 4 * h, ph + 0.3, 0.1);
    }
    ps.layers.push_back(std::move(layer));
  }
  return ps;
}

inline void expect_near(const Matrix& got, const std::vector<double>& want, double tol) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got[i], want[i], tol) << "at " << i;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    std::string name = "hmfmd_" + tag;
    if (info) name += std::string("_") + info->test_suite_name() + "_" + info->name();
    path_ = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

}  // namespace hmfmd::test
