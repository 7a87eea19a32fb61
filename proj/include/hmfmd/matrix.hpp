#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace hmfmd {

/// Dense row-major matrix of doubles. Vectors are stored as 1 x n matrices.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix row_vector(std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  void set_zero();
  std::string shape_string() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Throws ShapeError with `what` in the message unless shapes agree.
void require_same_shape(const Matrix& a, const Matrix& b, const char* what);

/// a * b
Matrix matmul(const Matrix& a, const Matrix& b);
/// a^T * b accumulated into out (out += a^T b).
void matmul_tn_acc(const Matrix& a, const Matrix& b, Matrix& out);
/// a * b^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// out += a * b^T
void matmul_nt_acc(const Matrix& a, const Matrix& b, Matrix& out);

void add_inplace(Matrix& dst, const Matrix& src);
void scale_inplace(Matrix& dst, double factor);
/// Elementwise a + b.
Matrix add(const Matrix& a, const Matrix& b);
/// Adds a 1 x cols bias row to every row of m.
void add_row_bias(Matrix& m, const Matrix& bias);
/// Accumulates column sums of m into bias (1 x cols).
void acc_col_sums(const Matrix& m, Matrix& bias);

/// Horizontal concatenation of matrices sharing the same row count.
Matrix hconcat(std::span<const Matrix> parts);

bool all_finite(const Matrix& m);
bool all_finite(std::span<const double> v);

}  // namespace hmfmd
