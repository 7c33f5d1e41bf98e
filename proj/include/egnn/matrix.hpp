#pragma once

#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <vector>

namespace egnn {

/// Dense row-major matrix of doubles. Holds node signals (n x d), dual
/// variables (m x d), MLP weights and dense oracle systems.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }

  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

  void fill(double v);
  bool same_shape(const Matrix& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }
  bool all_finite() const;

  Matrix transposed() const;
  Matrix column(std::size_t j) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// Node signals F, X_in and dual variables Z are all plain dense matrices.
using SignalMatrix = Matrix;

double max_abs_diff(const Matrix& a, const Matrix& b);
double frobenius_norm(const Matrix& a);
double frobenius_distance(const Matrix& a, const Matrix& b);

/// a * x + b * y, shapes must agree.
Matrix linear_combination(double a, const Matrix& x, double b, const Matrix& y);
Matrix scaled(const Matrix& x, double a);

/// Concatenates matrices with equal row counts side by side.
Matrix hstack(std::span<const Matrix> blocks);

/// Dense product, used by oracles and small tests only.
Matrix matmul(const Matrix& a, const Matrix& b);

/// Comma-separated rows, no header.
Matrix read_csv_matrix(std::istream& in, const char* source_name);
void write_csv_matrix(std::ostream& out, const Matrix& m);

}  // namespace egnn
