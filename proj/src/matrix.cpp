#include "egnn/matrix.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "egnn/error.hpp"
#include "egnn/kernels.hpp"

namespace egnn {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_)
    throw InputError("Matrix: " + std::to_string(values_.size()) + " values for a " + std::to_string(rows_) +
                     "x" + std::to_string(cols_) + " matrix");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  values_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw InputError("Matrix: ragged initializer list");
    values_.insert(values_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool Matrix::all_finite() const { return simd::active().all_finite(values_.size(), values_.data()); }

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::column(std::size_t j) const {
  Matrix c(rows_, 1);
  for (std::size_t i = 0; i < rows_; ++i) c(i, 0) = (*this)(i, j);
  return c;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw InputError("max_abs_diff: shape mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::fabs(a.data()[i] - b.data()[i]));
  return worst;
}

double frobenius_norm(const Matrix& a) { return std::sqrt(simd::active().sum_squares(a.size(), a.data())); }

double frobenius_distance(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw InputError("frobenius_distance: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    s += d * d;
  }
  return std::sqrt(s);
}

Matrix linear_combination(double a, const Matrix& x, double b, const Matrix& y) {
  if (!x.same_shape(y)) throw InputError("linear_combination: shape mismatch");
  Matrix out(x.rows(), x.cols());
  simd::active().axpby(x.size(), a, x.data(), b, y.data(), out.data());
  return out;
}

Matrix scaled(const Matrix& x, double a) {
  Matrix out(x.rows(), x.cols());
  simd::active().scale(x.size(), a, x.data(), out.data());
  return out;
}

Matrix hstack(std::span<const Matrix> blocks) {
  if (blocks.empty()) return {};
  const std::size_t rows = blocks.front().rows();
  std::size_t cols = 0;
  for (const auto& b : blocks) {
    if (b.rows() != rows) throw InputError("hstack: row count mismatch");
    cols += b.cols();
  }
  Matrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    std::size_t offset = 0;
    for (const auto& b : blocks) {
      std::copy(b.row(i).begin(), b.row(i).end(), out.row(i).begin() + static_cast<std::ptrdiff_t>(offset));
      offset += b.cols();
    }
  }
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw InputError("matmul: inner dimension mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double v = a(i, p);
      if (v == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += v * b(p, j);
    }
  return c;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

Matrix read_csv_matrix(std::istream& in, const char* source_name) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    std::size_t count = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
      const auto comma = content.find(',', pos);
      const std::string_view field = trim(content.substr(pos, comma == std::string_view::npos ? content.npos : comma - pos));
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v))
        throw InputError(std::string(source_name) + ":" + std::to_string(line_no) + ": invalid number '" +
                         std::string(field) + "'");
      values.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (rows == 0) cols = count;
    else if (count != cols)
      throw InputError(std::string(source_name) + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(cols) + " columns, found " + std::to_string(count));
    ++rows;
  }
  return Matrix(rows, cols, std::move(values));
}

void write_csv_matrix(std::ostream& out, const Matrix& m) {
  char buf[64];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j > 0) out.put(',');
      const auto res = std::to_chars(buf, buf + sizeof buf, m(i, j));
      out.write(buf, res.ptr - buf);
    }
    out.put('\n');
  }
}

}  // namespace egnn
