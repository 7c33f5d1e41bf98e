#include "egnn/kernels.hpp"

#include <cmath>

namespace egnn::simd {
namespace {

void axpy(std::size_t n, double a, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(std::size_t n, double a, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i];
}

void axpby(std::size_t n, double a, const double* x, double b, const double* y, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

double dot(std::size_t n, const double* x, const double* y) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double sum_squares(std::size_t n, const double* x) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

double abs_sum(std::size_t n, const double* x) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(x[i]);
  return s;
}

void clip(std::size_t n, double bound, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x[i];
    y[i] = v > bound ? bound : (v < -bound ? -bound : v);
  }
}

void relu(std::size_t n, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

bool all_finite(std::size_t n, const double* x) {
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(x[i])) return false;
  return true;
}

constexpr KernelTable kScalar{
    Backend::Scalar, "scalar", axpy, scale, axpby, dot, sum_squares, abs_sum, clip, relu, all_finite,
};

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

}  // namespace egnn::simd
