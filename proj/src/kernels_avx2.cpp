// Compiled with -mavx2 -mfma. Keep this file free of standard-library
// templates: inline functions instantiated here could be merged by the linker
// into code paths that run on CPUs without AVX2.

#include <immintrin.h>

#include "egnn/kernels.hpp"

namespace egnn::simd {
namespace {

inline double horizontal_sum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void axpy(std::size_t n, double a, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] = __builtin_fma(a, x[i], y[i]);
}

void scale(std::size_t n, double a, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] = a * x[i];
}

void axpby(std::size_t n, double a, const double* x, double b, const double* y, double* out) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d by = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), by));
  }
  for (; i < n; ++i) out[i] = __builtin_fma(a, x[i], b * y[i]);
}

double dot(std::size_t n, const double* x, const double* y) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  double s = horizontal_sum(acc);
  for (; i < n; ++i) s = __builtin_fma(x[i], y[i], s);
  return s;
}

double sum_squares(std::size_t n, const double* x) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = horizontal_sum(acc);
  for (; i < n; ++i) s = __builtin_fma(x[i], x[i], s);
  return s;
}

double abs_sum(std::size_t n, const double* x) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(x + i)));
  double s = horizontal_sum(acc);
  for (; i < n; ++i) s += __builtin_fabs(x[i]);
  return s;
}

void clip(std::size_t n, double bound, const double* x, double* y) {
  const __m256d hi = _mm256_set1_pd(bound);
  const __m256d lo = _mm256_set1_pd(-bound);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(y + i, _mm256_max_pd(lo, _mm256_min_pd(v, hi)));
  }
  for (; i < n; ++i) {
    const double v = x[i];
    y[i] = v > bound ? bound : (v < -bound ? -bound : v);
  }
}

void relu(std::size_t n, const double* x, double* y) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

bool all_finite(std::size_t n, const double* x) {
  // x - x is 0 for finite x and NaN for +-inf and NaN.
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    const __m256d eq = _mm256_cmp_pd(_mm256_sub_pd(v, v), zero, _CMP_EQ_OQ);
    if (_mm256_movemask_pd(eq) != 0xF) return false;
  }
  for (; i < n; ++i)
    if (!(x[i] - x[i] == 0.0)) return false;
  return true;
}

constexpr KernelTable kAvx2{
    Backend::Avx2, "avx2", axpy, scale, axpby, dot, sum_squares, abs_sum, clip, relu, all_finite,
};

}  // namespace

const KernelTable* avx2_kernel_table() { return &kAvx2; }

}  // namespace egnn::simd
