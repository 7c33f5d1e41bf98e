#pragma once

// Dense inner-loop kernels shared by the sparse operators, the EMP solver and
// the MLP. Every kernel has a scalar reference implementation; an AVX2/FMA
// variant is compiled into a separate translation unit and picked at runtime
// when the CPU supports it. The two are equivalence-tested, not bit-identical:
// reductions use four lane-wise partial sums on AVX2.

#include <cstddef>
#include <string_view>

namespace egnn::simd {

enum class Backend { Scalar, Avx2 };

struct KernelTable {
  Backend backend;
  const char* name;

  // y += a * x
  void (*axpy)(std::size_t n, double a, const double* x, double* y);
  // y = a * x
  void (*scale)(std::size_t n, double a, const double* x, double* y);
  // out = a * x + b * y   (out may alias x or y)
  void (*axpby)(std::size_t n, double a, const double* x, double b, const double* y, double* out);
  double (*dot)(std::size_t n, const double* x, const double* y);
  double (*sum_squares)(std::size_t n, const double* x);
  double (*abs_sum)(std::size_t n, const double* x);
  // y = clamp(x, -bound, bound)   (y may alias x)
  void (*clip)(std::size_t n, double bound, const double* x, double* y);
  // y = max(x, 0)
  void (*relu)(std::size_t n, const double* x, double* y);
  bool (*all_finite)(std::size_t n, const double* x);
};

const KernelTable& scalar_kernels();

// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();

bool cpu_supports_avx2();

// The table used by the library. Chosen on first use: AVX2 when available,
// unless EGNN_SIMD=scalar is set in the environment.
const KernelTable& active();

// Throws std::invalid_argument if the backend is unavailable on this machine.
void select_backend(Backend backend);

std::string_view backend_name(Backend backend);

}  // namespace egnn::simd
