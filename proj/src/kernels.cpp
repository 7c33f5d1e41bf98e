#include "egnn/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace egnn::simd {

#if defined(EGNN_HAVE_AVX2)
const KernelTable* avx2_kernel_table();  // kernels_avx2.cpp
#endif

bool cpu_supports_avx2() {
#if defined(EGNN_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* avx2_kernels() {
#if defined(EGNN_HAVE_AVX2)
  if (cpu_supports_avx2()) return avx2_kernel_table();
#endif
  return nullptr;
}

namespace {

const KernelTable* default_table() {
  if (const char* env = std::getenv("EGNN_SIMD"); env != nullptr && std::string(env) == "scalar")
    return &scalar_kernels();
  if (const KernelTable* t = avx2_kernels()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{default_table()};
  return table;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void select_backend(Backend backend) {
  const KernelTable* table = backend == Backend::Scalar ? &scalar_kernels() : avx2_kernels();
  if (table == nullptr)
    throw std::invalid_argument("SIMD backend '" + std::string(backend_name(backend)) +
                                "' is not available on this machine");
  current().store(table, std::memory_order_release);
}

std::string_view backend_name(Backend backend) {
  return backend == Backend::Scalar ? "scalar" : "avx2";
}

}  // namespace egnn::simd
