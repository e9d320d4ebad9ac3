#pragma once

// Dense double-precision inner loops used by every solver step.
//
// Each kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The active table is picked once at startup from the CPU features
// and can be pinned with the EXTRAGRAD_SIMD environment variable
// ("scalar" or "avx2"). Elementwise kernels are bitwise identical across
// backends; reductions (dot, sq_norm, gemv) differ only by summation order.

#include <cstddef>
#include <span>
#include <string_view>

namespace extragrad::kernels {

struct KernelTable {
  const char* name;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out[i] = x[i] + alpha * y[i]
  void (*waxpy)(double* out, const double* x, double alpha, const double* y, std::size_t n);
  // out[i] = alpha * x[i]
  void (*scale)(double* out, double alpha, const double* x, std::size_t n);
  // y = A x with A row-major rows x cols
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  // y = A^T x with A row-major rows x cols (y has cols entries)
  void (*gemv_t)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
};

const KernelTable& scalar_table();
// nullptr when the binary or the CPU lacks AVX2.
const KernelTable* avx2_table();

// Table used by the library. Thread-safe after first call.
const KernelTable& active();

// Pins the backend ("scalar", "avx2"). Returns false if unavailable.
// Intended for tests and benchmarks; not safe while other threads run kernels.
bool select_backend(std::string_view name);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline double sq_norm(std::span<const double> a) { return active().dot(a.data(), a.data(), a.size()); }
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}
inline void waxpy(std::span<double> out, std::span<const double> x, double alpha,
                  std::span<const double> y) {
  active().waxpy(out.data(), x.data(), alpha, y.data(), x.size());
}
inline void scale(std::span<double> out, double alpha, std::span<const double> x) {
  active().scale(out.data(), alpha, x.data(), x.size());
}

}  // namespace extragrad::kernels
