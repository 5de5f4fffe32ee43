#pragma once

#include <cstddef>
#include <string_view>

// Dense double-precision kernels behind a runtime-selected function table.
//
// Every kernel has a scalar reference implementation (compiled without FMA
// contraction) and, on x86-64, an AVX2+FMA variant. The active table is
// chosen once per process: AVX2 when the CPU supports it, unless the
// HILL_SIMD environment variable is set to "scalar". All matrices are
// row-major and densely packed.

namespace hill::kernels {

struct KernelTable {
  std::string_view name;

  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // C[m x n] += A[m x k] * B[k x n]
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
  // C[m x n] += A[k x m]^T * B[k x n]
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
  // C[m x n] += A[m x k] * B[n x k]^T
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
  // y = max(x, 0)
  void (*relu)(const double* x, double* y, std::size_t n);
  // dx = dy where x > 0, else 0
  void (*relu_backward)(const double* x, const double* dy, double* dx, std::size_t n);
};

const KernelTable& scalar();
/// nullptr when the variant is not compiled in or the CPU lacks the ISA.
const KernelTable* avx2();
/// The table used by the tensor layer.
const KernelTable& active();

}  // namespace hill::kernels
