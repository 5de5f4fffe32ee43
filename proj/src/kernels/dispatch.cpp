#include <cstdlib>
#include <string_view>

#include "hill/kernels.hpp"

namespace hill::kernels {

#if defined(HILL_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

const KernelTable* avx2() {
#if defined(HILL_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable& chosen = [] () -> const KernelTable& {
    const char* env = std::getenv("HILL_SIMD");
    if (env && std::string_view(env) == "scalar") return scalar();
    if (const auto* t = avx2()) return *t;
    return scalar();
  }();
  return chosen;
}

}  // namespace hill::kernels
