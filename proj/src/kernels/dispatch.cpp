#include <atomic>
#include <cstdlib>
#include <string_view>

#include "extragrad/kernels.hpp"

namespace extragrad::kernels {

#if !defined(EXTRAGRAD_HAVE_AVX2)
const KernelTable* avx2_table() { return nullptr; }
#endif

namespace {

const KernelTable* initial_table() {
  if (const char* env = std::getenv("EXTRAGRAD_SIMD")) {
    const std::string_view want{env};
    if (want == "scalar") return &scalar_table();
    if (want == "avx2" && avx2_table() != nullptr) return avx2_table();
  }
  if (const KernelTable* t = avx2_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> current{initial_table()};
  return current;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

bool select_backend(std::string_view name) {
  const KernelTable* t = nullptr;
  if (name == "scalar") t = &scalar_table();
  if (name == "avx2") t = avx2_table();
  if (t == nullptr) return false;
  slot().store(t, std::memory_order_release);
  return true;
}

}  // namespace extragrad::kernels
