#include <cstdlib>
#include <string_view>

#include "spectral_lab/simd/kernels.hpp"

namespace spectral_lab::simd {
namespace {

const KernelTable& select() {
  if (const char* env = std::getenv("SPECTRAL_LAB_SIMD"); env && std::string_view(env) == "scalar") {
    return scalar_kernels();
  }
  if (const KernelTable* t = avx2_kernels()) return *t;
  if (const KernelTable* t = neon_kernels()) return *t;
  return scalar_kernels();
}

}  // namespace

const KernelTable& active_kernels() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace spectral_lab::simd
