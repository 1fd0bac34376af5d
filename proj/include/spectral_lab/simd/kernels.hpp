#pragma once

// Data-parallel inner loops shared by the eigensolvers and the heat module.
// Every kernel has a scalar reference version; vector variants are chosen once
// at runtime from the CPU feature set and must agree with the reference up to
// reassociation of floating-point sums.

#include <cstddef>
#include <span>
#include <string_view>

namespace spectral_lab::simd {

struct KernelTable {
  std::string_view name;
  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // out[i] += w * x[i]^2
  void (*accumulate_squares)(double w, const double* x, double* out, std::size_t n);
};

const KernelTable& scalar_kernels();
// nullptr when the variant was not compiled in or the CPU lacks the feature.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

// Best available table. SPECTRAL_LAB_SIMD=scalar forces the reference path.
const KernelTable& active_kernels();

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active_kernels().dot(x.data(), y.data(), x.size());
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active_kernels().axpy(a, x.data(), y.data(), x.size());
}

inline void accumulate_squares(double w, std::span<const double> x, std::span<double> out) {
  active_kernels().accumulate_squares(w, x.data(), out.data(), x.size());
}

}  // namespace spectral_lab::simd
