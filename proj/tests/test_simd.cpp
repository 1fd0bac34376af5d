#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "spectral_lab/simd/kernels.hpp"

using namespace spectral_lab::simd;

namespace {

std::vector<const KernelTable*> variants() {
  std::vector<const KernelTable*> out;
  if (const KernelTable* t = avx2_kernels()) out.push_back(t);
  if (const KernelTable* t = neon_kernels()) out.push_back(t);
  return out;
}

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_SUITE("simd") {
  TEST_CASE("scalar reference kernels") {
    const KernelTable& s = scalar_kernels();
    const std::vector<double> x{1.0, 2.0, 3.0}, y{4.0, -5.0, 6.0};
    CHECK(s.dot(x.data(), y.data(), 3) == 12.0);
    std::vector<double> z = y;
    s.axpy(2.0, x.data(), z.data(), 3);
    CHECK(z == std::vector<double>{6.0, -1.0, 12.0});
    std::vector<double> acc(3, 1.0);
    s.accumulate_squares(0.5, x.data(), acc.data(), 3);
    CHECK(acc == std::vector<double>{1.5, 3.0, 5.5});
  }

  TEST_CASE("vector variants agree with the scalar reference") {
    std::mt19937_64 rng(99);
    const KernelTable& s = scalar_kernels();
    for (const KernelTable* v : variants()) {
      CAPTURE(v->name);
      for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 15u, 16u, 33u, 1000u, 4099u}) {
        const auto x = random_vector(rng, n), y = random_vector(rng, n);
        double scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) scale += std::abs(x[i] * y[i]);
        CHECK(std::abs(v->dot(x.data(), y.data(), n) - s.dot(x.data(), y.data(), n)) <= 1e-14 * std::max(1.0, scale));

        // axpy and accumulate_squares are elementwise; with FMA the rounding
        // of a single multiply-add may differ in the last bit.
        std::vector<double> a = y, b = y;
        v->axpy(0.37, x.data(), a.data(), n);
        s.axpy(0.37, x.data(), b.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(a[i] - b[i]) <= 4e-16 * (1.0 + std::abs(b[i])));

        std::vector<double> c = y, d = y;
        v->accumulate_squares(1.3, x.data(), c.data(), n);
        s.accumulate_squares(1.3, x.data(), d.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(c[i] - d[i]) <= 4e-16 * (1.0 + std::abs(d[i])));
      }
    }
  }

  TEST_CASE("active table is one of the known tables") {
    const KernelTable& a = active_kernels();
    bool known = &a == &scalar_kernels();
    for (const KernelTable* v : variants()) known = known || &a == v;
    CHECK(known);
  }
}
