#pragma once

// Birman-Schwinger pencil B u = s A u: eigenvalues, counting functions,
// negative counts of A - alpha B by inertia, and finite-spectrum quasi-norms.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spectral_lab/assembly.hpp"
#include "spectral_lab/linalg.hpp"

namespace spectral_lab {

inline constexpr double kCountGuard = 1e-9;

struct SpectralProvenance {
  FormKind kind = FormKind::combinatorial;
  std::size_t dofs = 0;
  std::string method;      // "dense-dsygvd" or "lanczos"
  std::size_t steps = 0;   // Lanczos steps over all deflation rounds
  std::size_t rounds = 0;  // Lanczos deflation rounds
  std::uint64_t seed = 0;
  std::string mesh;
  Quadrature rule = Quadrature::trapezoid;
};

struct SpectralReport {
  std::vector<double> eigenvalues;  // positive pencil eigenvalues, nonincreasing
  // Every eigenvalue above this value is present; 0 means the whole positive
  // spectrum (up to the requested count) was computed.
  double complete_above = 0.0;
  bool truncated_by_count = false;  // stopped at a requested count
  double rtol = 1e-9;
  double rtol_count = kCountGuard;
  SpectralProvenance provenance;
};

struct EigenRequest {
  std::optional<std::size_t> count;  // largest `count` eigenvalues
  std::optional<double> threshold;   // every eigenvalue > threshold
  double rtol = 1e-9;
  std::uint64_t seed = 0x5eed;
  std::size_t dense_cutoff = 400;    // DOFs at or below: dense generalized solver
  std::size_t max_steps = 0;         // Lanczos cap per round; 0: dimension
};

// Largest eigenvalues of B u = s A u. Without count or threshold, the whole
// positive spectrum. Throws Error(numerical) on factorization failure or when
// Lanczos stops unconverged at max_steps.
SpectralReport pencil_eigenvalues(const FormPair& pair, const EigenRequest& request = {});

struct Count {
  std::size_t value = 0;
  bool ambiguous = false;  // a threshold sits within the relative guard band
};

// n(s) = #{s_k > s (1 + rtol_count)}; flagged when some s_k is within the
// guard band around s. Throws Error(invalid_argument) for s <= 0 or when the
// report does not cover s.
Count counting(const SpectralReport& report, double s);

// n(s) from the inertia of s A - B, evaluated at s (1 + guard); ambiguous
// when the inertia at s (1 - guard) differs.
Count pencil_count(const FormPair& pair, double s, double guard = kCountGuard);

struct NegativeCount {
  std::size_t value = 0;
  bool threshold = false;  // zero pivot, or count changes within the guard band
  Inertia inertia;
};

// N_-(A - alpha B) by Sylvester inertia. Throws Error(invalid_argument) for
// alpha < 0.
NegativeCount negative_count(const FormPair& pair, double alpha, double guard = kCountGuard);

struct BirmanSchwingerCheck {
  double alpha = 0.0;
  std::size_t lhs = 0;  // N_-(A - alpha B) by inertia
  std::size_t rhs = 0;  // n(1/alpha) over computed pencil eigenvalues
  bool ambiguous = false;
  bool equal() const { return lhs == rhs; }
};

BirmanSchwingerCheck birman_schwinger_check(const FormPair& pair, double alpha, const EigenRequest& request = {});

struct SpectralQuasiNorms {
  double schatten = 0.0;          // (sum s_n^q)^{1/q}
  double weak = 0.0;              // sup_n n^{1/q} s_n
  std::vector<double> indicator;  // n^{1/q} s_n
};

// Throws Error(invalid_argument) for q <= 0.
SpectralQuasiNorms quasi_norms(const SpectralReport& report, double q);

}  // namespace spectral_lab
