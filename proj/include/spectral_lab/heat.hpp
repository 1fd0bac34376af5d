#pragma once

// Heat semigroup exp(-tH) of a stiffness form on a Dirichlet truncation:
// kernel diagonal, its supremum M(t), and log-log dimension fits.
//
// Combinatorial forms use the counting measure (M = I); metric forms use the
// P1 mass matrix, so eigenvectors are M-orthonormal and nodal values
// represent the L^2 kernel.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spectral_lab/assembly.hpp"

namespace spectral_lab {

inline constexpr std::size_t kHeatDofCap = 4000;

struct HeatDecomposition {
  Eigen::VectorXd lambda;  // ascending
  Eigen::MatrixXd u;       // columns; orthonormal in the underlying L^2
  FormKind kind = FormKind::combinatorial;
  std::string source;      // "dsyevd", "dsygvd", or "cache"
  std::size_t dofs() const { return static_cast<std::size_t>(u.rows()); }
};

// Full eigendecomposition of (A, M). Throws Error(capacity) above `cap` DOFs.
// When SPECTRAL_LAB_CACHE names a directory, decompositions are stored there
// keyed by a hash of the matrices.
HeatDecomposition heat_decomposition(const FormPair& pair, std::size_t cap = kHeatDofCap);

// P(t; x, x) for every DOF site.
std::vector<double> kernel_diag(const HeatDecomposition& d, double t);
// P(t; x, y) for all sites.
Eigen::MatrixXd kernel(const HeatDecomposition& d, double t);
double kernel_entry(const HeatDecomposition& d, double t, std::size_t x, std::size_t y);
// M(t) = max_x P(t; x, x).
double sup_kernel(const HeatDecomposition& d, double t);

// Logarithmically spaced grid with `points` >= 2 entries from a to b.
std::vector<double> log_grid(double a, double b, std::size_t points);

struct DimensionFit {
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::size_t points = 0;
  double slope = 0.0;      // d log M / d log t
  double intercept = 0.0;
  double dimension = 0.0;  // -2 slope
  double residual = 0.0;   // 2-norm of the log-residuals
};

// Least-squares fit of log M against log t over grid points inside
// [t_lo, t_hi]. Throws Error(invalid_argument) with fewer than 5 points or a
// nonpositive M.
DimensionFit dimension_fit(const std::vector<double>& t, const std::vector<double>& m, double t_lo, double t_hi);

struct HeatProfile {
  std::vector<double> t;
  std::vector<double> m;  // M(t)
  std::size_t dofs = 0;
  double lambda_min = 0.0;
  std::string source;
  // First grid time where the log-log slope has flattened below 0.1 in
  // magnitude after having exceeded it, or where t lambda_min >= 1 (the
  // truncation's exponential regime); absent if neither happens on the grid.
  std::optional<double> saturation_time;
};

HeatProfile heat_profile(const HeatDecomposition& d, const std::vector<double>& t, std::size_t jobs = 1);

std::optional<double> saturation_time(const std::vector<double>& t, const std::vector<double>& m, double lambda_min);

struct FitWindow {
  double lo = 0.0;
  double hi = 0.0;
};

// [t_min, 10 t_min]
FitWindow default_local_window(const HeatProfile& p);
// [t_sat / 10, t_sat]; without a saturation time, the last decade of the grid.
FitWindow default_infinity_window(const HeatProfile& p);

// max over random (x, y, t in grid) of P(t;x,y) - sqrt(P(t;x,x) P(t;y,y)).
double max_offdiagonal_excess(const HeatDecomposition& d, const std::vector<double>& t, std::size_t samples,
                              std::uint64_t seed);

}  // namespace spectral_lab
