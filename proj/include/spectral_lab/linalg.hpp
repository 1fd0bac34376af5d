#pragma once

// Factorizations and eigensolvers behind the spectral module.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace spectral_lab {

// Sparse Cholesky succeeds with positive pivots only.
bool is_positive_definite(const Eigen::SparseMatrix<double>& a);

struct Inertia {
  std::size_t negative = 0;
  std::size_t zero = 0;
  std::size_t positive = 0;
  // Smallest |pivot| relative to the largest |entry| of the matrix.
  double min_relative_pivot = 0.0;
  std::string method;  // "ldlt-sparse" or "bunch-kaufman"
};

struct InertiaOptions {
  std::size_t dense_cutoff = 300;    // at or below: dense Bunch-Kaufman
  std::size_t dense_fallback = 4000; // sparse LDL^T with tiny pivots refactors densely up to this size
  double zero_pivot = 1e-13;         // relative pivot size treated as zero
};

// Sylvester inertia from a symmetric factorization S = L D L^T.
Inertia inertia(const Eigen::SparseMatrix<double>& s, const InertiaOptions& options = {});

Eigen::MatrixXd to_dense(const Eigen::SparseMatrix<double>& s);

// Symmetric eigendecomposition, ascending eigenvalues (LAPACK dsyevd).
struct Eigendecomposition {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // columns; orthonormal, or M-orthonormal for the generalized problem
};
Eigendecomposition symmetric_eigen(const Eigen::MatrixXd& a, bool vectors = true);
// a x = lambda m x with m symmetric positive definite (LAPACK dsygvd).
Eigendecomposition generalized_eigen(const Eigen::MatrixXd& a, const Eigen::MatrixXd& m, bool vectors = true);

// y = Op x for a symmetric operator on R^n.
using LinearOperator = std::function<void(std::span<const double> x, std::span<double> y)>;

struct LanczosOptions {
  double rtol = 1e-9;
  std::uint64_t seed = 0x5eed;
  std::size_t check_every = 8;
  std::size_t max_steps = 0;  // 0: bounded by the dimension only
};

struct LanczosResult {
  std::vector<double> values;  // converged Ritz values, nonincreasing
  Eigen::MatrixXd vectors;     // matching Ritz vectors (columns)
  std::size_t steps = 0;
  bool converged = false;
};

// Largest eigenvalues of a symmetric operator by Lanczos with full
// reorthogonalization, restricted to the orthogonal complement of `locked`
// (orthonormal columns, may be empty). Stops when the top `count` Ritz pairs
// have converged, or, when `threshold` is set, when every Ritz value above it
// plus the first one below it have converged. Invariant subspaces are left by
// restarting with a fresh random vector.
LanczosResult lanczos_largest(const LinearOperator& op, std::size_t n, const Eigen::MatrixXd& locked,
                              std::size_t count, std::optional<double> threshold, const LanczosOptions& options);

}  // namespace spectral_lab
