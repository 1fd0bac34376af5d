#include "spectral_lab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <lapacke.h>

#include "spectral_lab/error.hpp"
#include "spectral_lab/simd/kernels.hpp"

namespace spectral_lab {

using SparseMatrix = Eigen::SparseMatrix<double>;

bool is_positive_definite(const SparseMatrix& a) {
  if (a.rows() == 0) return true;
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt(a);
  return llt.info() == Eigen::Success;
}

Eigen::MatrixXd to_dense(const SparseMatrix& s) { return Eigen::MatrixXd(s); }

namespace {

double max_abs_entry(const SparseMatrix& s) {
  double m = 0.0;
  for (Eigen::Index k = 0; k < s.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(s, k); it; ++it) m = std::max(m, std::abs(it.value()));
  }
  return m;
}

void count_pivot(double d, double scale, double zero_pivot, Inertia& out) {
  const double rel = scale > 0.0 ? std::abs(d) / scale : 0.0;
  out.min_relative_pivot = std::min(out.min_relative_pivot, rel);
  if (rel <= zero_pivot) {
    ++out.zero;
  } else if (d < 0.0) {
    ++out.negative;
  } else {
    ++out.positive;
  }
}

Inertia dense_inertia(const SparseMatrix& s, double scale, double zero_pivot) {
  const lapack_int n = static_cast<lapack_int>(s.rows());
  Eigen::MatrixXd a = to_dense(s);
  std::vector<lapack_int> ipiv(static_cast<std::size_t>(n));
  const lapack_int info = LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', n, a.data(), n, ipiv.data());
  if (info < 0) throw Error(ErrorKind::numerical, "dsytrf rejected argument " + std::to_string(-info));
  // info > 0 flags an exactly zero 1x1 pivot; the diagonal still holds D.
  Inertia out;
  out.method = "bunch-kaufman";
  out.min_relative_pivot = std::numeric_limits<double>::infinity();
  for (lapack_int k = 0; k < n;) {
    if (ipiv[static_cast<std::size_t>(k)] > 0) {
      count_pivot(a(k, k), scale, zero_pivot, out);
      k += 1;
    } else {
      // 2x2 block [[a, b], [b, c]]: eigenvalues from trace and determinant.
      const double p = a(k, k), q = a(k + 1, k), r = a(k + 1, k + 1);
      const double mean = 0.5 * (p + r);
      const double radius = std::hypot(0.5 * (p - r), q);
      count_pivot(mean - radius, scale, zero_pivot, out);
      count_pivot(mean + radius, scale, zero_pivot, out);
      k += 2;
    }
  }
  return out;
}

}  // namespace

Inertia inertia(const SparseMatrix& s, const InertiaOptions& options) {
  const std::size_t n = static_cast<std::size_t>(s.rows());
  if (n == 0) return {0, 0, 0, 0.0, "empty"};
  const double scale = max_abs_entry(s);
  if (scale == 0.0) return {0, n, 0, 0.0, "zero-matrix"};
  if (n <= options.dense_cutoff) return dense_inertia(s, scale, options.zero_pivot);

  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(s);
  if (ldlt.info() == Eigen::Success) {
    Inertia out;
    out.method = "ldlt-sparse";
    out.min_relative_pivot = std::numeric_limits<double>::infinity();
    const Eigen::VectorXd d = ldlt.vectorD();
    for (Eigen::Index i = 0; i < d.size(); ++i) count_pivot(d[i], scale, options.zero_pivot, out);
    if (out.zero == 0 && out.min_relative_pivot > 1e3 * options.zero_pivot) return out;
  }
  // Unpivoted LDL^T broke down or produced a suspiciously small pivot.
  if (n <= options.dense_fallback) return dense_inertia(s, scale, options.zero_pivot);
  throw Error(ErrorKind::numerical, "sparse LDL^T hit a (near) zero pivot and the matrix is too large for "
                                    "the dense Bunch-Kaufman fallback");
}

Eigendecomposition symmetric_eigen(const Eigen::MatrixXd& a, bool vectors) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigendecomposition out;
  out.vectors = a;
  out.values.resize(n);
  if (n == 0) return out;
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'L', n, out.vectors.data(), n, out.values.data());
  if (info != 0) throw Error(ErrorKind::numerical, "dsyevd failed with info " + std::to_string(info));
  if (!vectors) out.vectors.resize(0, 0);
  return out;
}

Eigendecomposition generalized_eigen(const Eigen::MatrixXd& a, const Eigen::MatrixXd& m, bool vectors) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigendecomposition out;
  out.vectors = a;
  out.values.resize(n);
  if (n == 0) return out;
  Eigen::MatrixXd mm = m;
  const lapack_int info = LAPACKE_dsygvd(LAPACK_COL_MAJOR, 1, vectors ? 'V' : 'N', 'L', n, out.vectors.data(), n,
                                         mm.data(), n, out.values.data());
  if (info > n) throw Error(ErrorKind::numerical, "dsygvd: second matrix is not positive definite");
  if (info != 0) throw Error(ErrorKind::numerical, "dsygvd failed with info " + std::to_string(info));
  if (!vectors) out.vectors.resize(0, 0);
  return out;
}

namespace {

// Orthogonalizes w against the columns of `basis` (first `cols` columns of
// length n each, stored contiguously) and of `locked`; two passes.
void orthogonalize(std::span<double> w, const std::vector<double>& basis, std::size_t cols,
                   const Eigen::MatrixXd& locked) {
  const std::size_t n = w.size();
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index c = 0; c < locked.cols(); ++c) {
      std::span<const double> q(locked.col(c).data(), n);
      simd::axpy(-simd::dot(q, w), q, w);
    }
    for (std::size_t c = 0; c < cols; ++c) {
      std::span<const double> q(basis.data() + c * n, n);
      simd::axpy(-simd::dot(q, w), q, w);
    }
  }
}

double norm(std::span<const double> x) { return std::sqrt(simd::dot(x, x)); }

}  // namespace

LanczosResult lanczos_largest(const LinearOperator& op, std::size_t n, const Eigen::MatrixXd& locked,
                              std::size_t count, std::optional<double> threshold, const LanczosOptions& options) {
  LanczosResult result;
  const std::size_t free_dim = n - static_cast<std::size_t>(locked.cols());
  if (free_dim == 0 || (count == 0 && !threshold)) {
    result.converged = true;
    return result;
  }
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss;

  std::vector<double> basis;  // columns q_0..q_{k-1}
  std::vector<double> alpha, beta;
  std::vector<double> w(n), start(n);

  // Fresh unit vector orthogonal to everything seen so far; false if the
  // random draw collapsed (space exhausted).
  auto new_start = [&](std::size_t cols) {
    for (int attempt = 0; attempt < 3; ++attempt) {
      for (double& x : start) x = gauss(rng);
      const double before = norm(start);
      orthogonalize(start, basis, cols, locked);
      const double after = norm(start);
      if (after > 1e-8 * before) {
        for (double& x : start) x /= after;
        return true;
      }
    }
    return false;
  };

  if (!new_start(0)) {
    result.converged = true;
    return result;
  }
  basis.insert(basis.end(), start.begin(), start.end());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
  double scale = 0.0;
  for (std::size_t k = 0;; ++k) {
    std::span<const double> q(basis.data() + k * n, n);
    op(q, w);
    const double a = simd::dot(q, w);
    alpha.push_back(a);
    simd::axpy(-a, q, w);
    if (k > 0) simd::axpy(-beta[k - 1], std::span<const double>(basis.data() + (k - 1) * n, n), w);
    orthogonalize(w, basis, k + 1, locked);
    double b = norm(w);
    scale = std::max({scale, std::abs(a), b});
    const bool space_full = k + 1 >= free_dim;

    bool restarted = false;
    if (!space_full && b <= 1e-10 * scale) {
      // Invariant subspace: continue in its orthogonal complement.
      b = 0.0;
      restarted = new_start(k + 1);
      if (!restarted) {
        beta.push_back(0.0);
        result.steps = k + 1;
        break;
      }
    }
    beta.push_back(b);

    const bool capped = options.max_steps != 0 && k + 1 >= options.max_steps;
    const bool check = space_full || capped || (k + 1) % options.check_every == 0 || restarted;
    if (check) {
      const std::size_t m = k + 1;
      Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), static_cast<Eigen::Index>(m));
      Eigen::VectorXd sub(static_cast<Eigen::Index>(std::max<std::size_t>(m, 1) - 1));
      for (std::size_t i = 0; i + 1 < m; ++i) sub[static_cast<Eigen::Index>(i)] = beta[i];
      tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      const Eigen::VectorXd& theta = tri.eigenvalues();  // ascending
      const double top = std::abs(theta[static_cast<Eigen::Index>(m - 1)]);
      const double last_beta = space_full ? 0.0 : b;
      auto converged_at = [&](std::size_t i) {  // i-th largest
        const Eigen::Index col = static_cast<Eigen::Index>(m - 1 - i);
        const double residual = std::abs(last_beta * tri.eigenvectors()(static_cast<Eigen::Index>(m - 1), col));
        return residual <= options.rtol * std::max(std::abs(theta[col]), 1e-5 * top) ||
               residual <= 1e-14 * scale;
      };
      std::size_t want = std::min(count, m);
      if (threshold) {
        std::size_t above = 0;
        while (above < m && theta[static_cast<Eigen::Index>(m - 1 - above)] > *threshold) ++above;
        want = std::min(m, above + 1);
      }
      bool ok = true;
      for (std::size_t i = 0; i < want && ok; ++i) ok = converged_at(i);
      // Threshold mode also needs one converged Ritz value below the threshold.
      if (!space_full) {
        if (threshold && theta[0] > *threshold) ok = false;
        if (!threshold && m < count) ok = false;
      }
      if (ok || space_full || capped) {
        result.converged = ok;
        result.steps = m;
        std::size_t keep = want;
        if (threshold) {
          keep = 0;
          while (keep < m && theta[static_cast<Eigen::Index>(m - 1 - keep)] > *threshold) ++keep;
        }
        result.vectors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(keep));
        Eigen::Map<const Eigen::MatrixXd> q_basis(basis.data(), static_cast<Eigen::Index>(n),
                                                  static_cast<Eigen::Index>(m));
        for (std::size_t i = 0; i < keep; ++i) {
          const Eigen::Index col = static_cast<Eigen::Index>(m - 1 - i);
          result.values.push_back(theta[col]);
          result.vectors.col(static_cast<Eigen::Index>(i)) = q_basis * tri.eigenvectors().col(col);
        }
        break;
      }
    }
    if (space_full || capped) break;
    if (restarted) {
      basis.insert(basis.end(), start.begin(), start.end());
    } else {
      for (double& x : w) x /= b;
      basis.insert(basis.end(), w.begin(), w.end());
    }
  }
  return result;
}

}  // namespace spectral_lab
