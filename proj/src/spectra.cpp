#include "spectral_lab/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/SparseCholesky>

#include "spectral_lab/error.hpp"

namespace spectral_lab {

namespace {

bool is_zero_matrix(const SparseMatrix& s) {
  for (Eigen::Index k = 0; k < s.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(s, k); it; ++it) {
      if (it.value() != 0.0) return false;
    }
  }
  return true;
}

// Keeps the values the request asks for, nonincreasing.
void apply_request(std::vector<double>& values, const EigenRequest& request, SpectralReport& report) {
  std::sort(values.begin(), values.end(), std::greater<>());
  if (request.threshold) {
    const double t = *request.threshold;
    values.erase(std::find_if(values.begin(), values.end(), [t](double s) { return s <= t; }), values.end());
    report.complete_above = t;
  }
  if (request.count && values.size() > *request.count) {
    values.resize(*request.count);
    report.truncated_by_count = true;
  }
}

std::vector<double> dense_positive(const FormPair& pair) {
  const Eigendecomposition e = generalized_eigen(to_dense(pair.B), to_dense(pair.A), false);
  const double top = e.values.size() ? std::max(0.0, e.values.maxCoeff()) : 0.0;
  std::vector<double> out;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    // B is semidefinite; roundoff leaves its kernel at +-eps * top.
    if (e.values[i] > 1e-12 * top) out.push_back(e.values[i]);
  }
  return out;
}

struct Lanczos {
  std::vector<double> values;
  std::size_t steps = 0;
  std::size_t rounds = 0;
};

// Deflation rounds: each round runs Lanczos in the orthogonal complement of
// the Ritz vectors locked so far; a round that finds nothing new ends the
// search, which recovers copies of repeated eigenvalues a single Krylov space
// cannot see.
Lanczos lanczos_positive(const FormPair& pair, const EigenRequest& request) {
  using Cholesky = Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;
  Cholesky llt(pair.A);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::numerical, "stiffness matrix is not positive definite");
  const std::size_t n = pair.size();
  const Eigen::Index ni = static_cast<Eigen::Index>(n);
  Eigen::VectorXd y(ni), z(ni);
  // C = L^{-1} P B P^{-1} L^{-T}, similar to A^{-1} B.
  LinearOperator op = [&](std::span<const double> x, std::span<double> out) {
    y = llt.matrixU().solve(Eigen::Map<const Eigen::VectorXd>(x.data(), ni));
    z = llt.permutationPinv() * y;
    y = pair.B * z;
    z = llt.permutationP() * y;
    Eigen::Map<Eigen::VectorXd>(out.data(), ni) = llt.matrixL().solve(z);
  };

  LanczosOptions options;
  options.rtol = request.rtol;
  options.seed = request.seed;
  options.max_steps = request.max_steps;

  Lanczos out;
  Eigen::MatrixXd locked(ni, 0);
  const std::size_t want = request.count.value_or(n);
  for (;;) {
    std::size_t ask = want;
    std::optional<double> threshold = request.threshold;
    if (request.count && out.values.size() >= want) ask = 1;  // verification round
    if (!request.count && !request.threshold) threshold = 0.0;
    if (threshold) ask = 0;
    LanczosResult r = lanczos_largest(op, n, locked, ask, threshold, options);
    options.seed += 0x9e3779b97f4a7c15ULL;
    out.steps += r.steps;
    ++out.rounds;
    if (!r.converged) {
      throw Error(ErrorKind::numerical,
                  "Lanczos did not converge within " + std::to_string(r.steps) + " steps");
    }
    // Same cut as the dense path: values below 1e-12 of the top are the
    // numerical kernel of B.
    double top = 0.0;
    for (double v : out.values) top = std::max(top, v);
    for (double v : r.values) top = std::max(top, v);
    std::vector<double> fresh;
    for (double v : r.values) {
      if (v > 1e-12 * top) fresh.push_back(v);
    }
    if (request.count && out.values.size() >= want) {
      std::vector<double> sorted = out.values;
      std::sort(sorted.begin(), sorted.end(), std::greater<>());
      const double kth = sorted[want - 1];
      if (fresh.empty() || fresh.front() <= kth * (1.0 + request.rtol)) break;
    } else if (fresh.empty()) {
      break;
    }
    const Eigen::Index old = locked.cols();
    locked.conservativeResize(ni, old + static_cast<Eigen::Index>(r.values.size()));
    locked.rightCols(static_cast<Eigen::Index>(r.values.size())) = r.vectors;
    out.values.insert(out.values.end(), fresh.begin(), fresh.end());
    if (static_cast<std::size_t>(locked.cols()) >= n) break;
  }
  return out;
}

}  // namespace

SpectralReport pencil_eigenvalues(const FormPair& pair, const EigenRequest& request) {
  if (request.threshold && !(*request.threshold >= 0.0)) {
    throw Error(ErrorKind::invalid_argument, "eigenvalue threshold must be nonnegative");
  }
  SpectralReport report;
  report.rtol = request.rtol;
  report.provenance.kind = pair.kind;
  report.provenance.dofs = pair.size();
  report.provenance.seed = request.seed;
  report.provenance.mesh = pair.mesh.summary();
  report.provenance.rule = pair.rule;
  if (pair.size() == 0 || is_zero_matrix(pair.B) || (request.count && *request.count == 0)) {
    report.provenance.method = "trivial";
    if (request.threshold) report.complete_above = *request.threshold;
    return report;
  }
  std::vector<double> values;
  if (pair.size() <= request.dense_cutoff) {
    report.provenance.method = "dense-dsygvd";
    values = dense_positive(pair);
  } else {
    report.provenance.method = "lanczos";
    Lanczos l = lanczos_positive(pair, request);
    report.provenance.steps = l.steps;
    report.provenance.rounds = l.rounds;
    values = std::move(l.values);
  }
  apply_request(values, request, report);
  report.eigenvalues = std::move(values);
  return report;
}

Count counting(const SpectralReport& report, double s) {
  if (!(s > 0.0)) throw Error(ErrorKind::invalid_argument, "counting needs s > 0");
  if (s < report.complete_above) {
    throw Error(ErrorKind::invalid_argument, "report only covers eigenvalues above " +
                                                 std::to_string(report.complete_above));
  }
  Count c;
  const double hi = s * (1.0 + report.rtol_count);
  const double lo = s * (1.0 - report.rtol_count);
  for (double v : report.eigenvalues) {
    if (v > hi) ++c.value;
    else if (v >= lo) c.ambiguous = true;
  }
  if (report.truncated_by_count && !report.eigenvalues.empty() && c.value == report.eigenvalues.size()) {
    throw Error(ErrorKind::invalid_argument, "report was truncated by count and does not cover s");
  }
  return c;
}

Count pencil_count(const FormPair& pair, double s, double guard) {
  if (!(s > 0.0)) throw Error(ErrorKind::invalid_argument, "counting needs s > 0");
  auto at = [&](double t) {
    const SparseMatrix m = t * pair.A - pair.B;
    return inertia(m).negative;
  };
  Count c;
  c.value = at(s * (1.0 + guard));
  c.ambiguous = at(s * (1.0 - guard)) != c.value;
  return c;
}

NegativeCount negative_count(const FormPair& pair, double alpha, double guard) {
  if (!(alpha >= 0.0)) throw Error(ErrorKind::invalid_argument, "coupling alpha must be >= 0");
  NegativeCount out;
  if (alpha == 0.0 || pair.size() == 0) {
    out.inertia = inertia(pair.A);
    return out;
  }
  const SparseMatrix m = pair.A - alpha * pair.B;
  out.inertia = inertia(m);
  out.value = out.inertia.negative;
  if (out.inertia.zero != 0) {
    out.threshold = true;
  } else {
    const SparseMatrix lo = pair.A - alpha * (1.0 - guard) * pair.B;
    const SparseMatrix hi = pair.A - alpha * (1.0 + guard) * pair.B;
    out.threshold = inertia(lo).negative != out.value || inertia(hi).negative != out.value;
  }
  return out;
}

BirmanSchwingerCheck birman_schwinger_check(const FormPair& pair, double alpha, const EigenRequest& request) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::invalid_argument, "Birman-Schwinger check needs alpha > 0");
  BirmanSchwingerCheck out;
  out.alpha = alpha;
  const NegativeCount lhs = negative_count(pair, alpha);
  out.lhs = lhs.value;
  const double s = 1.0 / alpha;
  EigenRequest r = request;
  r.count.reset();
  r.threshold = s * (1.0 - 2.0 * kCountGuard);
  const SpectralReport report = pencil_eigenvalues(pair, r);
  const Count rhs = counting(report, s);
  out.rhs = rhs.value;
  out.ambiguous = lhs.threshold || rhs.ambiguous;
  return out;
}

SpectralQuasiNorms quasi_norms(const SpectralReport& report, double q) {
  if (!(q > 0.0)) throw Error(ErrorKind::invalid_argument, "quasi-norm exponent q must be > 0");
  SpectralQuasiNorms out;
  std::vector<double> s = report.eigenvalues;
  std::sort(s.begin(), s.end(), std::greater<>());
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    sum += std::pow(s[i], q);
    const double ind = std::pow(static_cast<double>(i + 1), 1.0 / q) * s[i];
    out.indicator.push_back(ind);
    out.weak = std::max(out.weak, ind);
  }
  out.schatten = std::pow(sum, 1.0 / q);
  return out;
}

}  // namespace spectral_lab
