#include "spectral_lab/heat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "spectral_lab/checksum.hpp"
#include "spectral_lab/error.hpp"
#include "spectral_lab/linalg.hpp"
#include "spectral_lab/parallel.hpp"
#include "spectral_lab/simd/kernels.hpp"

namespace spectral_lab {

namespace {

constexpr char kCacheMagic[8] = {'S', 'L', 'H', 'E', 'A', 'T', '1', '\n'};

void hash_matrix(Fnv1a64& h, const SparseMatrix& s) {
  h.update(static_cast<std::uint64_t>(s.rows()));
  for (Eigen::Index k = 0; k < s.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(s, k); it; ++it) {
      h.update(static_cast<std::uint64_t>(it.row()));
      h.update(static_cast<std::uint64_t>(it.col()));
      h.update(it.value());
    }
  }
}

std::filesystem::path cache_path(const FormPair& pair) {
  const char* dir = std::getenv("SPECTRAL_LAB_CACHE");
  if (!dir || !*dir) return {};
  Fnv1a64 h;
  h.update(static_cast<std::uint64_t>(pair.kind));
  hash_matrix(h, pair.A);
  if (pair.M) hash_matrix(h, *pair.M);
  char name[40];
  std::snprintf(name, sizeof name, "heat-%016llx.bin", static_cast<unsigned long long>(h.value()));
  return std::filesystem::path(dir) / name;
}

bool read_cache(const std::filesystem::path& path, std::size_t n, HeatDecomposition& d) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  char magic[8];
  std::uint64_t stored = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&stored), sizeof stored);
  if (!in || !std::equal(magic, magic + 8, kCacheMagic) || stored != n) return false;
  const auto ni = static_cast<Eigen::Index>(n);
  d.lambda.resize(ni);
  d.u.resize(ni, ni);
  in.read(reinterpret_cast<char*>(d.lambda.data()), static_cast<std::streamsize>(n * sizeof(double)));
  in.read(reinterpret_cast<char*>(d.u.data()), static_cast<std::streamsize>(n * n * sizeof(double)));
  return static_cast<bool>(in);
}

void write_cache(const std::filesystem::path& path, const HeatDecomposition& d) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) return;  // cache is best effort
    const std::uint64_t n = d.dofs();
    out.write(kCacheMagic, sizeof kCacheMagic);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(d.lambda.data()), static_cast<std::streamsize>(n * sizeof(double)));
    out.write(reinterpret_cast<const char*>(d.u.data()), static_cast<std::streamsize>(n * n * sizeof(double)));
    if (!out) return;
  }
  std::filesystem::rename(tmp, path, ec);
}

}  // namespace

HeatDecomposition heat_decomposition(const FormPair& pair, std::size_t cap) {
  const std::size_t n = pair.size();
  if (n == 0) throw Error(ErrorKind::invalid_argument, "heat kernel of an empty window");
  if (n > cap) {
    throw Error(ErrorKind::capacity, "window has " + std::to_string(n) + " DOFs; full eigendecomposition is capped at " +
                                         std::to_string(cap));
  }
  HeatDecomposition d;
  d.kind = pair.kind;
  const std::filesystem::path cached = cache_path(pair);
  if (!cached.empty() && read_cache(cached, n, d)) {
    d.source = "cache";
    return d;
  }
  Eigendecomposition e;
  if (pair.M) {
    e = generalized_eigen(to_dense(pair.A), to_dense(*pair.M), true);
    d.source = "dsygvd";
  } else {
    e = symmetric_eigen(to_dense(pair.A), true);
    d.source = "dsyevd";
  }
  d.lambda = std::move(e.values);
  d.u = std::move(e.vectors);
  if (!cached.empty()) write_cache(cached, d);
  return d;
}

std::vector<double> kernel_diag(const HeatDecomposition& d, double t) {
  const std::size_t n = d.dofs();
  std::vector<double> out(n, 0.0);
  for (Eigen::Index k = 0; k < d.lambda.size(); ++k) {
    const double w = std::exp(-d.lambda[k] * t);
    if (w == 0.0) break;  // ascending eigenvalues: the rest underflow too
    simd::accumulate_squares(w, std::span<const double>(d.u.col(k).data(), n), out);
  }
  return out;
}

Eigen::MatrixXd kernel(const HeatDecomposition& d, double t) {
  const Eigen::VectorXd w = (-t * d.lambda.array()).exp().matrix();
  return d.u * w.asDiagonal() * d.u.transpose();
}

double kernel_entry(const HeatDecomposition& d, double t, std::size_t x, std::size_t y) {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < d.lambda.size(); ++k) {
    sum += std::exp(-d.lambda[k] * t) * d.u(static_cast<Eigen::Index>(x), k) * d.u(static_cast<Eigen::Index>(y), k);
  }
  return sum;
}

double sup_kernel(const HeatDecomposition& d, double t) {
  const std::vector<double> diag = kernel_diag(d, t);
  return *std::max_element(diag.begin(), diag.end());
}

std::vector<double> log_grid(double a, double b, std::size_t points) {
  if (!(a > 0.0) || !(b > a) || points < 2) {
    throw Error(ErrorKind::invalid_argument, "log grid needs 0 < a < b and at least 2 points");
  }
  std::vector<double> out(points);
  const double la = std::log(a), lb = std::log(b);
  for (std::size_t i = 0; i < points; ++i) {
    out[i] = std::exp(la + (lb - la) * static_cast<double>(i) / static_cast<double>(points - 1));
  }
  out.front() = a;
  out.back() = b;
  return out;
}

DimensionFit dimension_fit(const std::vector<double>& t, const std::vector<double>& m, double t_lo, double t_hi) {
  if (t.size() != m.size()) throw Error(ErrorKind::invalid_argument, "time grid and M(t) differ in length");
  DimensionFit fit;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  std::vector<double> x, y;
  const double slack = 1e-12;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo * (1.0 - slack) || t[i] > t_hi * (1.0 + slack)) continue;
    if (!(m[i] > 0.0) || !(t[i] > 0.0)) throw Error(ErrorKind::invalid_argument, "dimension fit needs t, M(t) > 0");
    x.push_back(std::log(t[i]));
    y.push_back(std::log(m[i]));
  }
  fit.points = x.size();
  if (x.size() < 5) {
    throw Error(ErrorKind::invalid_argument, "degenerate fit window: " + std::to_string(x.size()) +
                                                 " grid points inside, need at least 5");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::invalid_argument, "degenerate fit window: all times equal");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.dimension = -2.0 * fit.slope;
  double r2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    r2 += r * r;
  }
  fit.residual = std::sqrt(r2);
  return fit;
}

std::optional<double> saturation_time(const std::vector<double>& t, const std::vector<double>& m, double lambda_min) {
  bool steep = false;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (lambda_min > 0.0 && t[i] * lambda_min >= 1.0) return t[i];
    if (i == 0) continue;
    const double slope = (std::log(m[i]) - std::log(m[i - 1])) / (std::log(t[i]) - std::log(t[i - 1]));
    if (std::abs(slope) >= 0.1) {
      steep = true;
    } else if (steep) {
      return t[i];
    }
  }
  return std::nullopt;
}

HeatProfile heat_profile(const HeatDecomposition& d, const std::vector<double>& t, std::size_t jobs) {
  HeatProfile p;
  p.t = t;
  p.dofs = d.dofs();
  p.source = d.source;
  p.lambda_min = d.lambda.size() ? d.lambda[0] : 0.0;
  p.m = parallel_map(t.size(), jobs, [&](std::size_t i) { return sup_kernel(d, t[i]); });
  p.saturation_time = saturation_time(p.t, p.m, p.lambda_min);
  return p;
}

FitWindow default_local_window(const HeatProfile& p) {
  if (p.t.empty()) throw Error(ErrorKind::invalid_argument, "empty heat profile");
  return {p.t.front(), 10.0 * p.t.front()};
}

FitWindow default_infinity_window(const HeatProfile& p) {
  if (p.t.empty()) throw Error(ErrorKind::invalid_argument, "empty heat profile");
  const double hi = p.saturation_time.value_or(p.t.back());
  return {hi / 10.0, hi};
}

double max_offdiagonal_excess(const HeatDecomposition& d, const std::vector<double>& t, std::size_t samples,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> site(0, d.dofs() - 1);
  std::uniform_int_distribution<std::size_t> when(0, t.size() - 1);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples; ++i) {
    const std::size_t x = site(rng), y = site(rng);
    const double tt = t[when(rng)];
    const double pxy = kernel_entry(d, tt, x, y);
    const double bound = std::sqrt(kernel_entry(d, tt, x, x) * kernel_entry(d, tt, y, y));
    worst = std::max(worst, pxy - bound);
  }
  return worst;
}

}  // namespace spectral_lab
