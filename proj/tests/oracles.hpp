#pragma once

// Reference computations for the tests. They deliberately avoid the library's
// solvers: dense Eigen eigensolvers instead of LAPACK/inertia/Lanczos, and
// explicitly materialized stars instead of the adjacency predicate.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "spectral_lab/coloring.hpp"
#include "spectral_lab/graphs.hpp"
#include "spectral_lab/potentials.hpp"

namespace oracle {

using spectral_lab::EdgeId;
using spectral_lab::Topology;
using spectral_lab::VertexId;

// Eigenvalues of B x = s A x, nonincreasing: L^{-1} B L^{-T} with A = L L^T,
// all dense Eigen.
inline std::vector<double> pencil_spectrum(const Eigen::SparseMatrix<double>& a, const Eigen::SparseMatrix<double>& b) {
  const Eigen::MatrixXd ad(a), bd(b);
  const Eigen::LLT<Eigen::MatrixXd> llt(ad);
  const Eigen::MatrixXd linv = llt.matrixL().solve(Eigen::MatrixXd::Identity(ad.rows(), ad.cols()));
  const Eigen::MatrixXd c = linv * bd * linv.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sym(c, Eigen::EigenvaluesOnly);
  std::vector<double> out(sym.eigenvalues().data(), sym.eigenvalues().data() + sym.eigenvalues().size());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

inline std::vector<double> positive_part(const std::vector<double>& v, double rel = 1e-12) {
  const double top = v.empty() ? 0.0 : std::max(0.0, v.front());
  std::vector<double> out;
  for (double x : v) {
    if (x > rel * top) out.push_back(x);
  }
  return out;
}

// Number of eigenvalues of A - alpha B below zero, by dense eigensolve.
inline std::size_t negative_eigenvalues(const Eigen::SparseMatrix<double>& a, const Eigen::SparseMatrix<double>& b,
                                        double alpha) {
  const Eigen::MatrixXd m = Eigen::MatrixXd(a) - alpha * Eigen::MatrixXd(b);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return static_cast<std::size_t>((es.eigenvalues().array() < 0.0).count());
}

inline std::set<std::size_t> materialized_edge_star(const Topology& t, EdgeId e) {
  std::set<std::size_t> s;
  const auto ends = t.ends(e);
  for (EdgeId f : t.incident(ends.a)) s.insert(spectral_lab::index(f));
  for (EdgeId f : t.incident(ends.b)) s.insert(spectral_lab::index(f));
  return s;
}

inline bool coloring_is_proper(const Topology& t, const spectral_lab::VertexColoring& c) {
  for (const auto& e : t.edges()) {
    if (c.color[spectral_lab::index(e.a)] == c.color[spectral_lab::index(e.b)]) return false;
  }
  return true;
}

inline bool coloring_is_star_disjoint(const Topology& t, const spectral_lab::EdgeStarColoring& c) {
  std::vector<std::set<std::size_t>> stars;
  for (std::size_t e = 0; e < t.edge_count(); ++e) stars.push_back(materialized_edge_star(t, spectral_lab::edge_id(e)));
  for (std::size_t e = 0; e < t.edge_count(); ++e) {
    for (std::size_t f = e + 1; f < t.edge_count(); ++f) {
      if (c.color[e] != c.color[f]) continue;
      for (std::size_t x : stars[e]) {
        if (stars[f].count(x)) return false;
      }
    }
  }
  return true;
}

inline std::size_t max_degree(const Topology& t) {
  std::size_t d = 0;
  for (std::size_t v = 0; v < t.vertex_count(); ++v) d = std::max(d, t.degree(spectral_lab::vertex_id(v)));
  return d;
}

// Birman-Schwinger eigenvalues of -u'' on (0, l), Dirichlet ends, V = c:
// s_k = c l^2 / (k pi)^2.
inline double dirichlet_interval_bs(double c, double l, int k) {
  const double kp = k * std::numbers::pi;
  return c * l * l / (kp * kp);
}

// Random potential vanishing on boundary vertices.
inline spectral_lab::VertexPotential random_vertex_potential(const Topology& t, std::mt19937_64& rng, double max,
                                                             double density = 1.0) {
  std::uniform_real_distribution<double> u(0.0, max), coin(0.0, 1.0);
  spectral_lab::VertexPotential v = spectral_lab::VertexPotential::zero(t.vertex_count());
  for (std::size_t i = 0; i < t.vertex_count(); ++i) {
    const double x = u(rng);
    if (!t.is_boundary(spectral_lab::vertex_id(i)) && coin(rng) < density) v.values[i] = x;
  }
  return v;
}

// Random sampled potential, zero on edges that touch a boundary vertex when
// `interior_only` is set.
inline spectral_lab::EdgePotential random_edge_potential(const spectral_lab::MetricGraph& g, std::mt19937_64& rng,
                                                         double max, std::size_t samples, bool interior_only) {
  std::uniform_real_distribution<double> u(0.0, max);
  const Topology& t = g.topology;
  spectral_lab::EdgePotential v(t.edge_count());
  for (std::size_t e = 0; e < t.edge_count(); ++e) {
    const auto ends = t.ends(spectral_lab::edge_id(e));
    std::vector<double> s(samples);
    for (double& x : s) x = u(rng);
    if (interior_only && (t.is_boundary(ends.a) || t.is_boundary(ends.b))) {
      v.set_constant(spectral_lab::edge_id(e), 0.0);
    } else {
      v.set_samples(spectral_lab::edge_id(e), std::move(s));
    }
  }
  return v;
}

}  // namespace oracle
