#pragma once

// Spectral estimates evaluated on computed truncations. Lower bounds come with
// explicit witness subspaces whose Rayleigh quotients are recomputed from the
// assembled forms. Ratio diagnostics with unknown constants are tables, never
// pass/fail.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spectral_lab/assembly.hpp"
#include "spectral_lab/graphs.hpp"
#include "spectral_lab/potentials.hpp"
#include "spectral_lab/spectra.hpp"

namespace spectral_lab {

struct BoundReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // >= 0 when the bound holds
  std::vector<std::pair<std::string, double>> params;
  bool pass = false;
  bool ambiguous = false;  // some count sits on a threshold guard band
  std::string diagnostic;

  double param(const std::string& key) const;  // throws Error(not_found)
};

// pass <=> margin >= -1e-10 max(1, |lhs|, |rhs|)
void finalize(BoundReport& r);

struct WitnessCheck {
  std::size_t size = 0;            // dimension of the witness subspace
  double min_quotient = 0.0;       // smallest b[f]/a[f] over its basis
  double threshold = 0.0;          // every quotient must exceed this
  bool cleared = true;
};

// n(s, B_V) >= (d+1)^{-1} nu(g0 (d+1) s, V), lhs by inertia. The witness is
// the largest class of E(tau, V) under the greedy vertex coloring, spanned by
// delta functions; each quotient V(v) / sum_{e at v} g_e must exceed s.
// Throws Error(invalid_argument) for s <= 0 or when V is nonzero on a
// boundary vertex (outside the truncation window).
BoundReport lower_bound_combinatorial(const CombinatorialGraph& g, const VertexPotential& v, double s,
                                      WitnessCheck* witness = nullptr);

// n(lambda, B_{V,e,D}) <= C lambda^{-1/2} sqrt(eta_V(e)); also reports the
// ratio lambda^{1/2} n(lambda) pi / int_e sqrt(V) ("weyl_edge_ratio", absent
// when V vanishes on e) and the empirical constant lambda^{1/2} n / sqrt(eta).
BoundReport per_edge_dirichlet_bound(const MetricGraph& g, const EdgePotential& v, EdgeId e, double lambda,
                                     std::size_t intervals, double c = 1.0);

// max{n(s,pl), n(s,D)} <= n(s, full) <= n(s/2, pl) + n(s/2, D).
// Throws Error(invalid_argument) unless the three pairs share one mesh.
BoundReport bracketing_check(const FormPair& full, const FormPair& pl, const FormPair& dirichlet, double s);
BoundReport bracketing_check(const MetricGraph& g, const EdgePotential& v, const std::vector<std::size_t>& intervals,
                             double s);

// lambda_n(B_{V,pl}) <= lambda_n(B_{kappa_V}) for every n, with B_kappa on the
// associated combinatorial graph. Throws Error(invalid_argument) when the two
// pairs live on different vertex windows.
BoundReport domination_check(const FormPair& pl, const FormPair& kappa_pair);
BoundReport domination_check(const MetricGraph& g, const EdgePotential& v, const std::vector<std::size_t>& intervals);

// n(s, B_V) >= (2d^2+1)^{-1} nu(2(d-1)(l+/l-) s, eta_V). The witness family
// phi_e (1 on e, linear to 0 across the rest of S(e)) is evaluated on the
// assembled forms: each ratio must reach (2d-2)^{-1} (l-/l+) eta_V(e), and the
// largest star-disjoint class of edges with eta_V > c'' s spans the witness.
// Throws Error(invalid_argument) for d < 2, s <= 0, or V nonzero on an edge
// touching a boundary vertex.
BoundReport metric_lower_bound(const MetricGraph& g, const EdgePotential& v, double s,
                               const std::vector<std::size_t>& intervals, WitnessCheck* witness = nullptr);

// Direct evaluation of both forms on phi_e.
struct EdgeWitness {
  EdgeId edge{};
  double numerator = 0.0;    // b_V[phi_e]
  double denominator = 0.0;  // a[phi_e]
  double claimed = 0.0;      // (2d-2)^{-1} (l-/l+) eta_V(e)
  double quotient() const { return numerator / denominator; }
};
EdgeWitness edge_witness(const MetricGraph& g, const FormPair& full, const std::vector<double>& eta_values, EdgeId e);

struct RlcRow {
  double alpha = 0.0;
  std::size_t n_minus = 0;
  bool threshold = false;
  double ratio = 0.0;       // N / (alpha^q ||V||_q^q)
  double weak_ratio = 0.0;  // N / (alpha^q ||V||_{q,w}^q)
};

// Throws Error(invalid_argument) for q <= 0 or alpha <= 0.
std::vector<RlcRow> rlc_ratio(const FormPair& pair, const std::vector<double>& potential_values, double q,
                              const std::vector<double>& alphas, std::size_t jobs = 1);

struct WeylRow {
  double alpha = 0.0;
  std::size_t level = 0;     // mesh refinement level
  double h_max = 0.0;
  std::size_t dofs = 0;
  std::size_t n_minus = 0;
  bool threshold = false;
  double weyl = 0.0;         // pi N / (alpha^{1/2} int sqrt V)
  double eta_ratio = 0.0;    // N / (alpha^{1/2} sum eta^{1/2})
};

// Rows for every alpha and refinement level; level k halves h_target k times.
// Throws Error(invalid_argument) when int sqrt(V) = 0.
std::vector<WeylRow> weyl_ratio(const MetricGraph& g, const EdgePotential& v, const std::vector<double>& alphas,
                                MeshOptions mesh = {}, std::size_t levels = 1, std::size_t jobs = 1);

}  // namespace spectral_lab
