#include "spectral_lab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spectral_lab/coloring.hpp"
#include "spectral_lab/error.hpp"
#include "spectral_lab/parallel.hpp"

namespace spectral_lab {

double BoundReport::param(const std::string& key) const {
  for (const auto& [k, v] : params) {
    if (k == key) return v;
  }
  throw Error(ErrorKind::not_found, "bound report has no parameter " + key, key);
}

void finalize(BoundReport& r) {
  const double tol = 1e-10 * std::max({1.0, std::abs(r.lhs), std::abs(r.rhs)});
  r.pass = r.margin >= -tol;
}

namespace {

void require_positive(double x, const char* what) {
  if (!(x > 0.0)) throw Error(ErrorKind::invalid_argument, std::string(what) + " must be > 0");
}

// The estimates are stated with the trapezoid-consistent eta/kappa; the
// FEM potential form must use the same rule.
EdgePotential trapezoid(const EdgePotential& v) {
  EdgePotential out = v;
  out.set_rule(Quadrature::trapezoid);
  return out;
}

}  // namespace

BoundReport lower_bound_combinatorial(const CombinatorialGraph& g, const VertexPotential& v, double s,
                                      WitnessCheck* witness) {
  require_positive(s, "s");
  check_nonnegative(v);
  const Topology& t = g.topology;
  if (v.values.size() != t.vertex_count()) {
    throw Error(ErrorKind::invalid_argument, "potential size does not match the graph");
  }
  for (std::size_t i = 0; i < t.vertex_count(); ++i) {
    if (t.is_boundary(vertex_id(i)) && v.values[i] != 0.0) {
      throw Error(ErrorKind::invalid_argument, "window does not contain supp V: V is nonzero on boundary vertex " +
                                                   t.label(vertex_id(i)), t.label(vertex_id(i)));
    }
  }
  const GraphStats st = stats(g);
  const double d1 = static_cast<double>(st.degree_bound + 1);
  const double tau = st.g_zero * d1 * s;

  BoundReport r;
  r.name = "lower-combinatorial";
  r.params = {{"s", s}, {"tau", tau}, {"degree_bound", static_cast<double>(st.degree_bound)}, {"g_zero", st.g_zero}};
  const std::size_t nu = distribution(v.values, tau);
  r.rhs = static_cast<double>(nu) / d1;
  r.params.emplace_back("nu", static_cast<double>(nu));

  WitnessCheck w;
  w.threshold = s;
  w.min_quotient = std::numeric_limits<double>::infinity();
  const FormPair pair = assemble_combinatorial(g, v);
  const Count n = pencil_count(pair, s);
  r.lhs = static_cast<double>(n.value);
  r.ambiguous = n.ambiguous;
  if (nu == 0) {
    w.min_quotient = 0.0;
  } else {
    // Largest class of E(tau, V) under the proper coloring.
    const VertexColoring coloring = greedy_vertex_coloring(t);
    std::vector<std::size_t> per_class(coloring.class_count, 0);
    for (std::size_t i = 0; i < t.vertex_count(); ++i) {
      if (v.values[i] > tau) ++per_class[coloring.color[i]];
    }
    const std::size_t best = static_cast<std::size_t>(
        std::max_element(per_class.begin(), per_class.end()) - per_class.begin());
    for (std::size_t i = 0; i < t.vertex_count(); ++i) {
      if (v.values[i] <= tau || coloring.color[i] != best) continue;
      const auto dof = static_cast<Eigen::Index>(*pair.dofs.dof_of(vertex_id(i)));
      const double q = pair.B.coeff(dof, dof) / pair.A.coeff(dof, dof);
      w.min_quotient = std::min(w.min_quotient, q);
      w.cleared = w.cleared && q > s;
      ++w.size;
    }
    r.params.emplace_back("witness_size", static_cast<double>(w.size));
    r.params.emplace_back("witness_min_quotient", w.min_quotient);
    if (static_cast<double>(w.size) < r.rhs) w.cleared = false;
  }
  r.margin = r.lhs - r.rhs;
  finalize(r);
  if (!w.cleared) {
    r.pass = false;
    r.diagnostic = "witness subspace does not clear the threshold";
  }
  if (witness) *witness = w;
  return r;
}

BoundReport per_edge_dirichlet_bound(const MetricGraph& g, const EdgePotential& v, EdgeId e, double lambda,
                                     std::size_t intervals, double c) {
  require_positive(lambda, "lambda");
  const EdgePotential vt = trapezoid(v);
  const double l = g.length(e);
  const double eta_e = l * vt.integral(e, l);
  BoundReport r;
  r.name = "per-edge";
  r.params = {{"lambda", lambda}, {"C", c}, {"eta", eta_e}, {"edge", static_cast<double>(index(e))},
              {"intervals", static_cast<double>(intervals)}};
  if (eta_e > 0.0) {
    const FormPair pair = edge_dirichlet_pair(g, vt, e, intervals);
    const Count n = pencil_count(pair, lambda);
    r.lhs = static_cast<double>(n.value);
    r.ambiguous = n.ambiguous;
  }
  r.rhs = c * std::sqrt(eta_e / lambda);
  r.margin = r.rhs - r.lhs;
  r.params.emplace_back("empirical_constant", eta_e > 0.0 ? std::sqrt(lambda) * r.lhs / std::sqrt(eta_e) : 0.0);
  if (const double root = vt.sqrt_integral(e, l); root > 0.0) {
    r.params.emplace_back("weyl_edge_ratio", std::sqrt(lambda) * r.lhs * std::numbers::pi / root);
  }
  finalize(r);
  return r;
}

BoundReport bracketing_check(const FormPair& full, const FormPair& pl, const FormPair& dirichlet, double s) {
  require_positive(s, "s");
  if (!(full.mesh == pl.mesh) || !(full.mesh == dirichlet.mesh) || full.rule != pl.rule ||
      full.rule != dirichlet.rule) {
    throw Error(ErrorKind::invalid_argument, "bracketing needs full, pl and Dirichlet forms on one mesh");
  }
  if (pl.size() + dirichlet.size() != full.size()) {
    throw Error(ErrorKind::invalid_argument, "pl and Dirichlet DOFs do not add up to the full form");
  }
  bool ambiguous = false;
  auto count = [&](const FormPair& p, double x) -> std::size_t {
    if (p.size() == 0) return 0;
    const Count c = pencil_count(p, x);
    ambiguous = ambiguous || c.ambiguous;
    return c.value;
  };
  const std::size_t n_full = count(full, s);
  const std::size_t n_pl = count(pl, s), n_d = count(dirichlet, s);
  const std::size_t n_pl2 = count(pl, s / 2), n_d2 = count(dirichlet, s / 2);
  BoundReport r;
  r.name = "bracketing";
  r.lhs = static_cast<double>(n_full);
  r.rhs = static_cast<double>(std::max(n_pl, n_d));
  const double upper = static_cast<double>(n_pl2 + n_d2);
  r.margin = std::min(r.lhs - r.rhs, upper - r.lhs);
  r.params = {{"s", s},
              {"n_full", static_cast<double>(n_full)},
              {"n_pl", static_cast<double>(n_pl)},
              {"n_dirichlet", static_cast<double>(n_d)},
              {"n_pl_half", static_cast<double>(n_pl2)},
              {"n_dirichlet_half", static_cast<double>(n_d2)},
              {"upper", upper}};
  r.ambiguous = ambiguous;
  finalize(r);
  return r;
}

BoundReport bracketing_check(const MetricGraph& g, const EdgePotential& v, const std::vector<std::size_t>& intervals,
                             double s) {
  const FormPair full = assemble_metric_fem(g, trapezoid(v), intervals);
  const Splitting split = split_pl_dirichlet(full);
  BoundReport r = bracketing_check(full, split.pl, split.dirichlet, s);
  r.params.emplace_back("cross_block_max", split.cross_block_max);
  return r;
}

BoundReport domination_check(const FormPair& pl, const FormPair& kappa_pair) {
  if (pl.dofs.vertex_dof != kappa_pair.dofs.vertex_dof) {
    throw Error(ErrorKind::invalid_argument, "pl and kappa forms use different vertex windows");
  }
  EigenRequest all;
  const SpectralReport a = pencil_eigenvalues(pl, all);
  const SpectralReport b = pencil_eigenvalues(kappa_pair, all);
  BoundReport r;
  r.name = "domination";
  r.margin = std::numeric_limits<double>::infinity();
  const std::size_t n = std::max(a.eigenvalues.size(), b.eigenvalues.size());
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = i < a.eigenvalues.size() ? a.eigenvalues[i] : 0.0;
    const double y = i < b.eigenvalues.size() ? b.eigenvalues[i] : 0.0;
    scale = std::max({scale, x, y});
    if (y - x < r.margin) {
      r.margin = y - x;
      r.lhs = y;
      r.rhs = x;
      r.params = {{"index", static_cast<double>(i + 1)}};
    }
  }
  if (n == 0) {
    r.margin = 0.0;
    r.params = {{"index", 0.0}};
  }
  r.params.emplace_back("compared", static_cast<double>(n));
  r.params.emplace_back("pl_top", a.eigenvalues.empty() ? 0.0 : a.eigenvalues.front());
  r.params.emplace_back("kappa_top", b.eigenvalues.empty() ? 0.0 : b.eigenvalues.front());
  // Eigenvalues carry relative rounding error; judge the margin against the
  // spectral scale rather than the compared pair.
  const double tol = 1e-9 * std::max(1.0, scale);
  r.pass = r.margin >= -tol;
  return r;
}

BoundReport domination_check(const MetricGraph& g, const EdgePotential& v, const std::vector<std::size_t>& intervals) {
  const EdgePotential vt = trapezoid(v);
  const FormPair full = assemble_metric_fem(g, vt, intervals);
  const Splitting split = split_pl_dirichlet(full);
  const FormPair kp = assemble_combinatorial(associated_combinatorial(g), kappa(g, vt));
  return domination_check(split.pl, kp);
}

EdgeWitness edge_witness(const MetricGraph& g, const FormPair& full, const std::vector<double>& eta_values, EdgeId e) {
  const GraphStats st = stats(g);
  if (st.degree_bound < 2) throw Error(ErrorKind::invalid_argument, "edge witnesses need degree bound >= 2");
  const EdgeEnds ends = g.topology.ends(e);
  const Eigen::VectorXd phi = pl_interpolant(full, ends.a) + pl_interpolant(full, ends.b);
  EdgeWitness w;
  w.edge = e;
  w.numerator = form_value(full.B, phi);
  w.denominator = form_value(full.A, phi);
  w.claimed = eta_values.at(index(e)) * st.l_minus / (st.l_plus * (2.0 * static_cast<double>(st.degree_bound) - 2.0));
  return w;
}

BoundReport metric_lower_bound(const MetricGraph& g, const EdgePotential& v, double s,
                               const std::vector<std::size_t>& intervals, WitnessCheck* witness) {
  require_positive(s, "s");
  const Topology& t = g.topology;
  const GraphStats st = stats(g);
  if (st.degree_bound < 2) throw Error(ErrorKind::invalid_argument, "metric lower bound needs degree bound >= 2");
  const EdgePotential vt = trapezoid(v);
  const std::vector<double> eta_values = eta(g, vt);
  for (std::size_t e = 0; e < t.edge_count(); ++e) {
    const EdgeEnds ends = t.ends(edge_id(e));
    if (eta_values[e] > 0.0 && (t.is_boundary(ends.a) || t.is_boundary(ends.b))) {
      throw Error(ErrorKind::invalid_argument,
                  "supp V meets edge " + std::to_string(e) + ", which touches a boundary vertex",
                  std::to_string(e));
    }
  }
  const double d = static_cast<double>(st.degree_bound);
  const double c1 = 1.0 / (2.0 * d * d + 1.0);
  const double c2 = 2.0 * (d - 1.0) * st.l_plus / st.l_minus;
  const std::size_t nu = distribution(eta_values, c2 * s);

  BoundReport r;
  r.name = "lower-metric";
  r.params = {{"s", s}, {"c_prime", c1}, {"c_double_prime", c2}, {"degree_bound", d},
              {"l_minus", st.l_minus}, {"l_plus", st.l_plus}, {"nu", static_cast<double>(nu)}};
  r.rhs = c1 * static_cast<double>(nu);

  WitnessCheck w;
  w.threshold = s;
  const FormPair full = assemble_metric_fem(g, vt, intervals);
  const Count n = pencil_count(full, s);
  r.lhs = static_cast<double>(n.value);
  r.ambiguous = n.ambiguous;
  if (nu > 0) {
    const EdgeStarColoring coloring = greedy_edge_star_coloring(t);
    std::vector<std::size_t> per_class(coloring.class_count, 0);
    for (std::size_t e = 0; e < t.edge_count(); ++e) {
      if (eta_values[e] > c2 * s) ++per_class[coloring.color[e]];
    }
    const std::size_t best = static_cast<std::size_t>(
        std::max_element(per_class.begin(), per_class.end()) - per_class.begin());
    w.min_quotient = std::numeric_limits<double>::infinity();
    double worst_claim = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < t.edge_count(); ++e) {
      if (eta_values[e] <= c2 * s || coloring.color[e] != best) continue;
      const EdgeWitness ew = edge_witness(g, full, eta_values, edge_id(e));
      const double q = ew.quotient();
      w.min_quotient = std::min(w.min_quotient, q);
      worst_claim = std::min(worst_claim, q - ew.claimed * (1.0 - 1e-12));
      w.cleared = w.cleared && q > s && q >= ew.claimed * (1.0 - 1e-12);
      ++w.size;
    }
    if (static_cast<double>(w.size) < r.rhs) w.cleared = false;
    r.params.emplace_back("witness_size", static_cast<double>(w.size));
    r.params.emplace_back("witness_min_quotient", w.min_quotient);
    r.params.emplace_back("witness_claim_margin", worst_claim);
  }
  r.margin = r.lhs - r.rhs;
  finalize(r);
  if (!w.cleared) {
    r.pass = false;
    r.diagnostic = "witness subspace does not clear the threshold";
  }
  if (witness) *witness = w;
  return r;
}

std::vector<RlcRow> rlc_ratio(const FormPair& pair, const std::vector<double>& potential_values, double q,
                              const std::vector<double>& alphas, std::size_t jobs) {
  const QuasiNorms norms = quasi_norms(potential_values, q);
  for (double a : alphas) require_positive(a, "alpha");
  const double strong = std::pow(norms.lq, q);
  const double weak = std::pow(norms.weak, q);
  return parallel_map(alphas.size(), jobs, [&](std::size_t i) {
    RlcRow row;
    row.alpha = alphas[i];
    const NegativeCount n = negative_count(pair, row.alpha);
    row.n_minus = n.value;
    row.threshold = n.threshold;
    const double scale = std::pow(row.alpha, q);
    const double nd = static_cast<double>(n.value);
    row.ratio = strong > 0.0 ? nd / (scale * strong) : 0.0;
    row.weak_ratio = weak > 0.0 ? nd / (scale * weak) : 0.0;
    return row;
  });
}

std::vector<WeylRow> weyl_ratio(const MetricGraph& g, const EdgePotential& v, const std::vector<double>& alphas,
                                MeshOptions mesh, std::size_t levels, std::size_t jobs) {
  const double root = sqrt_integral(g, v);
  if (!(root > 0.0)) throw Error(ErrorKind::invalid_argument, "Weyl ratio undefined: integral of sqrt(V) is zero");
  for (double a : alphas) require_positive(a, "alpha");
  if (levels == 0) levels = 1;
  double eta_half = 0.0;
  for (double x : eta(g, v)) eta_half += std::sqrt(x);
  if (!(mesh.h_target > 0.0)) mesh.h_target = stats(g).l_minus / 64.0;

  std::vector<WeylRow> rows;
  for (std::size_t level = 0; level < levels; ++level) {
    MeshOptions m = mesh;
    m.h_target = mesh.h_target / std::pow(2.0, static_cast<double>(level));
    const std::vector<std::size_t> intervals = default_mesh(g, v, m);
    const FormPair pair = assemble_metric_fem(g, v, intervals);
    std::vector<WeylRow> part = parallel_map(alphas.size(), jobs, [&](std::size_t i) {
      WeylRow row;
      row.alpha = alphas[i];
      row.level = level;
      row.h_max = pair.mesh.h_max;
      row.dofs = pair.size();
      const NegativeCount n = negative_count(pair, row.alpha);
      row.n_minus = n.value;
      row.threshold = n.threshold;
      const double nd = static_cast<double>(n.value);
      row.weyl = std::numbers::pi * nd / (std::sqrt(row.alpha) * root);
      row.eta_ratio = eta_half > 0.0 ? nd / (std::sqrt(row.alpha) * eta_half) : 0.0;
      return row;
    });
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

}  // namespace spectral_lab
