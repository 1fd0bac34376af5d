#include "spectral_lab/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "spectral_lab/error.hpp"
#include "spectral_lab/linalg.hpp"

namespace spectral_lab {

const char* to_string(FormKind kind) {
  switch (kind) {
    case FormKind::combinatorial: return "combinatorial";
    case FormKind::metric: return "metric";
    case FormKind::pl_restricted: return "pl_restricted";
    case FormKind::dirichlet_restricted: return "dirichlet_restricted";
    case FormKind::single_edge: return "single_edge";
  }
  return "unknown";
}

std::size_t DofMap::vertex_dof_count() const {
  return static_cast<std::size_t>(
      std::count_if(dofs.begin(), dofs.end(), [](const Dof& d) { return d.kind == DofKind::vertex; }));
}

std::optional<std::size_t> DofMap::dof_of(VertexId v) const {
  if (index(v) >= vertex_dof.size() || vertex_dof[index(v)] == npos) return std::nullopt;
  return vertex_dof[index(v)];
}

std::string MeshDescriptor::summary() const {
  if (intervals.empty()) return "none";
  const auto [lo, hi] = std::minmax_element(intervals.begin(), intervals.end());
  std::ostringstream s;
  s << intervals.size() << " edges, " << *lo << ".." << *hi << " intervals, h_max " << h_max;
  return s.str();
}

FormPair FormPair::with_potential_scaled(double c) const {
  FormPair out = *this;
  out.B *= c;
  return out;
}

namespace {

using Triplet = Eigen::Triplet<double>;

SparseMatrix from_triplets(std::size_t n, const std::vector<Triplet>& t) {
  SparseMatrix s(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  s.setFromTriplets(t.begin(), t.end());
  s.makeCompressed();
  return s;
}

void certify_stiffness(const SparseMatrix& a, const char* what) {
  if (!is_positive_definite(a)) {
    throw Error(ErrorKind::numerical, std::string(what) +
                                          ": stiffness matrix is not positive definite "
                                          "(a window component never meets the Dirichlet exterior)");
  }
}

}  // namespace

FormPair assemble_combinatorial(const CombinatorialGraph& g, const VertexPotential& v,
                                const std::optional<std::vector<VertexId>>& window) {
  const Topology& t = g.topology;
  if (v.values.size() != t.vertex_count()) {
    throw Error(ErrorKind::invalid_argument, "vertex potential size does not match the graph");
  }
  check_nonnegative(v);

  FormPair pair;
  pair.kind = FormKind::combinatorial;
  DofMap& map = pair.dofs;
  map.vertex_dof.assign(t.vertex_count(), DofMap::npos);
  std::vector<VertexId> members;
  if (window) {
    members = *window;
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
  } else {
    for (std::size_t i = 0; i < t.vertex_count(); ++i) {
      if (!t.is_boundary(vertex_id(i))) members.push_back(vertex_id(i));
    }
  }
  if (members.empty()) throw Error(ErrorKind::invalid_argument, "window is empty");
  for (VertexId u : members) {
    t.check_vertex(u);
    map.vertex_dof[index(u)] = map.dofs.size();
    map.dofs.push_back({DofKind::vertex, u, {}, 0});
  }

  std::vector<Triplet> a, b;
  for (std::size_t e = 0; e < t.edge_count(); ++e) {
    const auto& [x, y] = t.ends(edge_id(e));
    const double w = g.weight(edge_id(e));
    const std::size_t dx = map.vertex_dof[index(x)];
    const std::size_t dy = map.vertex_dof[index(y)];
    if (dx != DofMap::npos) a.emplace_back(dx, dx, w);
    if (dy != DofMap::npos) a.emplace_back(dy, dy, w);
    if (dx != DofMap::npos && dy != DofMap::npos) {
      a.emplace_back(dx, dy, -w);
      a.emplace_back(dy, dx, -w);
    }
  }
  for (std::size_t i = 0; i < map.dofs.size(); ++i) {
    const double value = v.at(map.dofs[i].vertex);
    if (value != 0.0) b.emplace_back(i, i, value);
  }
  pair.A = from_triplets(map.size(), a);
  pair.B = from_triplets(map.size(), b);
  certify_stiffness(pair.A, "assemble_combinatorial");
  return pair;
}

std::vector<std::size_t> default_mesh(const MetricGraph& g, const EdgePotential& v, MeshOptions options) {
  const GraphStats s = stats(g);
  const double h = options.h_target > 0.0 ? options.h_target : s.l_minus / 64.0;
  std::vector<std::size_t> out(g.topology.edge_count());
  for (std::size_t e = 0; e < out.size(); ++e) {
    std::size_t m = std::max(options.min_intervals,
                             static_cast<std::size_t>(std::ceil(g.length(edge_id(e)) / h - 1e-9)));
    m = std::max<std::size_t>(m, 2);
    if (const std::size_t n = v.sample_count(edge_id(e)); n >= 2) {
      const std::size_t k = n - 1;
      m = (m + k - 1) / k * k;
    }
    out[e] = m;
  }
  return out;
}

namespace {

void check_mesh(const MetricGraph& g, const EdgePotential& v, const std::vector<std::size_t>& intervals) {
  if (intervals.size() != g.topology.edge_count()) {
    throw Error(ErrorKind::invalid_argument, "mesh must give an interval count for every edge");
  }
  if (v.edge_count() != g.topology.edge_count()) {
    throw Error(ErrorKind::invalid_argument, "edge potential size does not match the graph");
  }
  for (std::size_t e = 0; e < intervals.size(); ++e) {
    const std::size_t m = intervals[e];
    if (m < 2) throw Error(ErrorKind::invalid_argument, "edge " + std::to_string(e) + ": mesh needs >= 2 intervals");
    if (const std::size_t n = v.sample_count(edge_id(e)); n >= 2) {
      if (m < n - 1) {
        throw Error(ErrorKind::invalid_argument, "edge " + std::to_string(e) +
                                                     ": mesh too coarse for the sampled potential (" +
                                                     std::to_string(m) + " intervals < " +
                                                     std::to_string(n - 1) + " sample intervals)");
      }
      if (m % (n - 1) != 0) {
        throw Error(ErrorKind::invalid_argument, "edge " + std::to_string(e) + ": mesh of " + std::to_string(m) +
                                                     " intervals does not refine the " + std::to_string(n - 1) +
                                                     " sample intervals");
      }
    }
  }
}

// Element contributions of B for one interval with end values v0, v1 of V.
// trapezoid: lumped diag(h/2 v0, h/2 v1); simpson: exact for linear V.
struct ElementPotential {
  double b00, b01, b11;
};

ElementPotential element_potential(double h, double v0, double v1, Quadrature rule) {
  if (rule == Quadrature::trapezoid) return {0.5 * h * v0, 0.0, 0.5 * h * v1};
  const double vm = 0.5 * (v0 + v1);
  return {h / 6.0 * (v0 + vm), h / 6.0 * vm, h / 6.0 * (v1 + vm)};
}

// Assembles P1 forms for the edges in `edges`. node_dof(e, j) maps local
// node j in 0..m_e to a global DOF or npos.
template <typename NodeDof>
void assemble_edges(const MetricGraph& g, const EdgePotential& v, const std::vector<std::size_t>& intervals,
                    const std::vector<EdgeId>& edges, NodeDof&& node_dof, std::vector<Triplet>& a,
                    std::vector<Triplet>& b, std::vector<Triplet>& m) {
  for (EdgeId e : edges) {
    const std::size_t n = intervals[index(e)];
    const double h = g.length(e) / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t d0 = node_dof(e, j);
      const std::size_t d1 = node_dof(e, j + 1);
      const double v0 = v.value(e, static_cast<double>(j) / static_cast<double>(n));
      const double v1 = v.value(e, static_cast<double>(j + 1) / static_cast<double>(n));
      const ElementPotential p = element_potential(h, v0, v1, v.rule());
      const double k = 1.0 / h;
      const double m_diag = h / 3.0;
      const double m_off = h / 6.0;
      if (d0 != DofMap::npos) {
        a.emplace_back(d0, d0, k);
        m.emplace_back(d0, d0, m_diag);
        if (p.b00 != 0.0) b.emplace_back(d0, d0, p.b00);
      }
      if (d1 != DofMap::npos) {
        a.emplace_back(d1, d1, k);
        m.emplace_back(d1, d1, m_diag);
        if (p.b11 != 0.0) b.emplace_back(d1, d1, p.b11);
      }
      if (d0 != DofMap::npos && d1 != DofMap::npos) {
        a.emplace_back(d0, d1, -k);
        a.emplace_back(d1, d0, -k);
        m.emplace_back(d0, d1, m_off);
        m.emplace_back(d1, d0, m_off);
        if (p.b01 != 0.0) {
          b.emplace_back(d0, d1, p.b01);
          b.emplace_back(d1, d0, p.b01);
        }
      }
    }
  }
}

MeshDescriptor describe_mesh(const MetricGraph& g, const std::vector<std::size_t>& intervals) {
  MeshDescriptor d;
  d.intervals = intervals;
  for (std::size_t e = 0; e < intervals.size(); ++e) {
    d.h_max = std::max(d.h_max, g.length(edge_id(e)) / static_cast<double>(intervals[e]));
  }
  return d;
}

}  // namespace

FormPair assemble_metric_fem(const MetricGraph& g, const EdgePotential& v, const std::vector<std::size_t>& intervals) {
  check_mesh(g, v, intervals);
  const Topology& t = g.topology;
  FormPair pair;
  pair.kind = FormKind::metric;
  pair.rule = v.rule();
  pair.mesh = describe_mesh(g, intervals);
  DofMap& map = pair.dofs;
  map.vertex_dof.assign(t.vertex_count(), DofMap::npos);
  for (std::size_t i = 0; i < t.vertex_count(); ++i) {
    if (t.is_boundary(vertex_id(i))) continue;
    map.vertex_dof[i] = map.dofs.size();
    map.dofs.push_back({DofKind::vertex, vertex_id(i), {}, 0});
  }
  map.edge_first_interior.resize(t.edge_count());
  map.edge_ends = t.edges();
  for (std::size_t e = 0; e < t.edge_count(); ++e) {
    map.edge_first_interior[e] = map.dofs.size();
    for (std::size_t j = 1; j < intervals[e]; ++j) {
      map.dofs.push_back({DofKind::interior, {}, edge_id(e), static_cast<std::uint32_t>(j)});
    }
  }
  if (map.size() == 0) throw Error(ErrorKind::invalid_argument, "metric form has no degrees of freedom");

  auto node_dof = [&](EdgeId e, std::size_t j) {
    const std::size_t n = intervals[index(e)];
    if (j == 0) return map.vertex_dof[index(t.ends(e).a)];
    if (j == n) return map.vertex_dof[index(t.ends(e).b)];
    return map.edge_first_interior[index(e)] + j - 1;
  };
  std::vector<EdgeId> all(t.edge_count());
  for (std::size_t e = 0; e < all.size(); ++e) all[e] = edge_id(e);
  std::vector<Triplet> a, b, m;
  assemble_edges(g, v, intervals, all, node_dof, a, b, m);
  pair.A = from_triplets(map.size(), a);
  pair.B = from_triplets(map.size(), b);
  pair.M = from_triplets(map.size(), m);
  certify_stiffness(pair.A, "assemble_metric_fem");
  return pair;
}

FormPair edge_dirichlet_pair(const MetricGraph& g, const EdgePotential& v, EdgeId e, std::size_t intervals) {
  g.topology.check_edge(e);
  if (intervals < 2) throw Error(ErrorKind::invalid_argument, "edge mesh needs >= 2 intervals");
  // Only edge e is meshed; the others get their sample grid so check_mesh passes.
  std::vector<std::size_t> mesh(g.topology.edge_count(), 2);
  for (std::size_t f = 0; f < mesh.size(); ++f) {
    if (const std::size_t n = v.sample_count(edge_id(f)); n >= 2) mesh[f] = n - 1;
  }
  mesh[index(e)] = intervals;
  check_mesh(g, v, mesh);

  FormPair pair;
  pair.kind = FormKind::single_edge;
  pair.rule = v.rule();
  pair.mesh.intervals = {intervals};
  pair.mesh.h_max = g.length(e) / static_cast<double>(intervals);
  pair.dofs.edge_first_interior.assign(g.topology.edge_count(), DofMap::npos);
  pair.dofs.edge_first_interior[index(e)] = 0;
  pair.dofs.vertex_dof.assign(g.topology.vertex_count(), DofMap::npos);
  for (std::size_t j = 1; j < intervals; ++j) {
    pair.dofs.dofs.push_back({DofKind::interior, {}, e, static_cast<std::uint32_t>(j)});
  }
  auto node_dof = [&](EdgeId, std::size_t j) { return (j == 0 || j == intervals) ? DofMap::npos : j - 1; };
  std::vector<Triplet> a, b, m;
  assemble_edges(g, v, mesh, {e}, node_dof, a, b, m);
  pair.A = from_triplets(pair.dofs.size(), a);
  pair.B = from_triplets(pair.dofs.size(), b);
  pair.M = from_triplets(pair.dofs.size(), m);
  certify_stiffness(pair.A, "edge_dirichlet_pair");
  return pair;
}

namespace {

// Columns: edgewise-linear interpolants of the vertex DOFs, in DOF order.
SparseMatrix pl_basis_matrix(const FormPair& pair, const std::vector<std::size_t>& vertex_dofs) {
  const DofMap& map = pair.dofs;
  std::vector<std::size_t> column(map.size(), DofMap::npos);
  for (std::size_t c = 0; c < vertex_dofs.size(); ++c) column[vertex_dofs[c]] = c;
  std::vector<Triplet> t;
  for (std::size_t c = 0; c < vertex_dofs.size(); ++c) t.emplace_back(vertex_dofs[c], c, 1.0);
  // Interior node j of an edge with m intervals carries (1 - j/m) of the
  // value at end a and j/m of the value at end b.
  for (std::size_t e = 0; e < map.edge_ends.size(); ++e) {
    const std::size_t m = pair.mesh.intervals[e];
    const std::size_t first = map.edge_first_interior[e];
    const std::size_t da = map.vertex_dof[index(map.edge_ends[e].a)];
    const std::size_t db = map.vertex_dof[index(map.edge_ends[e].b)];
    for (std::size_t j = 1; j < m; ++j) {
      const double x = static_cast<double>(j) / static_cast<double>(m);
      if (da != DofMap::npos) t.emplace_back(first + j - 1, column[da], 1.0 - x);
      if (db != DofMap::npos) t.emplace_back(first + j - 1, column[db], x);
    }
  }
  SparseMatrix s(static_cast<Eigen::Index>(map.size()), static_cast<Eigen::Index>(vertex_dofs.size()));
  s.setFromTriplets(t.begin(), t.end());
  s.makeCompressed();
  return s;
}

SparseMatrix principal_block(const SparseMatrix& s, const std::vector<std::size_t>& rows) {
  std::vector<std::size_t> position(static_cast<std::size_t>(s.rows()), DofMap::npos);
  for (std::size_t i = 0; i < rows.size(); ++i) position[rows[i]] = i;
  std::vector<Triplet> t;
  for (Eigen::Index col = 0; col < s.outerSize(); ++col) {
    const std::size_t pc = position[static_cast<std::size_t>(col)];
    if (pc == DofMap::npos) continue;
    for (SparseMatrix::InnerIterator it(s, col); it; ++it) {
      const std::size_t pr = position[static_cast<std::size_t>(it.row())];
      if (pr != DofMap::npos) t.emplace_back(pr, pc, it.value());
    }
  }
  return from_triplets(rows.size(), t);
}

void require_metric(const FormPair& pair, const char* what) {
  if (pair.kind != FormKind::metric) {
    throw Error(ErrorKind::invalid_argument, std::string(what) + " needs a pair from assemble_metric_fem");
  }
}

}  // namespace

Splitting split_pl_dirichlet(const FormPair& pair) {
  require_metric(pair, "split_pl_dirichlet");
  const DofMap& map = pair.dofs;
  std::vector<std::size_t> vertex_dofs;
  Splitting out;
  for (std::size_t i = 0; i < map.size(); ++i) {
    (map.dofs[i].kind == DofKind::vertex ? vertex_dofs : out.dirichlet_dofs).push_back(i);
  }
  out.pl_basis = pl_basis_matrix(pair, vertex_dofs);
  const SparseMatrix phi_t = out.pl_basis.transpose();
  const SparseMatrix a_phi = pair.A * out.pl_basis;

  out.pl.kind = FormKind::pl_restricted;
  out.pl.rule = pair.rule;
  out.pl.mesh = pair.mesh;
  out.pl.A = (phi_t * a_phi).pruned();
  out.pl.B = (phi_t * (pair.B * out.pl_basis)).pruned();
  out.pl.dofs.vertex_dof.assign(map.vertex_dof.size(), DofMap::npos);
  for (std::size_t c = 0; c < vertex_dofs.size(); ++c) {
    out.pl.dofs.vertex_dof[index(map.dofs[vertex_dofs[c]].vertex)] = c;
    out.pl.dofs.dofs.push_back(map.dofs[vertex_dofs[c]]);
  }
  out.pl.A.makeCompressed();
  out.pl.B.makeCompressed();

  out.dirichlet.kind = FormKind::dirichlet_restricted;
  out.dirichlet.rule = pair.rule;
  out.dirichlet.mesh = pair.mesh;
  out.dirichlet.A = principal_block(pair.A, out.dirichlet_dofs);
  out.dirichlet.B = principal_block(pair.B, out.dirichlet_dofs);
  if (pair.M) out.dirichlet.M = principal_block(*pair.M, out.dirichlet_dofs);
  out.dirichlet.dofs.vertex_dof.assign(map.vertex_dof.size(), DofMap::npos);
  for (std::size_t i : out.dirichlet_dofs) out.dirichlet.dofs.dofs.push_back(map.dofs[i]);

  // Cross block Phi^T A E_D: rows of A*Phi at interior DOFs.
  for (Eigen::Index col = 0; col < a_phi.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(a_phi, col); it; ++it) {
      if (map.dofs[static_cast<std::size_t>(it.row())].kind == DofKind::interior) {
        out.cross_block_max = std::max(out.cross_block_max, std::abs(it.value()));
      }
    }
  }
  if (!out.dirichlet_dofs.empty()) certify_stiffness(out.dirichlet.A, "split_pl_dirichlet");
  if (!vertex_dofs.empty()) certify_stiffness(out.pl.A, "split_pl_dirichlet");
  return out;
}

Eigen::VectorXd pl_interpolant(const FormPair& pair, VertexId v) {
  require_metric(pair, "pl_interpolant");
  const auto dof = pair.dofs.dof_of(v);
  if (!dof) throw Error(ErrorKind::invalid_argument, "vertex " + std::to_string(index(v)) + " carries no DOF");
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pair.size()));
  u[static_cast<Eigen::Index>(*dof)] = 1.0;
  const DofMap& map = pair.dofs;
  for (std::size_t e = 0; e < map.edge_ends.size(); ++e) {
    if (!map.edge_ends[e].touches(v)) continue;
    const std::size_t m = pair.mesh.intervals[e];
    const bool at_a = map.edge_ends[e].a == v;
    for (std::size_t j = 1; j < m; ++j) {
      const double x = static_cast<double>(j) / static_cast<double>(m);
      u[static_cast<Eigen::Index>(map.edge_first_interior[e] + j - 1)] = at_a ? 1.0 - x : x;
    }
  }
  return u;
}

double form_value(const SparseMatrix& s, const Eigen::VectorXd& u) { return u.dot(s * u); }

void write_coordinate(std::ostream& out, const SparseMatrix& s) {
  char buf[96];
  for (Eigen::Index col = 0; col < s.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(s, col); it; ++it) {
      std::snprintf(buf, sizeof buf, "%lld %lld %.17g\n", static_cast<long long>(it.row()),
                    static_cast<long long>(it.col()), it.value());
      out << buf;
    }
  }
}

}  // namespace spectral_lab
