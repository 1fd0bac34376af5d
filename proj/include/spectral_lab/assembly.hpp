#pragma once

// Quadratic-form pairs (stiffness A, potential B) on Dirichlet truncations.
//
// Combinatorial graphs: A[u] = sum_e g_e |u(v) - u(v')|^2, B = diag(V), with u
// vanishing outside the window. Metric graphs: continuous P1 elements on a
// uniform mesh of every edge; vertex nodes are shared between incident edges,
// so continuity is built in and the Kirchhoff condition is natural for the
// form. Boundary vertices carry no DOF.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "spectral_lab/graphs.hpp"
#include "spectral_lab/potentials.hpp"

namespace spectral_lab {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class DofKind : std::uint8_t { vertex, interior };

struct Dof {
  DofKind kind = DofKind::vertex;
  VertexId vertex{};      // vertex DOFs
  EdgeId edge{};          // interior DOFs
  std::uint32_t node = 0; // interior node index, 1..m_e-1, counted from ends(edge).a
};

struct DofMap {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::vector<Dof> dofs;
  std::vector<std::size_t> vertex_dof;          // per vertex; npos when excluded
  std::vector<std::size_t> edge_first_interior; // per edge; metric only
  std::vector<EdgeEnds> edge_ends;              // per edge; metric only

  std::size_t size() const { return dofs.size(); }
  std::size_t vertex_dof_count() const;
  std::optional<std::size_t> dof_of(VertexId v) const;
};

// Intervals per edge; empty for combinatorial forms.
struct MeshDescriptor {
  std::vector<std::size_t> intervals;
  double h_max = 0.0;

  bool operator==(const MeshDescriptor&) const = default;
  std::string summary() const;
};

enum class FormKind : std::uint8_t { combinatorial, metric, pl_restricted, dirichlet_restricted, single_edge };

const char* to_string(FormKind kind);

struct FormPair {
  FormKind kind = FormKind::combinatorial;
  SparseMatrix A;                // stiffness, symmetric positive definite
  SparseMatrix B;                // potential form, symmetric positive semidefinite
  std::optional<SparseMatrix> M; // L^2 mass (metric forms)
  DofMap dofs;
  MeshDescriptor mesh;
  Quadrature rule = Quadrature::trapezoid;

  std::size_t size() const { return static_cast<std::size_t>(A.rows()); }
  FormPair with_potential_scaled(double c) const;
};

// Window = vertices carrying DOFs; everything else is Dirichlet exterior.
// Default window: every non-boundary vertex. Throws Error(invalid_argument)
// for an empty window and Error(numerical) when A is not positive definite
// (a window component that never meets the exterior).
FormPair assemble_combinatorial(const CombinatorialGraph& g, const VertexPotential& v,
                                const std::optional<std::vector<VertexId>>& window = std::nullopt);

struct MeshOptions {
  double h_target = 0.0;           // <= 0 selects l_minus / 64
  std::size_t min_intervals = 8;
};

// m_e = max(min_intervals, ceil(l_e / h_target)), rounded up to a multiple of
// the edge's sample intervals so the sampled potential is nodal on the mesh.
std::vector<std::size_t> default_mesh(const MetricGraph& g, const EdgePotential& v, MeshOptions options = {});

// Every interval count must be >= 2 and a multiple of the edge's sample
// intervals (Error(invalid_argument) otherwise). B uses the potential's rule:
// trapezoid gives the lumped nodal form, simpson integrates the piecewise
// linear interpolant of V against hat products exactly.
FormPair assemble_metric_fem(const MetricGraph& g, const EdgePotential& v, const std::vector<std::size_t>& intervals);

// A-orthogonal splitting of a metric form into edgewise-linear interpolants
// of vertex values and functions vanishing at every vertex.
struct Splitting {
  SparseMatrix pl_basis;                    // full DOFs x vertex DOFs
  std::vector<std::size_t> dirichlet_dofs;  // interior DOFs of the full pair
  FormPair pl;                              // (Phi^T A Phi, Phi^T B Phi)
  FormPair dirichlet;                       // interior-interior blocks
  double cross_block_max = 0.0;             // max |Phi^T A E_D|
};

Splitting split_pl_dirichlet(const FormPair& pair);

// Forms on H^{1,0}(e): the interval (0, l_e) with zero end values.
FormPair edge_dirichlet_pair(const MetricGraph& g, const EdgePotential& v, EdgeId e, std::size_t intervals);

// Nodal vector of the edgewise-linear function that is 1 at `v` and 0 at every
// other vertex.
// Throws Error(invalid_argument) when v carries no DOF.
Eigen::VectorXd pl_interpolant(const FormPair& metric_pair, VertexId v);

// u^T S u
double form_value(const SparseMatrix& s, const Eigen::VectorXd& u);

// Coordinate text format: one "row col value" line per stored entry, 0-based,
// 17 significant digits.
void write_coordinate(std::ostream& out, const SparseMatrix& s);

}  // namespace spectral_lab
