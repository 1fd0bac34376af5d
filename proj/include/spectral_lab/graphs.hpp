#pragma once

// Combinatorial and metric graphs on finite Dirichlet truncations.
//
// Infinite graphs are represented by a finite window together with a set of
// boundary vertices on which every admissible function vanishes. Boundary
// vertices model the cut and are exempt from the minimum-degree rule.

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace spectral_lab {

enum class VertexId : std::uint32_t {};
enum class EdgeId : std::uint32_t {};

constexpr std::size_t index(VertexId v) { return static_cast<std::size_t>(v); }
constexpr std::size_t index(EdgeId e) { return static_cast<std::size_t>(e); }
constexpr VertexId vertex_id(std::size_t i) { return static_cast<VertexId>(i); }
constexpr EdgeId edge_id(std::size_t i) { return static_cast<EdgeId>(i); }

struct EdgeEnds {
  VertexId a;
  VertexId b;

  VertexId other(VertexId v) const { return v == a ? b : a; }
  bool touches(VertexId v) const { return v == a || v == b; }
};

// Vertex/edge structure shared by both graph kinds. Vertex and edge ids are
// dense and follow insertion order.
class Topology {
 public:
  VertexId add_vertex(std::string label, bool boundary = false);
  EdgeId add_edge(VertexId a, VertexId b);

  std::size_t vertex_count() const { return labels_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const std::string& label(VertexId v) const { return labels_.at(index(v)); }
  bool is_boundary(VertexId v) const { return boundary_.at(index(v)); }
  void set_boundary(VertexId v, bool boundary) { boundary_.at(index(v)) = boundary; }
  const EdgeEnds& ends(EdgeId e) const { return edges_.at(index(e)); }
  const std::vector<EdgeEnds>& edges() const { return edges_; }

  // Edges incident to v, in insertion order.
  const std::vector<EdgeId>& incident(VertexId v) const { return incident_.at(index(v)); }
  std::size_t degree(VertexId v) const { return incident(v).size(); }
  bool adjacent(VertexId u, VertexId v) const;

  // Throws Error(not_found) for unknown labels.
  VertexId find(const std::string& label) const;

  void check_vertex(VertexId v) const;
  void check_edge(EdgeId e) const;

 private:
  std::vector<std::string> labels_;
  std::vector<bool> boundary_;
  std::vector<EdgeEnds> edges_;
  std::vector<std::vector<EdgeId>> incident_;
};

struct CombinatorialGraph {
  Topology topology;
  std::vector<double> weights;  // g_e, indexed by EdgeId

  EdgeId add_edge(VertexId a, VertexId b, double weight) {
    weights.push_back(weight);
    return topology.add_edge(a, b);
  }
  double weight(EdgeId e) const { return weights.at(index(e)); }
};

struct MetricGraph {
  Topology topology;
  std::vector<double> lengths;  // l_e, indexed by EdgeId

  EdgeId add_edge(VertexId a, VertexId b, double length) {
    lengths.push_back(length);
    return topology.add_edge(a, b);
  }
  double length(EdgeId e) const { return lengths.at(index(e)); }
};

using AnyGraph = std::variant<CombinatorialGraph, MetricGraph>;

struct GraphStats {
  std::size_t degree_bound = 0;  // max vertex degree
  double g_zero = 0.0;           // max edge weight
  double l_minus = 0.0;          // min edge length (metric graphs only)
  double l_plus = 0.0;           // max edge length (metric graphs only)
};

GraphStats stats(const CombinatorialGraph& g);
GraphStats stats(const MetricGraph& g);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate(const CombinatorialGraph& g);
ValidationReport validate(const MetricGraph& g);

// Throws Error(invalid_graph) listing the violations.
void require_valid(const CombinatorialGraph& g);
void require_valid(const MetricGraph& g);

// Same structure, g_e = 1 / l_e.
CombinatorialGraph associated_combinatorial(const MetricGraph& g);

// S(v): edges incident to v.
std::vector<EdgeId> star(const Topology& t, VertexId v);
// S(e) = S(v) u S(v') for e = (v, v'), sorted, without duplicates.
std::vector<EdgeId> edge_star(const Topology& t, EdgeId e);
// S(e) and S(f) share an edge iff the edges share a vertex or an endpoint of
// one is adjacent to an endpoint of the other.
bool stars_intersect(const Topology& t, EdgeId e, EdgeId f);

struct BuildLimits {
  std::size_t max_vertices = 2'000'000;
};

// Box {-radius..radius}^d with unit weights; vertices on the faces are
// boundary. Vertex ids enumerate coordinates lexicographically, labels are
// comma-joined coordinates.
CombinatorialGraph build_lattice(int d, int radius, BuildLimits limits = {});
// Same box with every edge of the given length.
MetricGraph build_metric_lattice(int d, int radius, double length, BuildLimits limits = {});
// Complete tree, `depth` generations below the root, unit weights. Leaves
// are boundary.
CombinatorialGraph build_tree(int branching, int depth, BuildLimits limits = {});
// Path through lengths.size() edges; both end vertices are boundary.
MetricGraph build_metric_path(const std::vector<double>& lengths);
// Star with a free center and one boundary leaf per length.
MetricGraph build_metric_star(const std::vector<double>& lengths);

// Connected random graph: a random spanning tree plus extra uniformly sampled
// edges, all respecting max_degree. Degree-one vertices are marked boundary.
struct RandomGraphOptions {
  std::size_t vertices = 20;
  std::size_t max_degree = 4;
  std::size_t extra_edges = 10;
  double min_value = 1.0;  // weights (combinatorial) or lengths (metric) are
  double max_value = 1.0;  // drawn uniformly from [min_value, max_value]
  std::uint64_t seed = 1;
};
CombinatorialGraph build_random(const RandomGraphOptions& options);
MetricGraph build_random_metric(const RandomGraphOptions& options);

// Line-oriented text format:
//   graph combinatorial|metric
//   v <label> [boundary]
//   e <label1> <label2> <weight|length>
// '#' starts a comment. Values are written with 17 significant digits.
AnyGraph read_graph(std::istream& in);
AnyGraph load_graph(const std::string& path);
void write_graph(std::ostream& out, const CombinatorialGraph& g);
void write_graph(std::ostream& out, const MetricGraph& g);

}  // namespace spectral_lab
