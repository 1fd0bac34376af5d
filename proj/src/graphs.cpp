#include "spectral_lab/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <utility>

#include "spectral_lab/error.hpp"

namespace spectral_lab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::invalid_graph: return "invalid_graph";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::capacity: return "capacity";
  }
  return "unknown";
}

VertexId Topology::add_vertex(std::string label, bool boundary) {
  labels_.push_back(std::move(label));
  boundary_.push_back(boundary);
  incident_.emplace_back();
  return vertex_id(labels_.size() - 1);
}

EdgeId Topology::add_edge(VertexId a, VertexId b) {
  check_vertex(a);
  check_vertex(b);
  const EdgeId e = edge_id(edges_.size());
  edges_.push_back({a, b});
  incident_[index(a)].push_back(e);
  if (a != b) incident_[index(b)].push_back(e);
  return e;
}

bool Topology::adjacent(VertexId u, VertexId v) const {
  const auto& inc = incident(u).size() <= incident(v).size() ? incident(u) : incident(v);
  const VertexId probe = incident(u).size() <= incident(v).size() ? u : v;
  const VertexId target = probe == u ? v : u;
  return std::any_of(inc.begin(), inc.end(),
                     [&](EdgeId e) { return ends(e).other(probe) == target; });
}

VertexId Topology::find(const std::string& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw Error(ErrorKind::not_found, "unknown vertex label '" + label + "'", label);
  return vertex_id(static_cast<std::size_t>(it - labels_.begin()));
}

void Topology::check_vertex(VertexId v) const {
  if (index(v) >= labels_.size()) {
    throw Error(ErrorKind::not_found, "unknown vertex id " + std::to_string(index(v)));
  }
}

void Topology::check_edge(EdgeId e) const {
  if (index(e) >= edges_.size()) {
    throw Error(ErrorKind::not_found, "unknown edge id " + std::to_string(index(e)));
  }
}

namespace {

std::size_t max_degree(const Topology& t) {
  std::size_t d = 0;
  for (std::size_t v = 0; v < t.vertex_count(); ++v) d = std::max(d, t.degree(vertex_id(v)));
  return d;
}

bool connected(const Topology& t) {
  if (t.vertex_count() == 0) return true;
  std::vector<char> seen(t.vertex_count(), 0);
  std::vector<VertexId> stack{vertex_id(0)};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const VertexId v = stack.back();
    stack.pop_back();
    for (EdgeId e : t.incident(v)) {
      const VertexId w = t.ends(e).other(v);
      if (!seen[index(w)]) {
        seen[index(w)] = 1;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  return reached == t.vertex_count();
}

void structural_violations(const Topology& t, std::vector<std::string>& out) {
  if (t.vertex_count() == 0) {
    out.push_back("empty graph");
    return;
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t i = 0; i < t.edge_count(); ++i) {
    const auto& [a, b] = t.ends(edge_id(i));
    if (a == b) {
      out.push_back("loop at edge " + std::to_string(i) + " (vertex '" + t.label(a) + "')");
      continue;
    }
    const std::pair<std::size_t, std::size_t> key{std::min(index(a), index(b)), std::max(index(a), index(b))};
    if (!seen.insert(key).second) {
      out.push_back("multiple edge between '" + t.label(a) + "' and '" + t.label(b) + "'");
    }
  }
  if (!connected(t)) out.push_back("not connected");
  for (std::size_t v = 0; v < t.vertex_count(); ++v) {
    const VertexId id = vertex_id(v);
    if (!t.is_boundary(id) && t.degree(id) < 2) {
      out.push_back("vertex '" + t.label(id) + "' has degree " + std::to_string(t.degree(id)) +
                    " and is not marked boundary");
    }
  }
}

void positive_values(const std::vector<double>& values, const char* what, std::vector<std::string>& out) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      out.push_back(std::string("edge ") + std::to_string(i) + " has non-positive " + what);
    }
  }
}

[[noreturn]] void throw_invalid(const ValidationReport& report) {
  std::ostringstream msg;
  msg << "graph failed validation:";
  for (const auto& v : report.violations) msg << ' ' << v << ';';
  throw Error(ErrorKind::invalid_graph, msg.str());
}

}  // namespace

GraphStats stats(const CombinatorialGraph& g) {
  GraphStats s;
  s.degree_bound = max_degree(g.topology);
  for (double w : g.weights) s.g_zero = std::max(s.g_zero, w);
  return s;
}

GraphStats stats(const MetricGraph& g) {
  GraphStats s;
  s.degree_bound = max_degree(g.topology);
  if (!g.lengths.empty()) {
    const auto [lo, hi] = std::minmax_element(g.lengths.begin(), g.lengths.end());
    s.l_minus = *lo;
    s.l_plus = *hi;
    s.g_zero = 1.0 / *lo;
  }
  return s;
}

ValidationReport validate(const CombinatorialGraph& g) {
  ValidationReport r;
  structural_violations(g.topology, r.violations);
  positive_values(g.weights, "weight", r.violations);
  return r;
}

ValidationReport validate(const MetricGraph& g) {
  ValidationReport r;
  structural_violations(g.topology, r.violations);
  positive_values(g.lengths, "length", r.violations);
  return r;
}

void require_valid(const CombinatorialGraph& g) {
  if (auto r = validate(g); !r.ok()) throw_invalid(r);
}

void require_valid(const MetricGraph& g) {
  if (auto r = validate(g); !r.ok()) throw_invalid(r);
}

CombinatorialGraph associated_combinatorial(const MetricGraph& g) {
  CombinatorialGraph out;
  out.topology = g.topology;
  out.weights.reserve(g.lengths.size());
  for (double l : g.lengths) out.weights.push_back(1.0 / l);
  return out;
}

std::vector<EdgeId> star(const Topology& t, VertexId v) {
  t.check_vertex(v);
  return t.incident(v);
}

std::vector<EdgeId> edge_star(const Topology& t, EdgeId e) {
  t.check_edge(e);
  const auto& [a, b] = t.ends(e);
  std::vector<EdgeId> out = t.incident(a);
  out.insert(out.end(), t.incident(b).begin(), t.incident(b).end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool stars_intersect(const Topology& t, EdgeId e, EdgeId f) {
  const auto& x = t.ends(e);
  const auto& y = t.ends(f);
  if (x.touches(y.a) || x.touches(y.b)) return true;
  return t.adjacent(x.a, y.a) || t.adjacent(x.a, y.b) || t.adjacent(x.b, y.a) || t.adjacent(x.b, y.b);
}

namespace {

// Lexicographic box enumeration shared by the lattice builders. `add_edge` is
// invoked once per nearest-neighbour edge, in insertion order.
template <typename AddEdge>
Topology lattice_topology(int d, int radius, BuildLimits limits, AddEdge&& add_edge) {
  if (d < 1) throw Error(ErrorKind::invalid_argument, "lattice dimension must be >= 1");
  if (radius < 1) throw Error(ErrorKind::invalid_argument, "lattice radius must be >= 1");
  const std::size_t side = 2 * static_cast<std::size_t>(radius) + 1;
  std::size_t count = 1;
  for (int k = 0; k < d; ++k) {
    if (count > limits.max_vertices / side) {
      throw Error(ErrorKind::capacity, "lattice exceeds vertex cap of " + std::to_string(limits.max_vertices));
    }
    count *= side;
  }
  Topology t;
  std::vector<int> coord(static_cast<std::size_t>(d), -radius);
  for (std::size_t id = 0; id < count; ++id) {
    std::string label;
    bool boundary = false;
    for (int k = 0; k < d; ++k) {
      if (k) label += ',';
      label += std::to_string(coord[static_cast<std::size_t>(k)]);
      boundary = boundary || std::abs(coord[static_cast<std::size_t>(k)]) == radius;
    }
    t.add_vertex(std::move(label), boundary);
    for (int k = d - 1; k >= 0; --k) {
      if (++coord[static_cast<std::size_t>(k)] <= radius) break;
      coord[static_cast<std::size_t>(k)] = -radius;
    }
  }
  // Stride of coordinate k in the lexicographic order (last coordinate fastest).
  std::vector<std::size_t> stride(static_cast<std::size_t>(d), 1);
  for (int k = d - 2; k >= 0; --k) stride[static_cast<std::size_t>(k)] = stride[static_cast<std::size_t>(k) + 1] * side;
  for (std::size_t id = 0; id < count; ++id) {
    for (int k = 0; k < d; ++k) {
      const std::size_t s = stride[static_cast<std::size_t>(k)];
      if ((id / s) % side + 1 < side) {
        t.add_edge(vertex_id(id), vertex_id(id + s));
        add_edge();
      }
    }
  }
  return t;
}

}  // namespace

CombinatorialGraph build_lattice(int d, int radius, BuildLimits limits) {
  CombinatorialGraph g;
  g.topology = lattice_topology(d, radius, limits, [&] { g.weights.push_back(1.0); });
  return g;
}

MetricGraph build_metric_lattice(int d, int radius, double length, BuildLimits limits) {
  if (!(length > 0.0)) throw Error(ErrorKind::invalid_argument, "edge length must be positive");
  MetricGraph g;
  g.topology = lattice_topology(d, radius, limits, [&] { g.lengths.push_back(length); });
  return g;
}

CombinatorialGraph build_tree(int branching, int depth, BuildLimits limits) {
  if (branching < 2) throw Error(ErrorKind::invalid_argument, "tree branching must be >= 2");
  if (depth < 1) throw Error(ErrorKind::invalid_argument, "tree depth must be >= 1");
  std::size_t total = 1;
  std::size_t level = 1;
  for (int k = 0; k < depth; ++k) {
    level *= static_cast<std::size_t>(branching);
    total += level;
    if (total > limits.max_vertices) {
      throw Error(ErrorKind::capacity, "tree exceeds vertex cap of " + std::to_string(limits.max_vertices));
    }
  }
  CombinatorialGraph g;
  g.topology.add_vertex("0", false);
  std::size_t first = 0;
  std::size_t width = 1;
  for (int k = 0; k < depth; ++k) {
    const std::size_t next_first = g.topology.vertex_count();
    for (std::size_t p = first; p < first + width; ++p) {
      for (int c = 0; c < branching; ++c) {
        const VertexId child = g.topology.add_vertex(std::to_string(g.topology.vertex_count()), k + 1 == depth);
        g.add_edge(vertex_id(p), child, 1.0);
      }
    }
    first = next_first;
    width *= static_cast<std::size_t>(branching);
  }
  return g;
}

MetricGraph build_metric_path(const std::vector<double>& lengths) {
  if (lengths.empty()) throw Error(ErrorKind::invalid_argument, "path needs at least one edge");
  MetricGraph g;
  VertexId prev = g.topology.add_vertex("0", true);
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const VertexId v = g.topology.add_vertex(std::to_string(i + 1), i + 1 == lengths.size());
    g.add_edge(prev, v, lengths[i]);
    prev = v;
  }
  return g;
}

MetricGraph build_metric_star(const std::vector<double>& lengths) {
  if (lengths.size() < 2) throw Error(ErrorKind::invalid_argument, "star needs at least two edges");
  MetricGraph g;
  const VertexId center = g.topology.add_vertex("c", false);
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const VertexId leaf = g.topology.add_vertex("l" + std::to_string(i), true);
    g.add_edge(center, leaf, lengths[i]);
  }
  return g;
}

namespace {

template <typename Graph>
Graph random_graph(const RandomGraphOptions& o, std::vector<double> Graph::*values) {
  if (o.vertices < 2) throw Error(ErrorKind::invalid_argument, "random graph needs >= 2 vertices");
  if (o.max_degree < 2) throw Error(ErrorKind::invalid_argument, "random graph needs max_degree >= 2");
  if (!(o.min_value > 0.0) || o.max_value < o.min_value) {
    throw Error(ErrorKind::invalid_argument, "random graph value range must be positive and ordered");
  }
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> value(o.min_value, o.max_value);
  Graph g;
  for (std::size_t v = 0; v < o.vertices; ++v) g.topology.add_vertex("v" + std::to_string(v));

  auto add = [&](std::size_t a, std::size_t b) {
    (g.*values).push_back(value(rng));
    g.topology.add_edge(vertex_id(a), vertex_id(b));
  };
  // Random attachment tree: each new vertex joins a uniformly chosen earlier
  // vertex that still has spare degree.
  std::vector<std::size_t> order(o.vertices);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i = 1; i < order.size(); ++i) {
    std::vector<std::size_t> open;
    for (std::size_t j = 0; j < i; ++j) {
      if (g.topology.degree(vertex_id(order[j])) < o.max_degree) open.push_back(order[j]);
    }
    std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
    add(open[pick(rng)], order[i]);
  }
  std::uniform_int_distribution<std::size_t> any(0, o.vertices - 1);
  for (std::size_t k = 0, tries = 0; k < o.extra_edges && tries < 50 * (o.extra_edges + 1); ++tries) {
    const std::size_t a = any(rng);
    const std::size_t b = any(rng);
    if (a == b || g.topology.adjacent(vertex_id(a), vertex_id(b))) continue;
    if (g.topology.degree(vertex_id(a)) >= o.max_degree || g.topology.degree(vertex_id(b)) >= o.max_degree) continue;
    add(std::min(a, b), std::max(a, b));
    ++k;
  }
  for (std::size_t v = 0; v < o.vertices; ++v) {
    if (g.topology.degree(vertex_id(v)) < 2) g.topology.set_boundary(vertex_id(v), true);
  }
  // Keep at least one Dirichlet vertex so the truncated stiffness is definite.
  bool any_boundary = false;
  for (std::size_t v = 0; v < o.vertices; ++v) any_boundary = any_boundary || g.topology.is_boundary(vertex_id(v));
  if (!any_boundary) g.topology.set_boundary(vertex_id(order.back()), true);
  return g;
}

}  // namespace

CombinatorialGraph build_random(const RandomGraphOptions& options) {
  return random_graph<CombinatorialGraph>(options, &CombinatorialGraph::weights);
}

MetricGraph build_random_metric(const RandomGraphOptions& options) {
  return random_graph<MetricGraph>(options, &MetricGraph::lengths);
}

}  // namespace spectral_lab
