#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "spectral_lab/assembly.hpp"
#include "spectral_lab/bounds.hpp"
#include "spectral_lab/checksum.hpp"
#include "spectral_lab/coloring.hpp"
#include "spectral_lab/error.hpp"
#include "spectral_lab/graphs.hpp"
#include "spectral_lab/heat.hpp"
#include "spectral_lab/parallel.hpp"
#include "spectral_lab/potentials.hpp"
#include "spectral_lab/simd/kernels.hpp"
#include "spectral_lab/spectra.hpp"

namespace spectral_lab::cli {

namespace {

using json = nlohmann::ordered_json;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// RFC 4180 field.
std::string field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct Params {
  std::string graph_file;
  std::string potential_file;
  std::string potential_gen = "decay:1:4";
  std::string quadrature;
  std::size_t samples = 5;
  double h = 0.0;
  std::size_t min_intervals = 8;

  int d = 2;
  int radius = 4;
  int branching = 2;
  int depth = 3;
  double length = 1.0;
  std::string lengths = "1,1,1";
  std::size_t vertices = 20;
  std::size_t max_degree = 4;
  std::size_t extra_edges = 10;
  double min_value = 1.0;
  double max_value = 1.0;
  bool metric = false;

  std::string color_target = "vertices";
  std::optional<std::size_t> count;
  std::optional<double> threshold;
  std::string alpha_grid = "1:100:log20";
  double s = 0.1;
  double lambda = 0.01;
  std::size_t edge = 0;
  std::size_t intervals = 400;
  double c = 1.0;
  std::string t_grid;
  std::string window;
  std::string profile_file;
  std::optional<double> dimension;
  std::vector<double> q_extra;
  std::size_t refine = 1;
  bool json_output = false;
  std::vector<std::string> ops;

  std::string out_dir;
  std::size_t jobs = 1;
  std::uint64_t seed = 0x5eed;
};

class Sink {
 public:
  Sink(std::ostream& out, std::string dir) : out_(out), dir_(std::move(dir)) {}

  bool to_files() const { return !dir_.empty(); }

  void emit(const std::string& name, const std::string& body) {
    if (dir_.empty()) {
      out_ << body;
      return;
    }
    std::filesystem::create_directories(dir_);
    const std::filesystem::path path = std::filesystem::path(dir_) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::invalid_argument, "cannot write " + path.string(), path.string());
    f << body;
    if (!f) throw Error(ErrorKind::invalid_argument, "cannot write " + path.string(), path.string());
    files_.push_back({name, body.size(), fnv1a64(body)});
  }

  void finish(const std::string& command, std::uint64_t seed) {
    if (dir_.empty()) return;
    json files = json::array();
    for (const auto& f : files_) {
      char hex[20];
      std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(f.hash));
      files.push_back({{"name", f.name}, {"bytes", f.bytes}, {"fnv1a64", hex}});
    }
    json m = {{"command", command}, {"seed", seed}, {"simd", std::string(simd::active_kernels().name)},
              {"files", files}};
    std::ofstream f(std::filesystem::path(dir_) / "manifest.json", std::ios::binary);
    f << m.dump(2) << "\n";
  }

 private:
  struct File {
    std::string name;
    std::size_t bytes;
    std::uint64_t hash;
  };
  std::ostream& out_;
  std::string dir_;
  std::vector<File> files_;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double x = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorKind::invalid_argument, "cannot parse " + what + " value '" + s + "'", s);
  }
}

std::size_t to_size(const std::string& s, const std::string& what) {
  const double x = to_double(s, what);
  if (x < 0 || x != std::floor(x)) throw Error(ErrorKind::invalid_argument, what + " must be a count", s);
  return static_cast<std::size_t>(x);
}

// a:b:logN, a:b:linN, a,b,c, or a single value. All entries must be > 0.
std::vector<double> parse_grid(const std::string& spec, const std::string& what) {
  std::vector<double> out;
  const auto parts = split(spec, ':');
  if (parts.size() == 3) {
    const double a = to_double(parts[0], what), b = to_double(parts[1], what);
    const std::string& kind = parts[2];
    if (kind.rfind("log", 0) == 0) {
      out = log_grid(a, b, to_size(kind.substr(3), what));
    } else if (kind.rfind("lin", 0) == 0) {
      const std::size_t n = to_size(kind.substr(3), what);
      if (n < 2 || !(b > a)) throw Error(ErrorKind::invalid_argument, what + " linear grid needs a < b and N >= 2");
      for (std::size_t i = 0; i < n; ++i) out.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    } else {
      throw Error(ErrorKind::invalid_argument, what + " grid kind must be logN or linN", spec);
    }
  } else if (parts.size() == 1) {
    for (const auto& x : split(spec, ',')) out.push_back(to_double(x, what));
  } else {
    throw Error(ErrorKind::invalid_argument, "cannot parse " + what + " grid '" + spec + "'", spec);
  }
  if (out.empty()) throw Error(ErrorKind::invalid_argument, what + " grid is empty", spec);
  for (double x : out) {
    if (!(x > 0.0)) throw Error(ErrorKind::invalid_argument, what + " grid entries must be > 0", spec);
  }
  return out;
}

struct Context {
  Params p;
  std::istream& in;
  Sink sink;
  std::optional<AnyGraph> graph;

  const AnyGraph& load() {
    if (graph) return *graph;
    if (!p.graph_file.empty()) {
      graph = load_graph(p.graph_file);
    } else {
      if (in.peek() == std::char_traits<char>::eof()) {
        throw Error(ErrorKind::invalid_argument, "no graph: pass --graph FILE or pipe a graph on stdin");
      }
      graph = read_graph(in);
    }
    std::visit([](const auto& g) { require_valid(g); }, *graph);
    return *graph;
  }
  const CombinatorialGraph* combinatorial() { return std::get_if<CombinatorialGraph>(&load()); }
  const MetricGraph* metric() { return std::get_if<MetricGraph>(&load()); }
  const Topology& topology() {
    return std::visit([](const auto& g) -> const Topology& { return g.topology; }, load());
  }
};

// Multi-source BFS from the boundary; the deepest vertex is the center.
std::vector<std::size_t> distances_from_center(const Topology& t) {
  const std::size_t n = t.vertex_count();
  constexpr std::size_t inf = static_cast<std::size_t>(-1);
  auto bfs = [&](const std::vector<std::size_t>& sources) {
    std::vector<std::size_t> dist(n, inf);
    std::deque<std::size_t> queue;
    for (std::size_t s : sources) {
      dist[s] = 0;
      queue.push_back(s);
    }
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (EdgeId e : t.incident(vertex_id(u))) {
        const std::size_t w = index(t.ends(e).other(vertex_id(u)));
        if (dist[w] == inf) {
          dist[w] = dist[u] + 1;
          queue.push_back(w);
        }
      }
    }
    return dist;
  };
  std::vector<std::size_t> boundary;
  for (std::size_t i = 0; i < n; ++i) {
    if (t.is_boundary(vertex_id(i))) boundary.push_back(i);
  }
  std::size_t center = 0;
  if (!boundary.empty()) {
    const auto depth = bfs(boundary);
    for (std::size_t i = 0; i < n; ++i) {
      if (depth[i] != inf && (depth[center] == inf || depth[i] > depth[center])) center = i;
    }
  }
  return bfs({center});
}

VertexPotential generate_vertex_potential(const std::string& spec, const Topology& t) {
  const auto parts = split(spec, ':');
  const std::size_t n = t.vertex_count();
  VertexPotential v = VertexPotential::zero(n);
  const std::string& kind = parts.empty() ? spec : parts[0];
  auto interior = [&](std::size_t i) { return !t.is_boundary(vertex_id(i)); };
  if (kind == "const" && parts.size() == 2) {
    const double c = to_double(parts[1], "potential");
    for (std::size_t i = 0; i < n; ++i) v.values[i] = interior(i) ? c : 0.0;
  } else if (kind == "point" && parts.size() >= 3) {
    // Labels may contain ':'? Lattice labels use ','; join the middle parts.
    std::string label = parts[1];
    for (std::size_t i = 2; i + 1 < parts.size(); ++i) label += ":" + parts[i];
    v.values[index(t.find(label))] = to_double(parts.back(), "potential");
  } else if (kind == "decay" && parts.size() == 3) {
    const double c = to_double(parts[1], "potential"), power = to_double(parts[2], "potential");
    const auto dist = distances_from_center(t);
    for (std::size_t i = 0; i < n; ++i) {
      v.values[i] = interior(i) ? c / std::pow(1.0 + static_cast<double>(dist[i]), power) : 0.0;
    }
  } else if (kind == "random" && parts.size() == 3) {
    std::mt19937_64 rng(to_size(parts[1], "seed"));
    std::uniform_real_distribution<double> u(0.0, to_double(parts[2], "potential"));
    for (std::size_t i = 0; i < n; ++i) {
      const double x = u(rng);
      v.values[i] = interior(i) ? x : 0.0;
    }
  } else {
    throw Error(ErrorKind::invalid_argument, "unknown potential generator '" + spec + "'", spec);
  }
  check_nonnegative(v);
  return v;
}

EdgePotential generate_edge_potential(const std::string& spec, const MetricGraph& g, std::size_t samples,
                                      Quadrature rule) {
  const auto parts = split(spec, ':');
  const Topology& t = g.topology;
  const std::size_t m = t.edge_count();
  EdgePotential v(m, rule);
  const std::string& kind = parts.empty() ? spec : parts[0];
  if (kind == "const" && parts.size() == 2) {
    const double c = to_double(parts[1], "potential");
    for (std::size_t e = 0; e < m; ++e) v.set_constant(edge_id(e), c);
  } else if (kind == "point" && parts.size() == 3) {
    const std::size_t e = to_size(parts[1], "edge");
    t.check_edge(edge_id(e));
    v.set_constant(edge_id(e), to_double(parts[2], "potential"));
  } else if (kind == "decay" && parts.size() == 3) {
    const double c = to_double(parts[1], "potential"), power = to_double(parts[2], "potential");
    const auto dist = distances_from_center(t);
    for (std::size_t e = 0; e < m; ++e) {
      const EdgeEnds ends = t.ends(edge_id(e));
      const double d = static_cast<double>(std::min(dist[index(ends.a)], dist[index(ends.b)]));
      v.set_constant(edge_id(e), c / std::pow(1.0 + d, power));
    }
  } else if (kind == "random" && parts.size() == 3) {
    if (samples < 2) throw Error(ErrorKind::invalid_argument, "--samples must be >= 2");
    std::mt19937_64 rng(to_size(parts[1], "seed"));
    std::uniform_real_distribution<double> u(0.0, to_double(parts[2], "potential"));
    for (std::size_t e = 0; e < m; ++e) {
      std::vector<double> s(samples);
      for (double& x : s) x = u(rng);
      v.set_samples(edge_id(e), std::move(s));
    }
  } else if (kind == "smooth" && parts.size() == 2) {
    const double c = to_double(parts[1], "potential");
    v = EdgePotential::sample(
        g, [c](EdgeId e, double x) { return c * (1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * x + index(e))); },
        samples, rule);
  } else {
    throw Error(ErrorKind::invalid_argument, "unknown potential generator '" + spec + "'", spec);
  }
  return v;
}

VertexPotential vertex_potential(Context& ctx) {
  const Topology& t = ctx.topology();
  if (!ctx.p.potential_file.empty()) {
    AnyPotential any = load_potential(ctx.p.potential_file, t);
    if (auto* v = std::get_if<VertexPotential>(&any)) return *v;
    throw Error(ErrorKind::invalid_argument, "combinatorial graphs need a vertex potential (vpot lines)",
                ctx.p.potential_file);
  }
  return generate_vertex_potential(ctx.p.potential_gen, t);
}

EdgePotential edge_potential(Context& ctx) {
  const MetricGraph& g = *ctx.metric();
  EdgePotential v;
  if (!ctx.p.potential_file.empty()) {
    AnyPotential any = load_potential(ctx.p.potential_file, g.topology);
    auto* e = std::get_if<EdgePotential>(&any);
    if (!e) {
      throw Error(ErrorKind::invalid_argument, "metric graphs need an edge potential (epot lines)",
                  ctx.p.potential_file);
    }
    v = *e;
    if (!ctx.p.quadrature.empty()) v.set_rule(parse_quadrature(ctx.p.quadrature));
  } else {
    const Quadrature rule = ctx.p.quadrature.empty() ? Quadrature::trapezoid : parse_quadrature(ctx.p.quadrature);
    v = generate_edge_potential(ctx.p.potential_gen, g, ctx.p.samples, rule);
  }
  return v;
}

MeshOptions mesh_options(const Params& p) { return {p.h, p.min_intervals}; }

FormPair make_pair(Context& ctx) {
  if (const auto* g = ctx.combinatorial()) return assemble_combinatorial(*g, vertex_potential(ctx));
  const MetricGraph& g = *ctx.metric();
  const EdgePotential v = edge_potential(ctx);
  return assemble_metric_fem(g, v, default_mesh(g, v, mesh_options(ctx.p)));
}

const MetricGraph& need_metric(Context& ctx, const char* what) {
  if (const auto* g = ctx.metric()) return *g;
  throw Error(ErrorKind::invalid_argument, std::string(what) + " needs a metric graph");
}

const CombinatorialGraph& need_combinatorial(Context& ctx, const char* what) {
  if (const auto* g = ctx.combinatorial()) return *g;
  throw Error(ErrorKind::invalid_argument, std::string(what) + " needs a combinatorial graph");
}

json report_json(const BoundReport& r) {
  json params = json::object();
  for (const auto& [k, v] : r.params) params[k] = v;
  json j = {{"name", r.name}, {"lhs", r.lhs},           {"rhs", r.rhs},     {"margin", r.margin},
            {"pass", r.pass}, {"ambiguous", r.ambiguous}, {"params", params}};
  if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
  return j;
}

std::string graph_text(const AnyGraph& g) {
  std::ostringstream out;
  std::visit([&](const auto& x) { write_graph(out, x); }, g);
  return out.str();
}

// ---- commands ----

void cmd_build(Context& ctx, const std::string& kind) {
  const Params& p = ctx.p;
  AnyGraph g;
  auto lengths = [&] {
    std::vector<double> out;
    for (const auto& x : split(p.lengths, ',')) out.push_back(to_double(x, "length"));
    return out;
  };
  RandomGraphOptions ro{p.vertices, p.max_degree, p.extra_edges, p.min_value, p.max_value, p.seed};
  if (kind == "lattice") g = build_lattice(p.d, p.radius);
  else if (kind == "tree") g = build_tree(p.branching, p.depth);
  else if (kind == "metric-lattice") g = build_metric_lattice(p.d, p.radius, p.length);
  else if (kind == "metric-star") g = build_metric_star(lengths());
  else if (kind == "metric-path") g = build_metric_path(lengths());
  else if (kind == "random") g = p.metric ? AnyGraph(build_random_metric(ro)) : AnyGraph(build_random(ro));
  else throw Error(ErrorKind::invalid_argument, "unknown builder " + kind, kind);
  ctx.sink.emit("graph.txt", graph_text(g));
}

void cmd_color(Context& ctx) {
  const Topology& t = ctx.topology();
  std::ostringstream out;
  if (ctx.p.color_target == "vertices") {
    const VertexColoring c = greedy_vertex_coloring(t);
    out << "id,label,class\n";
    for (std::size_t i = 0; i < t.vertex_count(); ++i) {
      out << i << "," << field(t.label(vertex_id(i))) << "," << c.color[i] << "\n";
    }
  } else if (ctx.p.color_target == "edge-stars") {
    const EdgeStarColoring c = greedy_edge_star_coloring(t);
    out << "id,a,b,class\n";
    for (std::size_t e = 0; e < t.edge_count(); ++e) {
      const EdgeEnds ends = t.ends(edge_id(e));
      out << e << "," << field(t.label(ends.a)) << "," << field(t.label(ends.b)) << "," << c.color[e] << "\n";
    }
  } else {
    throw Error(ErrorKind::invalid_argument, "color target must be vertices or edge-stars", ctx.p.color_target);
  }
  ctx.sink.emit("colors.csv", out.str());
}

void cmd_eta(Context& ctx) {
  const MetricGraph& g = need_metric(ctx, "eta");
  const std::vector<double> values = eta(g, edge_potential(ctx));
  std::ostringstream out;
  out << "edge,a,b,length,eta\n";
  for (std::size_t e = 0; e < values.size(); ++e) {
    const EdgeEnds ends = g.topology.ends(edge_id(e));
    out << e << "," << field(g.topology.label(ends.a)) << "," << field(g.topology.label(ends.b)) << ","
        << num(g.length(edge_id(e))) << "," << num(values[e]) << "\n";
  }
  ctx.sink.emit("eta.csv", out.str());
}

void cmd_kappa(Context& ctx) {
  const MetricGraph& g = need_metric(ctx, "kappa");
  const VertexPotential k = kappa(g, edge_potential(ctx));
  std::ostringstream out;
  out << "id,label,kappa\n";
  for (std::size_t i = 0; i < k.values.size(); ++i) {
    out << i << "," << field(g.topology.label(vertex_id(i))) << "," << num(k.values[i]) << "\n";
  }
  ctx.sink.emit("kappa.csv", out.str());
}

void cmd_assemble(Context& ctx) {
  if (!ctx.sink.to_files()) throw Error(ErrorKind::invalid_argument, "assemble writes several files; pass --out DIR");
  const FormPair pair = make_pair(ctx);
  auto coo = [](const SparseMatrix& s) {
    std::ostringstream o;
    write_coordinate(o, s);
    return o.str();
  };
  ctx.sink.emit("A.coo", coo(pair.A));
  ctx.sink.emit("B.coo", coo(pair.B));
  if (pair.M) ctx.sink.emit("M.coo", coo(*pair.M));
  const Topology& t = ctx.topology();
  json dofs = json::array();
  for (const Dof& d : pair.dofs.dofs) {
    if (d.kind == DofKind::vertex) {
      dofs.push_back({{"kind", "vertex"}, {"vertex", index(d.vertex)}, {"label", t.label(d.vertex)}});
    } else {
      dofs.push_back({{"kind", "interior"}, {"edge", index(d.edge)}, {"node", d.node}});
    }
  }
  json j = {{"form", to_string(pair.kind)},
            {"size", pair.size()},
            {"quadrature", to_string(pair.rule)},
            {"mesh", {{"intervals", pair.mesh.intervals}, {"h_max", pair.mesh.h_max}}},
            {"dofs", dofs}};
  ctx.sink.emit("dofmap.json", j.dump(2) + "\n");
}

json provenance_json(const SpectralReport& r) {
  const SpectralProvenance& p = r.provenance;
  return {{"form", to_string(p.kind)}, {"dofs", p.dofs},   {"method", p.method}, {"steps", p.steps},
          {"rounds", p.rounds},        {"seed", p.seed},   {"mesh", p.mesh},     {"quadrature", to_string(p.rule)},
          {"rtol", r.rtol},            {"rtol_count", r.rtol_count}, {"complete_above", r.complete_above}};
}

void cmd_eigs(Context& ctx) {
  const FormPair pair = make_pair(ctx);
  EigenRequest req;
  req.seed = ctx.p.seed;
  req.count = ctx.p.count;
  req.threshold = ctx.p.threshold;
  if (!req.count && !req.threshold) req.count = 20;
  const SpectralReport r = pencil_eigenvalues(pair, req);
  if (ctx.p.json_output) {
    json j = {{"eigenvalues", r.eigenvalues}, {"provenance", provenance_json(r)}};
    ctx.sink.emit("eigs.json", j.dump(2) + "\n");
    return;
  }
  std::ostringstream out;
  out << "n,s_n\n";
  for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) out << i + 1 << "," << num(r.eigenvalues[i]) << "\n";
  ctx.sink.emit("eigs.csv", out.str());
}

void cmd_ninertia(Context& ctx) {
  const FormPair pair = make_pair(ctx);
  const auto alphas = parse_grid(ctx.p.alpha_grid, "alpha");
  const auto rows = parallel_map(alphas.size(), ctx.p.jobs, [&](std::size_t i) { return negative_count(pair, alphas[i]); });
  std::ostringstream out;
  out << "alpha,n_minus,threshold\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << num(alphas[i]) << "," << rows[i].value << "," << (rows[i].threshold ? 1 : 0) << "\n";
  }
  ctx.sink.emit("ninertia.csv", out.str());
}

void cmd_bs_check(Context& ctx) {
  const FormPair pair = make_pair(ctx);
  const auto alphas = parse_grid(ctx.p.alpha_grid, "alpha");
  EigenRequest req;
  req.seed = ctx.p.seed;
  const auto rows =
      parallel_map(alphas.size(), ctx.p.jobs, [&](std::size_t i) { return birman_schwinger_check(pair, alphas[i], req); });
  std::ostringstream out;
  out << "alpha,lhs,rhs,equal,ambiguous\n";
  for (const auto& r : rows) {
    out << num(r.alpha) << "," << r.lhs << "," << r.rhs << "," << (r.equal() ? 1 : 0) << "," << (r.ambiguous ? 1 : 0)
        << "\n";
  }
  ctx.sink.emit("bs-check.csv", out.str());
}

std::vector<double> default_t_grid(const FormPair& pair, Context& ctx) {
  auto decade_grid = [](double a, double b) {
    return log_grid(a, b, static_cast<std::size_t>(std::ceil(20.0 * std::log10(b / a))) + 1);
  };
  if (pair.kind == FormKind::combinatorial) return decade_grid(0.05, 500.0);
  const GraphStats st = stats(*ctx.metric());
  return decade_grid(16.0 * pair.mesh.h_max * pair.mesh.h_max, 4.0 * st.l_plus * st.l_plus);
}

HeatProfile compute_profile(Context& ctx) {
  const FormPair pair = make_pair(ctx);
  const HeatDecomposition d = heat_decomposition(pair);
  const std::vector<double> t = ctx.p.t_grid.empty() ? default_t_grid(pair, ctx) : parse_grid(ctx.p.t_grid, "t");
  return heat_profile(d, t, ctx.p.jobs);
}

std::string profile_csv(const HeatProfile& p) {
  std::ostringstream out;
  out << "t,M\n";
  for (std::size_t i = 0; i < p.t.size(); ++i) out << num(p.t[i]) << "," << num(p.m[i]) << "\n";
  return out.str();
}

void cmd_heat(Context& ctx) { ctx.sink.emit("heat.csv", profile_csv(compute_profile(ctx))); }

HeatProfile read_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::not_found, "cannot open profile " + path, path);
  HeatProfile p;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || line[0] == 't') continue;
    const auto cells = split(line, ',');
    if (cells.size() < 2) {
      throw Error(ErrorKind::invalid_argument, "profile line " + std::to_string(lineno) + ": expected t,M", path);
    }
    p.t.push_back(to_double(cells[0], "t"));
    p.m.push_back(to_double(cells[1], "M"));
  }
  p.saturation_time = saturation_time(p.t, p.m, 0.0);
  return p;
}

json fit_json(const std::string& name, const DimensionFit& f) {
  return {{"name", name},   {"t_lo", f.t_lo},           {"t_hi", f.t_hi},          {"points", f.points},
          {"slope", f.slope}, {"dimension", f.dimension}, {"residual", f.residual}};
}

void cmd_dimfit(Context& ctx) {
  const HeatProfile p = ctx.p.profile_file.empty() ? compute_profile(ctx) : read_profile(ctx.p.profile_file);
  json fits = json::array();
  if (!ctx.p.window.empty()) {
    const auto w = split(ctx.p.window, ':');
    if (w.size() != 2) throw Error(ErrorKind::invalid_argument, "--window expects a:b", ctx.p.window);
    fits.push_back(fit_json("window", dimension_fit(p.t, p.m, to_double(w[0], "window"), to_double(w[1], "window"))));
  } else {
    const FitWindow lw = default_local_window(p), iw = default_infinity_window(p);
    fits.push_back(fit_json("local", dimension_fit(p.t, p.m, lw.lo, lw.hi)));
    fits.push_back(fit_json("infinity", dimension_fit(p.t, p.m, iw.lo, iw.hi)));
  }
  json j = {{"fits", fits}, {"dofs", p.dofs}, {"lambda_min", p.lambda_min}};
  j["saturation_time"] = p.saturation_time ? json(*p.saturation_time) : json(nullptr);
  ctx.sink.emit("dimfit.json", j.dump(2) + "\n");
}

void cmd_bound(Context& ctx, const std::string& name) {
  BoundReport r;
  if (name == "lower-combinatorial") {
    const CombinatorialGraph& g = need_combinatorial(ctx, name.c_str());
    r = lower_bound_combinatorial(g, vertex_potential(ctx), ctx.p.s);
  } else {
    const MetricGraph& g = need_metric(ctx, name.c_str());
    const EdgePotential v = edge_potential(ctx);
    const auto mesh = default_mesh(g, v, mesh_options(ctx.p));
    if (name == "per-edge") {
      g.topology.check_edge(edge_id(ctx.p.edge));
      r = per_edge_dirichlet_bound(g, v, edge_id(ctx.p.edge), ctx.p.lambda, ctx.p.intervals, ctx.p.c);
    } else if (name == "bracketing") {
      r = bracketing_check(g, v, mesh, ctx.p.s);
    } else if (name == "domination") {
      r = domination_check(g, v, mesh);
    } else if (name == "lower-metric") {
      r = metric_lower_bound(g, v, ctx.p.s, mesh);
    } else {
      throw Error(ErrorKind::invalid_argument, "unknown bound " + name, name);
    }
  }
  ctx.sink.emit("bound-" + name + ".json", report_json(r).dump(2) + "\n");
}

void cmd_weyl(Context& ctx) {
  const MetricGraph& g = need_metric(ctx, "weyl");
  const EdgePotential v = edge_potential(ctx);
  const auto alphas = parse_grid(ctx.p.alpha_grid, "alpha");
  const auto rows = weyl_ratio(g, v, alphas, mesh_options(ctx.p), ctx.p.refine, ctx.p.jobs);
  std::ostringstream out;
  out << "alpha,level,h_max,dofs,n_minus,threshold,weyl,eta_ratio\n";
  for (const auto& r : rows) {
    out << num(r.alpha) << "," << r.level << "," << num(r.h_max) << "," << r.dofs << "," << r.n_minus << ","
        << (r.threshold ? 1 : 0) << "," << num(r.weyl) << "," << num(r.eta_ratio) << "\n";
  }
  ctx.sink.emit("weyl.csv", out.str());
}

void cmd_rlc(Context& ctx) {
  const CombinatorialGraph& g = need_combinatorial(ctx, "rlc");
  const VertexPotential v = vertex_potential(ctx);
  const FormPair pair = assemble_combinatorial(g, v);
  double dim = 0.0;
  if (ctx.p.dimension) {
    dim = *ctx.p.dimension;
  } else {
    const HeatDecomposition d = heat_decomposition(pair);
    const HeatProfile p = heat_profile(d, default_t_grid(pair, ctx), ctx.p.jobs);
    const FitWindow w = default_infinity_window(p);
    dim = dimension_fit(p.t, p.m, w.lo, w.hi).dimension;
  }
  std::vector<double> qs = {dim / 2.0};
  qs.insert(qs.end(), ctx.p.q_extra.begin(), ctx.p.q_extra.end());
  const auto alphas = parse_grid(ctx.p.alpha_grid, "alpha");
  std::ostringstream out;
  out << "q,alpha,n_minus,ratio,weak_ratio,threshold\n";
  for (double q : qs) {
    for (const auto& r : rlc_ratio(pair, v.values, q, alphas, ctx.p.jobs)) {
      out << num(q) << "," << num(r.alpha) << "," << r.n_minus << "," << num(r.ratio) << "," << num(r.weak_ratio)
          << "," << (r.threshold ? 1 : 0) << "\n";
    }
  }
  ctx.sink.emit("rlc.csv", out.str());
}

void run_op(Context& ctx, const std::string& op) {
  if (op == "color") cmd_color(ctx);
  else if (op == "eta") cmd_eta(ctx);
  else if (op == "kappa") cmd_kappa(ctx);
  else if (op == "assemble") cmd_assemble(ctx);
  else if (op == "eigs") cmd_eigs(ctx);
  else if (op == "ninertia" || op == "bs") cmd_ninertia(ctx);
  else if (op == "bs-check") cmd_bs_check(ctx);
  else if (op == "heat") cmd_heat(ctx);
  else if (op == "dimfit") cmd_dimfit(ctx);
  else if (op.rfind("bound:", 0) == 0) cmd_bound(ctx, op.substr(6));
  else if (op == "weyl") cmd_weyl(ctx);
  else if (op == "rlc") cmd_rlc(ctx);
  else throw Error(ErrorKind::invalid_argument, "unknown operation " + op, op);
}

// ---- option wiring ----

void add_graph_input(CLI::App* c, Params& p) {
  c->add_option("--graph", p.graph_file, "Graph file (default: read stdin)");
}

void add_potential_input(CLI::App* c, Params& p) {
  add_graph_input(c, p);
  c->add_option("--potential", p.potential_file, "Potential file (vpot/epot records)");
  c->add_option("--potential-gen", p.potential_gen,
                "Generated potential: const:c | point:label:c (metric: point:edge:c) | decay:c:p "
                "(c/(1+dist)^p, dist in edges from the center) | random:seed:max | smooth:c (metric)")
      ->capture_default_str();
  c->add_option("--quadrature", p.quadrature, "trapezoid | simpson (metric potentials)");
  c->add_option("--samples", p.samples, "Samples per edge for generated metric potentials")->capture_default_str();
  c->add_option("--h-target", p.h, "Target mesh width, length units (default l_minus/64)");
  c->add_option("--min-intervals", p.min_intervals, "Minimum mesh intervals per edge")->capture_default_str();
}

void add_build_options(CLI::App* c, Params& p, const std::string& kind) {
  if (kind == "lattice" || kind == "metric-lattice") {
    c->add_option("--d", p.d, "Lattice dimension")->capture_default_str();
    c->add_option("--radius", p.radius, "Box radius in lattice steps")->capture_default_str();
  }
  if (kind == "metric-lattice") c->add_option("--length", p.length, "Edge length")->capture_default_str();
  if (kind == "tree") {
    c->add_option("--branching", p.branching, "Children per vertex")->capture_default_str();
    c->add_option("--depth", p.depth, "Levels below the root")->capture_default_str();
  }
  if (kind == "metric-star" || kind == "metric-path") {
    c->add_option("--lengths", p.lengths, "Comma-separated edge lengths")->capture_default_str();
  }
  if (kind == "random") {
    c->add_option("--vertices", p.vertices, "Vertex count")->capture_default_str();
    c->add_option("--max-degree", p.max_degree, "Degree cap")->capture_default_str();
    c->add_option("--extra-edges", p.extra_edges, "Edges added beyond the spanning tree")->capture_default_str();
    c->add_option("--min", p.min_value, "Smallest weight (or length with --metric)")->capture_default_str();
    c->add_option("--max", p.max_value, "Largest weight (or length with --metric)")->capture_default_str();
    c->add_flag("--metric", p.metric, "Build a metric graph");
  }
}

void add_alpha_grid(CLI::App* c, Params& p) {
  c->add_option("--alpha-grid", p.alpha_grid, "Coupling grid a:b:logN | a:b:linN | a,b,... (dimensionless)")
      ->capture_default_str();
}

void add_bound_options(CLI::App* c, Params& p, const std::string& name) {
  add_potential_input(c, p);
  if (name == "per-edge") {
    c->add_option("--edge", p.edge, "Edge index")->capture_default_str();
    c->add_option("--lambda", p.lambda, "Spectral parameter lambda > 0")->capture_default_str();
    c->add_option("--intervals", p.intervals, "Mesh intervals on the edge")->capture_default_str();
    c->add_option("--c", p.c, "Constant C of the bound")->capture_default_str();
  } else if (name != "domination") {
    c->add_option("--s", p.s, "Spectral parameter s > 0")->capture_default_str();
  }
}

void add_heat_options(CLI::App* c, Params& p) {
  c->add_option("--t-grid", p.t_grid, "Time grid a:b:logN | a,b,... (time units length^2)");
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_argument:
    case ErrorKind::not_found:
    case ErrorKind::invalid_graph:
      return 2;
    case ErrorKind::numerical:
    case ErrorKind::capacity:
      return 3;
  }
  return 1;
}

void print_error(std::ostream& err, const std::string& kind, const std::string& message, const std::string& subject) {
  json j = {{"error", {{"kind", kind}, {"message", message}}}};
  if (!subject.empty()) j["error"]["subject"] = subject;
  err << j.dump() << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  Params p;
  CLI::App app{"Schrodinger operators -Delta - alpha V on combinatorial and metric graphs", "spectral-lab"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML experiment config; flags override it");
  app.add_option("--out", p.out_dir, "Write outputs and manifest.json into this directory");
  app.add_option("--jobs", p.jobs, "Worker threads for grid sweeps")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--seed", p.seed, "Seed for iterative solvers and random builders")->capture_default_str();

  std::string selected;
  std::string detail;
  auto on = [&](CLI::App* c, std::string name, std::string d = {}) {
    c->callback([&selected, &detail, name = std::move(name), d = std::move(d)] {
      selected = name;
      detail = d;
    });
  };

  CLI::App* build = app.add_subcommand("build", "Build a graph and print it in the graph file format");
  build->require_subcommand(1);
  for (const std::string kind : {"lattice", "tree", "metric-lattice", "metric-star", "metric-path", "random"}) {
    CLI::App* c = build->add_subcommand(kind, "Build a " + kind + " graph");
    add_build_options(c, p, kind);
    on(c, "build", kind);
  }
  CLI::App* lattice = app.add_subcommand("lattice", "Same as build lattice");
  add_build_options(lattice, p, "lattice");
  on(lattice, "build", "lattice");

  CLI::App* color = app.add_subcommand("color", "Greedy colorings as CSV (id, class)");
  color->add_option("target", p.color_target, "vertices | edge-stars")->required();
  add_graph_input(color, p);
  on(color, "color");

  for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
           {"eta", "Per-edge eta_V(e) = l_e int_e V"}, {"kappa", "Vertex aggregates kappa_V(v) = int_{S(v)} V"}}) {
    CLI::App* c = app.add_subcommand(name, help);
    add_potential_input(c, p);
    on(c, name);
  }

  CLI::App* assemble = app.add_subcommand("assemble", "Write A.coo, B.coo, M.coo and dofmap.json (needs --out)");
  add_potential_input(assemble, p);
  on(assemble, "assemble");

  CLI::App* eigs = app.add_subcommand("eigs", "Largest eigenvalues of B u = s A u");
  add_potential_input(eigs, p);
  eigs->add_option("--count", p.count, "Number of eigenvalues (default 20)");
  eigs->add_option("--threshold", p.threshold, "All eigenvalues above this value");
  eigs->add_flag("--json", p.json_output, "JSON report with provenance instead of CSV");
  on(eigs, "eigs");

  CLI::App* ninertia = app.add_subcommand("ninertia", "N_-(A - alpha V) by matrix inertia; CSV (alpha, N_-)");
  ninertia->alias("bs");
  add_potential_input(ninertia, p);
  add_alpha_grid(ninertia, p);
  on(ninertia, "ninertia");

  CLI::App* bs_check = app.add_subcommand("bs-check", "Compare N_-(A - alpha V) with n(1/alpha) of the pencil");
  add_potential_input(bs_check, p);
  add_alpha_grid(bs_check, p);
  on(bs_check, "bs-check");

  CLI::App* heat = app.add_subcommand("heat", "Heat kernel supremum M(t); CSV (t, M)");
  add_potential_input(heat, p);
  add_heat_options(heat, p);
  on(heat, "heat");

  CLI::App* dimfit = app.add_subcommand("dimfit", "Fit -2 d log M / d log t over a time window");
  add_potential_input(dimfit, p);
  add_heat_options(dimfit, p);
  dimfit->add_option("--window", p.window, "Fit window a:b in time units (default: local and infinity windows)");
  dimfit->add_option("--profile", p.profile_file, "Use a CSV (t, M) profile instead of a graph");
  on(dimfit, "dimfit");

  CLI::App* bound = app.add_subcommand("bound", "Evaluate a spectral estimate; JSON report with pass flag");
  bound->require_subcommand(1);
  for (const std::string name : {"lower-combinatorial", "per-edge", "bracketing", "domination", "lower-metric"}) {
    CLI::App* c = bound->add_subcommand(name, "Bound " + name);
    add_bound_options(c, p, name);
    on(c, "bound", name);
  }

  CLI::App* weyl = app.add_subcommand("weyl", "W(alpha) = pi N_- / (alpha^{1/2} int sqrt V) per refinement level");
  add_potential_input(weyl, p);
  add_alpha_grid(weyl, p);
  weyl->add_option("--refine", p.refine, "Mesh levels, each halving h")->capture_default_str();
  on(weyl, "weyl");

  CLI::App* rlc = app.add_subcommand("rlc", "R(alpha) = N_- / (alpha^q ||V||_q^q) for q = D/2 and extra q");
  add_potential_input(rlc, p);
  add_alpha_grid(rlc, p);
  rlc->add_option("--dimension", p.dimension, "Dimension D (default: heat-kernel fit)");
  rlc->add_option("--q", p.q_extra, "Additional exponents q > 0");
  on(rlc, "rlc");

  CLI::App* report = app.add_subcommand("report", "Run a list of operations (usually from --config) into --out");
  add_potential_input(report, p);
  add_alpha_grid(report, p);
  add_heat_options(report, p);
  report->add_option("--ops", p.ops, "Operations: color eta kappa assemble eigs ninertia bs-check heat dimfit "
                                     "bound:<name> weyl rlc")
      ->required();
  report->add_option("--s", p.s, "Spectral parameter for bounds")->capture_default_str();
  report->add_option("--count", p.count, "Eigenvalue count");
  report->add_option("--refine", p.refine, "Weyl mesh levels")->capture_default_str();
  report->add_option("--dimension", p.dimension, "Dimension D for rlc");
  on(report, "report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream cli_out, cli_err;
    if (app.exit(e, cli_out, cli_err) == 0) {  // --help
      out << cli_out.str();
      return 0;
    }
    if (dynamic_cast<const CLI::FileError*>(&e)) {
      const CLI::Option* config = app.get_config_ptr();
      const std::string path = config && config->count() ? config->as<std::string>() : std::string();
      print_error(err, "not_found", e.what(), path);
    } else {
      print_error(err, "invalid_argument", e.what(), {});
    }
    return 2;
  }

  Context ctx{p, in, Sink(out, p.out_dir), std::nullopt};
  try {
    if (selected == "build") cmd_build(ctx, detail);
    else if (selected == "bound") cmd_bound(ctx, detail);
    else if (selected == "report") {
      if (!ctx.sink.to_files()) throw Error(ErrorKind::invalid_argument, "report needs --out DIR");
      for (const auto& op : p.ops) run_op(ctx, op);
    } else {
      run_op(ctx, selected);
    }
    ctx.sink.finish(selected + (detail.empty() ? "" : " " + detail), p.seed);
  } catch (const Error& e) {
    print_error(err, to_string(e.kind()), e.what(), e.subject());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    print_error(err, "internal", e.what(), {});
    return 1;
  }
  return 0;
}

}  // namespace spectral_lab::cli
