#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "spectral_lab/error.hpp"
#include "spectral_lab/graphs.hpp"

namespace spectral_lab {
namespace {

std::string format_value(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

[[noreturn]] void parse_error(std::size_t line_no, const std::string& what) {
  throw Error(ErrorKind::invalid_argument, "graph file line " + std::to_string(line_no) + ": " + what);
}

double parse_positive(const std::string& token, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double x = std::stod(token, &used);
    if (used != token.size()) parse_error(line_no, "bad number '" + token + "'");
    return x;
  } catch (const std::logic_error&) {
    parse_error(line_no, "bad number '" + token + "'");
  }
}

template <typename Graph>
void write_common(std::ostream& out, const Graph& g, const char* kind, const std::vector<double>& values) {
  out << "graph " << kind << '\n';
  const Topology& t = g.topology;
  for (std::size_t v = 0; v < t.vertex_count(); ++v) {
    out << "v " << t.label(vertex_id(v));
    if (t.is_boundary(vertex_id(v))) out << " boundary";
    out << '\n';
  }
  for (std::size_t e = 0; e < t.edge_count(); ++e) {
    const auto& [a, b] = t.ends(edge_id(e));
    out << "e " << t.label(a) << ' ' << t.label(b) << ' ' << format_value(values[e]) << '\n';
  }
}

}  // namespace

AnyGraph read_graph(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool metric = false;
  bool have_header = false;
  Topology topology;
  std::vector<double> values;
  std::unordered_map<std::string, VertexId> ids;

  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string tag;
    if (!(fields >> tag)) continue;
    if (!have_header) {
      std::string kind;
      if (tag != "graph" || !(fields >> kind)) parse_error(line_no, "expected 'graph combinatorial|metric'");
      if (kind == "metric") {
        metric = true;
      } else if (kind != "combinatorial") {
        parse_error(line_no, "unknown graph kind '" + kind + "'");
      }
      have_header = true;
      continue;
    }
    if (tag == "v") {
      std::string label, flag;
      if (!(fields >> label)) parse_error(line_no, "vertex line needs a label");
      bool boundary = false;
      if (fields >> flag) {
        if (flag != "boundary") parse_error(line_no, "unknown vertex flag '" + flag + "'");
        boundary = true;
      }
      if (ids.count(label)) parse_error(line_no, "duplicate vertex '" + label + "'");
      ids.emplace(label, topology.add_vertex(label, boundary));
    } else if (tag == "e") {
      std::string a, b, value;
      if (!(fields >> a >> b >> value)) parse_error(line_no, "edge line needs two labels and a value");
      const auto ia = ids.find(a);
      const auto ib = ids.find(b);
      if (ia == ids.end()) parse_error(line_no, "edge references unknown vertex '" + a + "'");
      if (ib == ids.end()) parse_error(line_no, "edge references unknown vertex '" + b + "'");
      topology.add_edge(ia->second, ib->second);
      values.push_back(parse_positive(value, line_no));
    } else {
      parse_error(line_no, "unknown record '" + tag + "'");
    }
  }
  if (!have_header) throw Error(ErrorKind::invalid_argument, "graph file has no header");
  if (metric) return MetricGraph{std::move(topology), std::move(values)};
  return CombinatorialGraph{std::move(topology), std::move(values)};
}

AnyGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::not_found, "cannot open graph file '" + path + "'", path);
  return read_graph(in);
}

void write_graph(std::ostream& out, const CombinatorialGraph& g) {
  write_common(out, g, "combinatorial", g.weights);
}

void write_graph(std::ostream& out, const MetricGraph& g) {
  write_common(out, g, "metric", g.lengths);
}

}  // namespace spectral_lab
