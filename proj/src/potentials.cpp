#include "spectral_lab/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string_view>

#include "spectral_lab/error.hpp"

namespace spectral_lab {

const char* to_string(Quadrature rule) {
  return rule == Quadrature::simpson ? "simpson" : "trapezoid";
}

Quadrature parse_quadrature(const std::string& name) {
  if (name == "trapezoid") return Quadrature::trapezoid;
  if (name == "simpson") return Quadrature::simpson;
  throw Error(ErrorKind::invalid_argument, "unknown quadrature rule '" + name + "'");
}

namespace {

void check_value(double x, const char* where) {
  if (!std::isfinite(x) || x < 0.0) {
    throw Error(ErrorKind::invalid_argument, std::string("potential must be finite and >= 0 (") + where + ")");
  }
}

}  // namespace

void check_nonnegative(const VertexPotential& v) {
  for (double x : v.values) check_value(x, "vertex potential");
}

EdgePotential::EdgePotential(std::size_t edges, Quadrature rule)
    : profiles_(edges, ConstantProfile{0.0}), rule_(rule) {}

EdgePotential EdgePotential::sample(const MetricGraph& g, const std::function<double(EdgeId, double)>& fn,
                                    std::size_t samples, Quadrature rule) {
  EdgePotential out(g.topology.edge_count(), rule);
  for (std::size_t e = 0; e < g.topology.edge_count(); ++e) {
    std::vector<double> s(samples);
    for (std::size_t i = 0; i < samples; ++i) {
      s[i] = fn(edge_id(e), static_cast<double>(i) / static_cast<double>(samples - 1));
    }
    out.set_samples(edge_id(e), std::move(s));
  }
  return out;
}

void EdgePotential::set_constant(EdgeId e, double value) {
  check_value(value, "edge constant");
  profiles_.at(index(e)) = ConstantProfile{value};
}

void EdgePotential::set_samples(EdgeId e, std::vector<double> samples) {
  if (samples.size() < 2) throw Error(ErrorKind::invalid_argument, "edge potential needs >= 2 samples");
  for (double x : samples) check_value(x, "edge samples");
  profiles_.at(index(e)) = SampledProfile{std::move(samples)};
}

std::size_t EdgePotential::sample_count(EdgeId e) const {
  if (const auto* s = std::get_if<SampledProfile>(&profile(e))) return s->samples.size();
  return 0;
}

double EdgePotential::value(EdgeId e, double position) const {
  const EdgeProfile& p = profile(e);
  if (const auto* c = std::get_if<ConstantProfile>(&p)) return c->value;
  const auto& s = std::get<SampledProfile>(p).samples;
  const double x = std::clamp(position, 0.0, 1.0) * static_cast<double>(s.size() - 1);
  const std::size_t i = std::min(static_cast<std::size_t>(x), s.size() - 2);
  const double frac = x - static_cast<double>(i);
  return s[i] + frac * (s[i + 1] - s[i]);
}

bool EdgePotential::vanishes_on(EdgeId e) const {
  const EdgeProfile& p = profile(e);
  if (const auto* c = std::get_if<ConstantProfile>(&p)) return c->value == 0.0;
  const auto& s = std::get<SampledProfile>(p).samples;
  return std::all_of(s.begin(), s.end(), [](double x) { return x == 0.0; });
}

double integrate_samples(const std::vector<double>& samples, double length, Quadrature rule) {
  const std::size_t n = samples.size();
  if (n < 2) throw Error(ErrorKind::invalid_argument, "quadrature needs >= 2 samples");
  const double h = length / static_cast<double>(n - 1);
  if (rule == Quadrature::trapezoid) {
    double sum = 0.5 * (samples.front() + samples.back());
    for (std::size_t i = 1; i + 1 < n; ++i) sum += samples[i];
    return h * sum;
  }
  if (n < 3 || n % 2 == 0) {
    throw Error(ErrorKind::invalid_argument,
                "simpson quadrature needs an odd sample count >= 3, got " + std::to_string(n));
  }
  double sum = samples.front() + samples.back();
  for (std::size_t i = 1; i + 1 < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * samples[i];
  return h * sum / 3.0;
}

double EdgePotential::integral(EdgeId e, double length) const {
  const EdgeProfile& p = profile(e);
  if (const auto* c = std::get_if<ConstantProfile>(&p)) return c->value * length;
  return integrate_samples(std::get<SampledProfile>(p).samples, length, rule_);
}

double EdgePotential::sqrt_integral(EdgeId e, double length) const {
  const EdgeProfile& p = profile(e);
  if (const auto* c = std::get_if<ConstantProfile>(&p)) return std::sqrt(c->value) * length;
  std::vector<double> roots = std::get<SampledProfile>(p).samples;
  for (double& x : roots) x = std::sqrt(x);
  return integrate_samples(roots, length, rule_);
}

EdgePotential EdgePotential::scaled(double c) const {
  check_value(c, "scale factor");
  EdgePotential out = *this;
  for (auto& p : out.profiles_) {
    if (auto* k = std::get_if<ConstantProfile>(&p)) {
      k->value *= c;
    } else {
      for (double& x : std::get<SampledProfile>(p).samples) x *= c;
    }
  }
  return out;
}

namespace {

void require_matching(const MetricGraph& g, const EdgePotential& v) {
  if (v.edge_count() != g.topology.edge_count()) {
    throw Error(ErrorKind::invalid_argument, "edge potential covers " + std::to_string(v.edge_count()) +
                                                 " edges, graph has " + std::to_string(g.topology.edge_count()));
  }
}

}  // namespace

std::vector<double> eta(const MetricGraph& g, const EdgePotential& v) {
  require_matching(g, v);
  std::vector<double> out(g.topology.edge_count());
  for (std::size_t e = 0; e < out.size(); ++e) {
    const double l = g.length(edge_id(e));
    out[e] = l * v.integral(edge_id(e), l);
  }
  return out;
}

VertexPotential kappa(const MetricGraph& g, const EdgePotential& v) {
  require_matching(g, v);
  VertexPotential out = VertexPotential::zero(g.topology.vertex_count());
  for (std::size_t e = 0; e < g.topology.edge_count(); ++e) {
    const double mass = v.integral(edge_id(e), g.length(edge_id(e)));
    const auto& [a, b] = g.topology.ends(edge_id(e));
    out.values[index(a)] += mass;
    out.values[index(b)] += mass;
  }
  return out;
}

double sqrt_integral(const MetricGraph& g, const EdgePotential& v) {
  require_matching(g, v);
  double sum = 0.0;
  for (std::size_t e = 0; e < g.topology.edge_count(); ++e) sum += v.sqrt_integral(edge_id(e), g.length(edge_id(e)));
  return sum;
}

std::size_t distribution(const std::vector<double>& values, double tau) {
  return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [tau](double x) { return x > tau; }));
}

SequenceSummary::SequenceSummary(std::vector<double> values) : sorted_(std::move(values)) {
  for (double x : sorted_) check_value(x, "sequence entry");
  std::sort(sorted_.begin(), sorted_.end(), std::greater<>());
}

std::size_t SequenceSummary::distribution(double tau) const {
  // sorted_ is nonincreasing: count the prefix strictly above tau.
  const auto it = std::partition_point(sorted_.begin(), sorted_.end(), [tau](double x) { return x > tau; });
  return static_cast<std::size_t>(it - sorted_.begin());
}

double SequenceSummary::lq_norm(double q) const {
  if (!(q > 0.0)) throw Error(ErrorKind::invalid_argument, "quasi-norm exponent q must be > 0");
  double sum = 0.0;
  for (double x : sorted_) sum += std::pow(x, q);
  return std::pow(sum, 1.0 / q);
}

double SequenceSummary::weak_norm(double q) const {
  if (!(q > 0.0)) throw Error(ErrorKind::invalid_argument, "quasi-norm exponent q must be > 0");
  double sup = 0.0;
  for (std::size_t n = 0; n < sorted_.size(); ++n) {
    sup = std::max(sup, std::pow(static_cast<double>(n + 1), 1.0 / q) * sorted_[n]);
  }
  return sup;
}

QuasiNorms quasi_norms(const std::vector<double>& values, double q) {
  const SequenceSummary s(values);
  return {s.lq_norm(q), s.weak_norm(q)};
}

namespace {

[[noreturn]] void potential_error(std::size_t line_no, const std::string& what) {
  throw Error(ErrorKind::invalid_argument, "potential file line " + std::to_string(line_no) + ": " + what);
}

double read_number(std::istringstream& in, std::size_t line_no) {
  std::string token;
  if (!(in >> token)) potential_error(line_no, "missing number");
  try {
    std::size_t used = 0;
    const double x = std::stod(token, &used);
    if (used != token.size()) potential_error(line_no, "bad number '" + token + "'");
    return x;
  } catch (const std::logic_error&) {
    potential_error(line_no, "bad number '" + token + "'");
  }
}

std::string format_value(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

AnyPotential read_potential(std::istream& in, const Topology& t) {
  VertexPotential vertex = VertexPotential::zero(t.vertex_count());
  EdgePotential edge(t.edge_count());
  bool saw_vertex = false;
  bool saw_edge = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string tag;
    if (!(fields >> tag)) continue;
    try {
      if (tag == "vpot") {
        std::string label;
        if (!(fields >> label)) potential_error(line_no, "vpot needs a vertex label");
        const double value = read_number(fields, line_no);
        check_value(value, "vpot");
        vertex.values[index(t.find(label))] = value;
        saw_vertex = true;
      } else if (tag == "epot") {
        std::size_t e = 0;
        std::string kind;
        if (!(fields >> e >> kind)) potential_error(line_no, "epot needs an edge index and a kind");
        if (e >= t.edge_count()) potential_error(line_no, "edge index " + std::to_string(e) + " out of range");
        if (kind == "const") {
          edge.set_constant(edge_id(e), read_number(fields, line_no));
        } else if (kind == "samples") {
          std::size_t n = 0;
          if (!(fields >> n)) potential_error(line_no, "samples needs a count");
          std::vector<double> s(n);
          for (double& x : s) x = read_number(fields, line_no);
          edge.set_samples(edge_id(e), std::move(s));
        } else {
          potential_error(line_no, "unknown epot kind '" + kind + "'");
        }
        saw_edge = true;
      } else if (tag == "quadrature") {
        std::string rule;
        if (!(fields >> rule)) potential_error(line_no, "quadrature needs a rule name");
        edge.set_rule(parse_quadrature(rule));
      } else {
        potential_error(line_no, "unknown record '" + tag + "'");
      }
    } catch (const Error& err) {
      if (std::string_view(err.what()).starts_with("potential file line")) throw;
      throw Error(err.kind(), "potential file line " + std::to_string(line_no) + ": " + err.what(), err.subject());
    }
  }
  if (saw_vertex && saw_edge) throw Error(ErrorKind::invalid_argument, "potential file mixes vpot and epot records");
  if (saw_edge) return edge;
  return vertex;
}

AnyPotential load_potential(const std::string& path, const Topology& t) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::not_found, "cannot open potential file '" + path + "'", path);
  return read_potential(in, t);
}

void write_potential(std::ostream& out, const VertexPotential& v, const Topology& t) {
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    if (v.values[i] != 0.0) out << "vpot " << t.label(vertex_id(i)) << ' ' << format_value(v.values[i]) << '\n';
  }
}

void write_potential(std::ostream& out, const EdgePotential& v) {
  out << "quadrature " << to_string(v.rule()) << '\n';
  for (std::size_t e = 0; e < v.edge_count(); ++e) {
    const EdgeProfile& p = v.profile(edge_id(e));
    if (const auto* c = std::get_if<ConstantProfile>(&p)) {
      out << "epot " << e << " const " << format_value(c->value) << '\n';
    } else {
      const auto& s = std::get<SampledProfile>(p).samples;
      out << "epot " << e << " samples " << s.size();
      for (double x : s) out << ' ' << format_value(x);
      out << '\n';
    }
  }
}

}  // namespace spectral_lab
