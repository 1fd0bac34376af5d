#pragma once

// Nonnegative potentials on combinatorial and metric graphs and the scalar
// reductions used by the spectral estimates: the per-edge masses eta_V, the
// star aggregates kappa_V, the distribution function and l^q / weak l^q
// quasi-norms.

#include <cstddef>
#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "spectral_lab/graphs.hpp"

namespace spectral_lab {

enum class Quadrature { trapezoid, simpson };

const char* to_string(Quadrature rule);
Quadrature parse_quadrature(const std::string& name);

struct VertexPotential {
  std::vector<double> values;  // indexed by VertexId, all >= 0

  static VertexPotential zero(std::size_t vertices) { return {std::vector<double>(vertices, 0.0)}; }
  double at(VertexId v) const { return values.at(index(v)); }
};

// Throws Error(invalid_argument) on negative or non-finite entries.
void check_nonnegative(const VertexPotential& v);

// Per-edge profile: a constant, or samples on a uniform mesh running from
// ends(e).a (position 0) to ends(e).b (position 1).
struct ConstantProfile {
  double value = 0.0;
};
struct SampledProfile {
  std::vector<double> samples;
};
using EdgeProfile = std::variant<ConstantProfile, SampledProfile>;

class EdgePotential {
 public:
  EdgePotential() = default;
  explicit EdgePotential(std::size_t edges, Quadrature rule = Quadrature::trapezoid);

  // Samples fn(e, position) at `samples` uniformly spaced points per edge.
  static EdgePotential sample(const MetricGraph& g, const std::function<double(EdgeId, double)>& fn,
                              std::size_t samples, Quadrature rule = Quadrature::trapezoid);

  std::size_t edge_count() const { return profiles_.size(); }
  Quadrature rule() const { return rule_; }
  void set_rule(Quadrature rule) { rule_ = rule; }

  void set_constant(EdgeId e, double value);
  void set_samples(EdgeId e, std::vector<double> samples);
  const EdgeProfile& profile(EdgeId e) const { return profiles_.at(index(e)); }
  bool is_constant(EdgeId e) const { return std::holds_alternative<ConstantProfile>(profile(e)); }
  // Number of samples; 0 for constant profiles.
  std::size_t sample_count(EdgeId e) const;

  // Piecewise-linear interpolant of the profile at position in [0, 1].
  double value(EdgeId e, double position) const;
  bool vanishes_on(EdgeId e) const;

  // Integral of V over the edge with the potential's quadrature rule.
  double integral(EdgeId e, double length) const;
  // Integral of sqrt(V) over the edge, same rule.
  double sqrt_integral(EdgeId e, double length) const;

  EdgePotential scaled(double c) const;

 private:
  std::vector<EdgeProfile> profiles_;
  Quadrature rule_ = Quadrature::trapezoid;
};

// Composite rule on uniformly spaced samples over an interval of `length`.
// Simpson needs an odd sample count >= 3; throws Error(invalid_argument).
double integrate_samples(const std::vector<double>& samples, double length, Quadrature rule);

// eta_V(e) = l_e * int_e V, indexed by EdgeId.
std::vector<double> eta(const MetricGraph& g, const EdgePotential& v);

// kappa_V(v) = int_{S(v)} V = sum_{e at v} l_e^{-1} eta_V(e).
VertexPotential kappa(const MetricGraph& g, const EdgePotential& v);

// int_Gamma sqrt(V).
double sqrt_integral(const MetricGraph& g, const EdgePotential& v);

// nu(tau) = #{entries > tau} (strict).
std::size_t distribution(const std::vector<double>& values, double tau);

struct QuasiNorms {
  double lq = 0.0;    // (sum a^q)^{1/q}
  double weak = 0.0;  // sup_n n^{1/q} a_(n) over the nonincreasing rearrangement
};

// Throws Error(invalid_argument) for q <= 0.
QuasiNorms quasi_norms(const std::vector<double>& values, double q);

// Nonincreasing rearrangement of a nonnegative sequence with its summary
// statistics.
class SequenceSummary {
 public:
  explicit SequenceSummary(std::vector<double> values);

  const std::vector<double>& sorted() const { return sorted_; }
  std::size_t distribution(double tau) const;
  double lq_norm(double q) const;
  double weak_norm(double q) const;

 private:
  std::vector<double> sorted_;
};

// Potential file format, one record per line ('#' comments):
//   vpot <vertex label> <value>
//   epot <edge index> const <c>
//   epot <edge index> samples <n> <v1> ... <vn>
//   quadrature trapezoid|simpson
// Vertices or edges without a record carry zero.
using AnyPotential = std::variant<VertexPotential, EdgePotential>;
AnyPotential read_potential(std::istream& in, const Topology& t);
AnyPotential load_potential(const std::string& path, const Topology& t);
void write_potential(std::ostream& out, const VertexPotential& v, const Topology& t);
void write_potential(std::ostream& out, const EdgePotential& v);

}  // namespace spectral_lab
