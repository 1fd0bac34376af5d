#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "spectral_lab/bounds.hpp"
#include "spectral_lab/error.hpp"

using namespace spectral_lab;

namespace {

EdgePotential constant_on(const MetricGraph& g, double c) {
  EdgePotential v(g.topology.edge_count());
  for (std::size_t e = 0; e < g.topology.edge_count(); ++e) v.set_constant(edge_id(e), c);
  return v;
}

}  // namespace

TEST_SUITE("bounds") {
  TEST_CASE("combinatorial lower bound: zero potential") {
    const CombinatorialGraph g = build_lattice(2, 3);
    const BoundReport r = lower_bound_combinatorial(g, VertexPotential::zero(g.topology.vertex_count()), 1.0);
    CHECK(r.lhs == 0.0);
    CHECK(r.rhs == 0.0);
    CHECK(r.pass);
  }

  TEST_CASE("combinatorial lower bound: single loaded vertex on a Z2 window") {
    const CombinatorialGraph g = build_lattice(2, 3);
    VertexPotential v = VertexPotential::zero(g.topology.vertex_count());
    v.values[index(g.topology.find("0,0"))] = 10.0;
    WitnessCheck w;
    const BoundReport r = lower_bound_combinatorial(g, v, 1.0, &w);
    CHECK(r.rhs == doctest::Approx(0.2));
    CHECK(r.lhs >= 1.0);
    CHECK(r.pass);
    CHECK(r.param("tau") == 5.0);
    CHECK(w.size == 1);
    CHECK(w.min_quotient == doctest::Approx(2.5));
    CHECK(w.cleared);
  }

  TEST_CASE("combinatorial lower bound: random sweep with witnesses") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> log_s(-2.0, 0.5);
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      const CombinatorialGraph g = build_random({40, 5, 25, 0.5, 2.0, seed});
      const VertexPotential v = oracle::random_vertex_potential(g.topology, rng, 20.0, 0.6);
      const double s = std::pow(10.0, log_s(rng));
      WitnessCheck w;
      const BoundReport r = lower_bound_combinatorial(g, v, s, &w);
      CHECK(r.pass);
      CHECK(w.cleared);
      // Independent count by dense oracle.
      const FormPair p = assemble_combinatorial(g, v);
      const auto spec = oracle::pencil_spectrum(p.A, p.B);
      const auto n = std::count_if(spec.begin(), spec.end(), [&](double x) { return x > s; });
      CHECK(r.lhs == static_cast<double>(n));
    }
  }

  TEST_CASE("combinatorial lower bound: potential outside the window is rejected") {
    const CombinatorialGraph g = build_lattice(1, 2);
    VertexPotential v = VertexPotential::zero(5);
    v.values[0] = 1.0;
    CHECK_THROWS_AS(lower_bound_combinatorial(g, v, 1.0), Error);
    CHECK_THROWS_AS(lower_bound_combinatorial(g, VertexPotential::zero(5), 0.0), Error);
  }

  TEST_CASE("per-edge bound: V = 1 on (0, pi)") {
    const MetricGraph g = build_metric_path({std::numbers::pi});
    const EdgePotential v = constant_on(g, 1.0);
    for (double lambda : {0.3, 0.07, 0.02, 0.0037}) {
      const BoundReport r = per_edge_dirichlet_bound(g, v, edge_id(0), lambda, 800);
      CHECK(r.lhs == std::floor(1.0 / std::sqrt(lambda)));
      CHECK(r.rhs == doctest::Approx(std::numbers::pi / std::sqrt(lambda)).epsilon(1e-12));
      CHECK(r.pass);
    }
    const BoundReport fine = per_edge_dirichlet_bound(g, v, edge_id(0), 1.0 / (400.5 * 400.5), 4000);
    CHECK(fine.param("weyl_edge_ratio") == doctest::Approx(1.0).epsilon(0.01));
  }

  TEST_CASE("per-edge bound: zero potential") {
    const MetricGraph g = build_metric_path({2.0});
    const BoundReport r = per_edge_dirichlet_bound(g, EdgePotential(1), edge_id(0), 0.1, 64);
    CHECK(r.lhs == 0.0);
    CHECK(r.pass);
  }

  TEST_CASE("per-edge bound: C = 1 over 100 random instances") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> len(0.2, 5.0), amp(0.0, 10.0), log_lambda(-3.0, 0.0);
    std::uniform_int_distribution<int> shape(0, 3);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const double l = len(rng);
      const MetricGraph g = build_metric_path({l});
      const double a = amp(rng), b = amp(rng), c = amp(rng);
      const int kind = shape(rng);
      const EdgePotential v = EdgePotential::sample(
          g,
          [&](EdgeId, double x) {
            switch (kind) {
              case 0: return a;
              case 1: return a * x + b * (1.0 - x);
              case 2: return a * std::exp(-50.0 * (x - 0.3) * (x - 0.3));
              default: return std::abs(a * std::sin(7.0 * x) + b * std::cos(3.0 * x) + c * x * x);
            }
          },
          65);
      const BoundReport r = per_edge_dirichlet_bound(g, v, edge_id(0), std::pow(10.0, log_lambda(rng)), 512);
      CHECK(r.pass);
      worst = std::max(worst, r.param("empirical_constant"));
    }
    CHECK(worst <= 1.0);
  }

  TEST_CASE("bracketing: zero potential and random stars") {
    const MetricGraph star = build_metric_star({1.0, 1.3, 0.7, 2.0});
    const std::vector<std::size_t> mesh{32, 32, 32, 32};
    const BoundReport zero = bracketing_check(star, EdgePotential(4), mesh, 0.1);
    CHECK(zero.lhs == 0.0);
    CHECK(zero.pass);
    std::mt19937_64 rng(6);
    const EdgePotential v = oracle::random_edge_potential(star, rng, 30.0, 5, false);
    for (int k = 0; k < 10; ++k) {
      const double s = 0.002 * std::pow(1.7, k);
      const BoundReport r = bracketing_check(star, v, mesh, s);
      CHECK(r.pass);
      CHECK(r.param("n_pl") <= r.param("n_full"));
      CHECK(r.param("n_dirichlet") <= r.param("n_full"));
      CHECK(r.param("n_full") <= r.param("upper"));
      CHECK(r.param("cross_block_max") <= 1e-12);
    }
  }

  TEST_CASE("bracketing: potential on one edge interior") {
    const MetricGraph star = build_metric_star({1.0, 1.0, 1.0});
    EdgePotential v(3);
    v.set_samples(edge_id(0), {0.0, 0.0, 50.0, 50.0, 50.0, 0.0, 0.0, 0.0, 0.0});
    const std::vector<std::size_t> mesh{64, 64, 64};
    for (double s : {0.001, 0.01, 0.05}) {
      const BoundReport r = bracketing_check(star, v, mesh, s);
      CHECK(r.pass);
      CHECK(r.param("n_pl") <= r.param("n_dirichlet"));
    }
  }

  TEST_CASE("bracketing: mismatched meshes are rejected") {
    const MetricGraph g = build_metric_star({1.0, 1.0});
    const EdgePotential v = constant_on(g, 1.0);
    const FormPair a = assemble_metric_fem(g, v, {8, 8});
    const FormPair b = assemble_metric_fem(g, v, {16, 16});
    const Splitting sb = split_pl_dirichlet(b);
    CHECK_THROWS_AS(bracketing_check(a, sb.pl, sb.dirichlet, 0.1), Error);
  }

  TEST_CASE("domination: zero, piecewise constant and random potentials") {
    const MetricGraph g = build_metric_star({1.0, 2.0, 0.5});
    const BoundReport zero = domination_check(g, EdgePotential(3), {16, 16, 16});
    CHECK(zero.pass);
    EdgePotential pc(3);
    pc.set_constant(edge_id(0), 1.0);
    pc.set_constant(edge_id(1), 4.0);
    pc.set_constant(edge_id(2), 0.5);
    CHECK(domination_check(g, pc, {16, 32, 8}).pass);
    std::mt19937_64 rng(12);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const MetricGraph m = build_random_metric({16, 4, 6, 0.4, 2.0, seed});
      const EdgePotential v = oracle::random_edge_potential(m, rng, 5.0, 5, false);
      const BoundReport r = domination_check(m, v, default_mesh(m, v, {0.1, 4}));
      CHECK(r.pass);
      CHECK(r.margin >= -1e-10 * std::max(1.0, r.param("kappa_top")));
    }
  }

  TEST_CASE("domination: window mismatch is rejected") {
    const MetricGraph g = build_metric_star({1.0, 1.0, 1.0});
    const EdgePotential v = constant_on(g, 1.0);
    const Splitting s = split_pl_dirichlet(assemble_metric_fem(g, v, {8, 8, 8}));
    const CombinatorialGraph other = build_lattice(1, 3);
    const FormPair k = assemble_combinatorial(other, VertexPotential::zero(other.topology.vertex_count()));
    CHECK_THROWS_AS(domination_check(s.pl, k), Error);
  }

  TEST_CASE("metric lower bound: zero potential and a single loaded edge") {
    // Path of four edges: only the middle two edges avoid the boundary.
    const MetricGraph g = build_metric_path({1.0, 1.0, 1.0, 1.0});
    const std::vector<std::size_t> mesh{32, 32, 32, 32};
    CHECK(metric_lower_bound(g, EdgePotential(4), 0.1, mesh).pass);

    EdgePotential v(4);
    v.set_constant(edge_id(1), 40.0);
    const FormPair full = assemble_metric_fem(g, v, mesh);
    const EdgeWitness w = edge_witness(g, full, eta(g, v), edge_id(1));
    // phi is 1 on edge 1 and decays linearly across edges 0 and 2.
    CHECK(w.numerator == doctest::Approx(40.0).epsilon(1e-12));
    CHECK(w.denominator == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(w.quotient() >= w.claimed * (1.0 - 1e-12));
    WitnessCheck check;
    const BoundReport r = metric_lower_bound(g, v, 0.5, mesh, &check);
    CHECK(r.pass);
    CHECK(check.cleared);
    CHECK(check.size == 1);
  }

  TEST_CASE("metric lower bound: random sweep") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> log_s(-3.0, -0.5);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const MetricGraph g = build_random_metric({18, 4, 10, 0.5, 1.5, seed});
      const EdgePotential v = oracle::random_edge_potential(g, rng, 200.0, 3, true);
      const auto mesh = default_mesh(g, v, {0.1, 4});
      WitnessCheck w;
      const BoundReport r = metric_lower_bound(g, v, std::pow(10.0, log_s(rng)), mesh, &w);
      CHECK(r.pass);
      CHECK(w.cleared);
    }
  }

  TEST_CASE("metric lower bound: preconditions") {
    const MetricGraph g = build_metric_path({1.0, 1.0, 1.0});
    EdgePotential v(3);
    v.set_constant(edge_id(0), 1.0);
    CHECK_THROWS_AS(metric_lower_bound(g, v, 0.1, {8, 8, 8}), Error);
  }

  TEST_CASE("Weyl ratio on a single Dirichlet edge") {
    const MetricGraph g = build_metric_path({std::numbers::pi});
    const EdgePotential v = constant_on(g, 1.0);
    const std::vector<double> alphas{10.5, 50.5, 200.5, 1000.5};
    const auto rows = weyl_ratio(g, v, alphas, {std::numbers::pi / 800.0, 8});
    REQUIRE(rows.size() == alphas.size());
    for (const WeylRow& row : rows) {
      const double exact = std::floor(std::sqrt(row.alpha)) / std::sqrt(row.alpha);
      CHECK(row.weyl == doctest::Approx(exact).epsilon(1e-12));
      CHECK_FALSE(row.threshold);
    }
    CHECK_THROWS_AS(weyl_ratio(g, EdgePotential(1), alphas), Error);
  }

  TEST_CASE("Weyl ratio refinement levels") {
    const MetricGraph g = build_metric_star({1.0, 1.0, 1.0});
    const EdgePotential v = constant_on(g, 2.0);
    const auto rows = weyl_ratio(g, v, {100.0}, {0.05, 4}, 3, 2);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].h_max == doctest::Approx(rows[0].h_max / 2.0));
    CHECK(rows[2].dofs > rows[1].dofs);
  }

  TEST_CASE("rlc ratios") {
    const CombinatorialGraph g = build_lattice(3, 3);
    VertexPotential zero = VertexPotential::zero(g.topology.vertex_count());
    const FormPair p0 = assemble_combinatorial(g, zero);
    for (const RlcRow& row : rlc_ratio(p0, zero.values, 1.5, {1.0, 10.0})) CHECK(row.ratio == 0.0);

    std::mt19937_64 rng(1);
    const VertexPotential v = oracle::random_vertex_potential(g.topology, rng, 1.0);
    const FormPair p = assemble_combinatorial(g, v);
    const auto rows = rlc_ratio(p, v.values, 1.5, {1.0, 4.0, 16.0}, 2);
    const FormPair doubled = p.with_potential_scaled(2.0);
    std::vector<double> dv = v.values;
    for (double& x : dv) x *= 2.0;
    const auto rows2 = rlc_ratio(doubled, dv, 1.5, {0.5, 2.0, 8.0});
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].n_minus == rows2[i].n_minus);
      CHECK(rows2[i].ratio == doctest::Approx(rows[i].ratio).epsilon(1e-12));
    }
    CHECK_THROWS_AS(rlc_ratio(p, v.values, 0.0, {1.0}), Error);
    CHECK_THROWS_AS(rlc_ratio(p, v.values, 1.0, {-1.0}), Error);
  }

  TEST_CASE("report pass rule uses the scaled tolerance") {
    BoundReport r;
    r.lhs = 1e6;
    r.rhs = 1e6;
    r.margin = -1e-5;
    finalize(r);
    CHECK(r.pass);
    r.margin = -1e-3;
    finalize(r);
    CHECK_FALSE(r.pass);
    CHECK_THROWS_AS(r.param("missing"), Error);
  }
}
