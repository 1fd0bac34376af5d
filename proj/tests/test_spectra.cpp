#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spectral_lab/error.hpp"
#include "spectral_lab/spectra.hpp"

using namespace spectral_lab;

namespace {

FormPair k2_pair() {
  CombinatorialGraph g;
  const auto a = g.topology.add_vertex("a");
  const auto b = g.topology.add_vertex("b", true);
  g.add_edge(a, b, 2.0);
  return assemble_combinatorial(g, VertexPotential{{6.0, 0.0}});
}

SpectralReport report_of(std::vector<double> values) {
  SpectralReport r;
  r.eigenvalues = std::move(values);
  return r;
}

struct Instance {
  CombinatorialGraph graph;
  VertexPotential potential;
};

Instance random_instance(std::uint64_t seed, std::size_t vertices = 20) {
  std::mt19937_64 rng(seed);
  Instance in{build_random({vertices, 4, vertices / 2, 0.5, 2.0, seed}), {}};
  in.potential = oracle::random_vertex_potential(in.graph.topology, rng, 5.0, 0.7);
  return in;
}

}  // namespace

TEST_SUITE("spectra") {
  TEST_CASE("K2 with one Dirichlet end") {
    const FormPair p = k2_pair();
    const SpectralReport r = pencil_eigenvalues(p);
    REQUIRE(r.eigenvalues.size() == 1);
    CHECK(r.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-15));
    const NegativeCount n = negative_count(p, 0.5);
    CHECK(n.value == 1);
    CHECK_FALSE(n.threshold);
    CHECK(negative_count(p, 0.0).value == 0);
    const BirmanSchwingerCheck bs = birman_schwinger_check(p, 0.5);
    CHECK(bs.lhs == 1);
    CHECK(bs.rhs == 1);
    CHECK(bs.equal());
    const BirmanSchwingerCheck small = birman_schwinger_check(p, 1e-6);
    CHECK(small.lhs == 0);
    CHECK(small.rhs == 0);
  }

  TEST_CASE("zero potential has no positive spectrum") {
    const CombinatorialGraph g = build_lattice(2, 3);
    const FormPair p = assemble_combinatorial(g, VertexPotential::zero(g.topology.vertex_count()));
    CHECK(pencil_eigenvalues(p).eigenvalues.empty());
    CHECK(negative_count(p, 100.0).value == 0);
  }

  TEST_CASE("dense pencil eigenvalues match the oracle") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const Instance in = random_instance(seed, 30);
      const FormPair p = assemble_combinatorial(in.graph, in.potential);
      const auto want = oracle::positive_part(oracle::pencil_spectrum(p.A, p.B), 1e-10);
      const SpectralReport r = pencil_eigenvalues(p);
      CHECK(r.provenance.method == "dense-dsygvd");
      REQUIRE(r.eigenvalues.size() == want.size());
      for (std::size_t k = 0; k < want.size(); ++k) CHECK(std::abs(r.eigenvalues[k] - want[k]) <= 1e-10 * want[0]);
    }
  }

  TEST_CASE("iterative eigenvalues match the dense oracle to 1e-8") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const Instance in = random_instance(seed, 20);
      const FormPair p = assemble_combinatorial(in.graph, in.potential);
      const auto want = oracle::positive_part(oracle::pencil_spectrum(p.A, p.B), 1e-10);
      EigenRequest req;
      req.dense_cutoff = 0;
      const SpectralReport r = pencil_eigenvalues(p, req);
      CHECK(r.provenance.method == "lanczos");
      REQUIRE(r.eigenvalues.size() == want.size());
      for (std::size_t k = 0; k < want.size(); ++k) {
        CHECK(std::abs(r.eigenvalues[k] - want[k]) <= 1e-8 * std::max(want[k], 1e-3 * want[0]));
      }
    }
  }

  TEST_CASE("iterative solver resolves multiplicities") {
    // Constant potential on a symmetric lattice window has repeated eigenvalues.
    const CombinatorialGraph g = build_lattice(2, 6);
    VertexPotential v = VertexPotential::zero(g.topology.vertex_count());
    for (std::size_t i = 0; i < v.values.size(); ++i) v.values[i] = g.topology.is_boundary(vertex_id(i)) ? 0.0 : 1.0;
    const FormPair p = assemble_combinatorial(g, v);
    const auto want = oracle::pencil_spectrum(p.A, p.B);
    EigenRequest req;
    req.dense_cutoff = 0;
    req.count = 12;
    const SpectralReport r = pencil_eigenvalues(p, req);
    REQUIRE(r.eigenvalues.size() == 12);
    for (std::size_t k = 0; k < 12; ++k) CHECK(std::abs(r.eigenvalues[k] - want[k]) <= 1e-8 * want[0]);
    req.count.reset();
    req.threshold = 0.5 * want[0];
    const SpectralReport t = pencil_eigenvalues(p, req);
    const std::size_t expected = static_cast<std::size_t>(
        std::count_if(want.begin(), want.end(), [&](double x) { return x > *req.threshold; }));
    CHECK(t.eigenvalues.size() >= expected);
    CHECK(counting(t, *req.threshold * 1.0000001).value <= expected);
  }

  TEST_CASE("iterative results are deterministic for a fixed seed") {
    const Instance in = random_instance(4, 60);
    const FormPair p = assemble_combinatorial(in.graph, in.potential);
    EigenRequest req;
    req.dense_cutoff = 0;
    req.count = 5;
    CHECK(pencil_eigenvalues(p, req).eigenvalues == pencil_eigenvalues(p, req).eigenvalues);
  }

  TEST_CASE("counting examples") {
    const SpectralReport r = report_of({3.0, 1.0, 0.5});
    CHECK(counting(r, 1.0).value == 1);
    CHECK(counting(r, 1.0).ambiguous);
    CHECK(counting(r, 10.0).value == 0);
    const Count c = counting(report_of({1.0}), 0.999999);
    CHECK(c.value == 1);
    CHECK_FALSE(c.ambiguous);
    CHECK_THROWS_AS(counting(r, 0.0), Error);
    CHECK_THROWS_AS(counting(r, -1.0), Error);
  }

  TEST_CASE("counting refuses ranges the report does not cover") {
    SpectralReport r = report_of({3.0, 2.0});
    r.complete_above = 1.0;
    CHECK(counting(r, 2.5).value == 1);
    CHECK_THROWS_AS(counting(r, 0.5), Error);
  }

  TEST_CASE("pencil_count by inertia agrees with eigenvalue counting") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const Instance in = random_instance(seed, 25);
      const FormPair p = assemble_combinatorial(in.graph, in.potential);
      const auto spec = oracle::pencil_spectrum(p.A, p.B);
      for (double s : {0.01, 0.1, 0.5, 2.0}) {
        const std::size_t want =
            static_cast<std::size_t>(std::count_if(spec.begin(), spec.end(), [&](double x) { return x > s; }));
        CHECK(pencil_count(p, s).value == want);
      }
    }
  }

  TEST_CASE("negative_count matches the dense oracle and is nondecreasing") {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
      const Instance in = random_instance(seed, 25);
      const FormPair p = assemble_combinatorial(in.graph, in.potential);
      std::size_t prev = 0;
      for (double alpha : {0.1, 0.3, 1.0, 3.0, 10.0, 30.0}) {
        const NegativeCount n = negative_count(p, alpha);
        CHECK(n.value == oracle::negative_eigenvalues(p.A, p.B, alpha));
        CHECK(n.value >= prev);
        prev = n.value;
      }
    }
    CHECK_THROWS_AS(negative_count(k2_pair(), -1.0), Error);
  }

  TEST_CASE("sparse inertia path on a large window") {
    const CombinatorialGraph g = build_lattice(2, 12);
    std::mt19937_64 rng(1);
    const VertexPotential v = oracle::random_vertex_potential(g.topology, rng, 3.0);
    const FormPair p = assemble_combinatorial(g, v);
    REQUIRE(p.size() > 300);
    for (double alpha : {0.5, 2.0, 8.0}) {
      const NegativeCount n = negative_count(p, alpha);
      CHECK(n.value == oracle::negative_eigenvalues(p.A, p.B, alpha));
    }
  }

  TEST_CASE("Birman-Schwinger identity on random instances") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> log_alpha(-1.0, 1.5);
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      const Instance in = random_instance(100 + seed, 30);
      const FormPair p = assemble_combinatorial(in.graph, in.potential);
      const double alpha = std::pow(10.0, log_alpha(rng));
      const BirmanSchwingerCheck bs = birman_schwinger_check(p, alpha);
      CHECK_FALSE(bs.ambiguous);
      CHECK(bs.equal());
    }
  }

  TEST_CASE("scaling the potential") {
    const Instance in = random_instance(7, 25);
    const FormPair p = assemble_combinatorial(in.graph, in.potential);
    const FormPair q = p.with_potential_scaled(2.5);
    const auto a = pencil_eigenvalues(p).eigenvalues;
    const auto b = pencil_eigenvalues(q).eigenvalues;
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(b[k] == doctest::Approx(2.5 * a[k]).epsilon(1e-12));
    for (double alpha : {0.2, 1.0, 4.0}) CHECK(negative_count(q, alpha).value == negative_count(p, 2.5 * alpha).value);
  }

  TEST_CASE("nested windows never decrease eigenvalues") {
    const CombinatorialGraph g = build_lattice(2, 5);
    std::mt19937_64 rng(3);
    const VertexPotential v = oracle::random_vertex_potential(g.topology, rng, 2.0);
    std::vector<double> prev;
    for (int radius = 1; radius <= 4; ++radius) {
      std::vector<VertexId> window;
      for (std::size_t i = 0; i < g.topology.vertex_count(); ++i) {
        const std::string& label = g.topology.label(vertex_id(i));
        const auto comma = label.find(',');
        const int x = std::stoi(label.substr(0, comma)), y = std::stoi(label.substr(comma + 1));
        if (std::abs(x) <= radius && std::abs(y) <= radius) window.push_back(vertex_id(i));
      }
      const FormPair p = assemble_combinatorial(g, v, window);
      const auto s = pencil_eigenvalues(p).eigenvalues;
      for (std::size_t k = 0; k < prev.size(); ++k) {
        REQUIRE(k < s.size());
        CHECK(s[k] >= prev[k] * (1.0 - 1e-12));
      }
      prev = s;
    }
  }

  TEST_CASE("pl-restricted eigenvalues do not exceed the full ones") {
    std::mt19937_64 rng(21);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const MetricGraph g = build_random_metric({12, 4, 5, 0.5, 2.0, seed});
      const EdgePotential v = oracle::random_edge_potential(g, rng, 3.0, 3, false);
      const FormPair full = assemble_metric_fem(g, v, default_mesh(g, v, {0.1, 4}));
      const Splitting s = split_pl_dirichlet(full);
      const auto a = pencil_eigenvalues(full).eigenvalues;
      const auto b = pencil_eigenvalues(s.pl).eigenvalues;
      REQUIRE(b.size() <= a.size());
      for (std::size_t k = 0; k < b.size(); ++k) CHECK(b[k] <= a[k] * (1.0 + 1e-10));
    }
  }

  TEST_CASE("spectral quasi-norms") {
    SpectralQuasiNorms q = quasi_norms(report_of({1.0, 0.25, 1.0 / 9.0}), 0.5);
    CHECK(q.weak == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(quasi_norms(report_of({2.5}), 0.7).schatten == doctest::Approx(2.5).epsilon(1e-15));
    std::vector<double> s;
    for (int n = 1; n <= 50; ++n) s.push_back(1.0 / (double(n) * n));
    q = quasi_norms(report_of(s), 1.0);
    CHECK(q.schatten == doctest::Approx(1.6251).epsilon(1e-4));
    CHECK(q.indicator.size() == 50);
    CHECK_THROWS_AS(quasi_norms(report_of(s), 0.0), Error);
  }
}
