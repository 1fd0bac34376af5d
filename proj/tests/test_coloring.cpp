#include <doctest.h>

#include "oracles.hpp"
#include "spectral_lab/coloring.hpp"

using namespace spectral_lab;

TEST_SUITE("coloring") {
  TEST_CASE("small vertex colorings") {
    CombinatorialGraph c4;
    for (int i = 0; i < 4; ++i) c4.topology.add_vertex(std::to_string(i));
    for (int i = 0; i < 4; ++i) c4.add_edge(vertex_id(i), vertex_id((i + 1) % 4), 1.0);
    const VertexColoring a = greedy_vertex_coloring(c4.topology);
    CHECK(a.class_count == 2);
    CHECK(oracle::coloring_is_proper(c4.topology, a));

    CombinatorialGraph k14;
    const auto c = k14.topology.add_vertex("c");
    for (int i = 0; i < 4; ++i) k14.add_edge(c, k14.topology.add_vertex("l" + std::to_string(i), true), 1.0);
    const VertexColoring b = greedy_vertex_coloring(k14.topology);
    CHECK(b.class_count == 2);
    CHECK(b.class_count <= 5);
  }

  TEST_CASE("small edge-star colorings") {
    CombinatorialGraph p4;
    for (int i = 0; i < 4; ++i) p4.topology.add_vertex(std::to_string(i), i == 0 || i == 3);
    for (int i = 0; i < 3; ++i) p4.add_edge(vertex_id(i), vertex_id(i + 1), 1.0);
    const EdgeStarColoring c = greedy_edge_star_coloring(p4.topology);
    CHECK(c.class_count == 3);
    CHECK(c.class_count <= 9);

    // On a path the stars of edges 0 and 3 are the first disjoint pair.
    CombinatorialGraph p6;
    for (int i = 0; i < 6; ++i) p6.topology.add_vertex(std::to_string(i), i == 0 || i == 5);
    for (int i = 0; i < 5; ++i) p6.add_edge(vertex_id(i), vertex_id(i + 1), 1.0);
    const EdgeStarColoring d = greedy_edge_star_coloring(p6.topology);
    CHECK(d.color[0] == 0);
    CHECK(d.color[3] == 0);
    CHECK(d.class_count == 3);
    CHECK(oracle::coloring_is_star_disjoint(p6.topology, d));
  }

  TEST_CASE("random graphs: proper vertex colorings within d + 1 classes") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const CombinatorialGraph g = build_random({60, 6, 60, 1.0, 1.0, seed});
      const VertexColoring c = greedy_vertex_coloring(g.topology);
      CHECK(oracle::coloring_is_proper(g.topology, c));
      CHECK(c.class_count <= oracle::max_degree(g.topology) + 1);
      for (std::size_t v = 0; v < c.color.size(); ++v) CHECK(c.color[v] < c.class_count);
    }
  }

  TEST_CASE("random graphs: star-disjoint edge classes within 2 d^2 + 1") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const CombinatorialGraph g = build_random({40, 5, 40, 1.0, 1.0, seed});
      const EdgeStarColoring c = greedy_edge_star_coloring(g.topology);
      const std::size_t d = oracle::max_degree(g.topology);
      CHECK(oracle::coloring_is_star_disjoint(g.topology, c));
      CHECK(c.class_count <= 2 * d * d + 1);
    }
  }

  TEST_CASE("colorings are deterministic") {
    const CombinatorialGraph g = build_random({80, 5, 70, 1.0, 1.0, 3});
    CHECK(greedy_vertex_coloring(g.topology).color == greedy_vertex_coloring(g.topology).color);
    CHECK(greedy_edge_star_coloring(g.topology).color == greedy_edge_star_coloring(g.topology).color);
  }

  TEST_CASE("classes partition the ids") {
    const CombinatorialGraph g = build_lattice(2, 3);
    const VertexColoring c = greedy_vertex_coloring(g.topology);
    std::size_t total = 0;
    for (const auto& cls : c.classes()) total += cls.size();
    CHECK(total == g.topology.vertex_count());
    const EdgeStarColoring e = greedy_edge_star_coloring(g.topology);
    total = 0;
    for (const auto& cls : e.classes()) total += cls.size();
    CHECK(total == g.topology.edge_count());
  }
}
