#pragma once

#include <cstddef>
#include <vector>

#include "spectral_lab/graphs.hpp"

namespace spectral_lab {

// Proper vertex coloring: adjacent vertices never share a class.
struct VertexColoring {
  std::vector<std::size_t> color;  // indexed by VertexId
  std::size_t class_count = 0;

  std::vector<std::vector<VertexId>> classes() const;
};

// Edge coloring in which edges of one class have pairwise disjoint stars.
struct EdgeStarColoring {
  std::vector<std::size_t> color;  // indexed by EdgeId
  std::size_t class_count = 0;

  std::vector<std::vector<EdgeId>> classes() const;
};

// Greedy in vertex-id order, smallest free color. At most deg_max + 1 classes.
VertexColoring greedy_vertex_coloring(const Topology& t);

// Greedy in edge insertion order. An edge's star meets the stars of at most
// 2 deg_max^2 other edges, so at most 2 deg_max^2 + 1 classes are used.
EdgeStarColoring greedy_edge_star_coloring(const Topology& t);

}  // namespace spectral_lab
