#include "spectral_lab/coloring.hpp"

#include <algorithm>

namespace spectral_lab {
namespace {

constexpr std::size_t kUncolored = static_cast<std::size_t>(-1);

// Smallest color not flagged in `used`; clears the flags it touched.
std::size_t first_free(std::vector<char>& used, const std::vector<std::size_t>& touched) {
  std::size_t c = 0;
  while (c < used.size() && used[c]) ++c;
  for (std::size_t t : touched) used[t] = 0;
  return c;
}

template <typename Id>
std::vector<std::vector<Id>> group(const std::vector<std::size_t>& color, std::size_t count) {
  std::vector<std::vector<Id>> out(count);
  for (std::size_t i = 0; i < color.size(); ++i) out[color[i]].push_back(static_cast<Id>(i));
  return out;
}

}  // namespace

std::vector<std::vector<VertexId>> VertexColoring::classes() const {
  return group<VertexId>(color, class_count);
}

std::vector<std::vector<EdgeId>> EdgeStarColoring::classes() const {
  return group<EdgeId>(color, class_count);
}

VertexColoring greedy_vertex_coloring(const Topology& t) {
  VertexColoring out;
  out.color.assign(t.vertex_count(), kUncolored);
  std::vector<char> used;
  std::vector<std::size_t> touched;
  for (std::size_t v = 0; v < t.vertex_count(); ++v) {
    touched.clear();
    for (EdgeId e : t.incident(vertex_id(v))) {
      const std::size_t c = out.color[index(t.ends(e).other(vertex_id(v)))];
      if (c == kUncolored) continue;
      if (c >= used.size()) used.resize(c + 1, 0);
      used[c] = 1;
      touched.push_back(c);
    }
    out.color[v] = first_free(used, touched);
    out.class_count = std::max(out.class_count, out.color[v] + 1);
  }
  return out;
}

EdgeStarColoring greedy_edge_star_coloring(const Topology& t) {
  EdgeStarColoring out;
  out.color.assign(t.edge_count(), kUncolored);
  std::vector<char> used;
  std::vector<std::size_t> touched;
  std::vector<VertexId> near;
  for (std::size_t i = 0; i < t.edge_count(); ++i) {
    const auto& [a, b] = t.ends(edge_id(i));
    // Edges whose star meets S(e) are exactly those incident to the closed
    // neighbourhood of {a, b}.
    near.assign({a, b});
    for (VertexId x : {a, b}) {
      for (EdgeId f : t.incident(x)) near.push_back(t.ends(f).other(x));
    }
    touched.clear();
    for (VertexId x : near) {
      for (EdgeId f : t.incident(x)) {
        const std::size_t c = out.color[index(f)];
        if (c == kUncolored) continue;
        if (c >= used.size()) used.resize(c + 1, 0);
        used[c] = 1;
        touched.push_back(c);
      }
    }
    out.color[i] = first_free(used, touched);
    out.class_count = std::max(out.class_count, out.color[i] + 1);
  }
  return out;
}

}  // namespace spectral_lab
