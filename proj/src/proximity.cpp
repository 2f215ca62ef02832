#include "qct/proximity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qct/errors.hpp"

namespace qct {

double piece_distance(const MetricTree& tree, const Piece& a, const Piece& b) {
  double best = std::numeric_limits<double>::infinity();
  for (VertexId u : a.members)
    for (VertexId v : b.members) {
      if (u == v) return 0.0;
      best = std::min(best, tree.distance(u, v));
    }
  return best;
}

ProximityGraph build_graph(const MetricTree& tree, const Decomposition& dec, double S) {
  if (!(S > 0.0)) throw ValidationError("build_graph requires S > 0");
  ProximityGraph g;
  g.S = S;
  g.piece_count = dec.pieces.size();
  g.adjacency.assign(g.piece_count, {});
  for (std::uint32_t i = 0; i < g.piece_count; ++i) {
    for (std::uint32_t j = i + 1; j < g.piece_count; ++j) {
      const int coarse = std::max(dec.pieces[i].level, dec.pieces[j].level);
      const double threshold = S * std::ldexp(1.0, -coarse);
      if (piece_distance(tree, dec.pieces[i], dec.pieces[j]) <= threshold) {
        g.edges.push_back({i, j});
        g.adjacency[i].push_back(j);
        g.adjacency[j].push_back(i);
      }
    }
  }
  return g;
}

Coloring greedy_color(const ProximityGraph& graph) {
  Coloring c;
  c.S = graph.S;
  c.assignment.assign(graph.piece_count, 0);
  c.A = 0;
  std::vector<char> used;
  for (std::uint32_t p = 0; p < graph.piece_count; ++p) {
    used.assign(graph.piece_count + 2, 0);
    for (std::uint32_t nb : graph.adjacency[p])
      if (nb < p) used[std::size_t(c.assignment[nb])] = 1;  // only already-colored neighbors
    int color = 1;
    while (used[std::size_t(color)]) ++color;
    c.assignment[p] = color;
    c.A = std::max(c.A, color);
  }
  return c;
}

}  // namespace qct
