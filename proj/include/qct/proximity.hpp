#pragma once

#include <cstdint>
#include <vector>

#include "qct/decomposition.hpp"
#include "qct/tree.hpp"

namespace qct {

/// Pieces adjacent whenever their set distance is within S times the scale of
/// the finer of the two levels.
struct ProximityGraph {
  double S = 1.0;
  std::size_t piece_count = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // piece id pairs, first < second
  std::vector<std::vector<std::uint32_t>> adjacency;
};

/// Min distance between member sets (0 when the pieces share a vertex).
double piece_distance(const MetricTree& tree, const Piece& a, const Piece& b);

/// Edge iff piece_distance(a, b) <= S * 2^-max(level_a, level_b), endpoints
/// included (non-strict comparison).
ProximityGraph build_graph(const MetricTree& tree, const Decomposition& dec, double S);

struct Coloring {
  double S = 1.0;
  std::vector<int> assignment;  // color per piece id, values 1..A
  int A = 0;
};

/// Sequential greedy coloring in (level, index) order: each piece takes the
/// smallest color unused by its already-colored neighbors.
Coloring greedy_color(const ProximityGraph& graph);

}  // namespace qct
