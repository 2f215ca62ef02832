#pragma once

#include <vector>

#include "qct/tree.hpp"

namespace qct {

/// Nested 2^-n nets of the leaf set, for n = 1 .. n_max.
struct NetHierarchy {
  std::vector<std::vector<VertexId>> levels;  // levels[n-1] = level n, sorted ascending
  int n_max = 0;

  const std::vector<VertexId>& level(int n) const { return levels.at(std::size_t(n) - 1); }
};

/// Greedy farthest-point nets: level 1 starts from the smallest-id leaf and
/// inserts leaves in farthest-point order while they stay 2^-1 separated;
/// level n+1 extends level n at scale 2^-(n+1).  Stops at the first level
/// that exhausts the leaf set.
NetHierarchy build_nets(const MetricTree& tree);

/// Vertex set of the union of tree paths between all pairs of `points`
/// (equivalently, paths from a fixed basepoint).  Sorted ascending.
std::vector<VertexId> hull(const MetricTree& tree, const std::vector<VertexId>& points);

}  // namespace qct
