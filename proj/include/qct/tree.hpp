#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace qct {

using VertexId = std::uint32_t;

/// Finite metric tree: combinatorial tree structure plus a full vertex metric.
/// Construction validates everything (tree shape, metric axioms); instances
/// are immutable afterwards, so downstream code can trust the invariants.
class MetricTree {
 public:
  MetricTree() = default;

  /// Builds from an explicit symmetric metric (row-major V x V).
  static MetricTree from_metric(std::size_t vertex_count,
                                std::vector<std::pair<VertexId, VertexId>> edges,
                                std::vector<double> metric);

  /// Builds the geodesic (path-length) metric from per-edge lengths aligned
  /// with `edges`.
  static MetricTree from_edge_lengths(std::size_t vertex_count,
                                      std::vector<std::pair<VertexId, VertexId>> edges,
                                      const std::vector<double>& lengths);

  std::size_t vertex_count() const { return vertex_count_; }
  const std::vector<std::pair<VertexId, VertexId>>& edges() const { return edges_; }
  const std::vector<VertexId>& neighbors(VertexId v) const { return adjacency_[v]; }
  const std::vector<double>& metric() const { return metric_; }

  double distance(VertexId a, VertexId b) const { return metric_[a * vertex_count_ + b]; }

  /// Unique simple path from x to y, inclusive of both endpoints.
  std::vector<VertexId> path(VertexId x, VertexId y) const;

  /// Diameter of the path from x to y: max pairwise distance over its vertices.
  double arc_diameter(VertexId x, VertexId y) const;

  /// Degree-1 vertices in ascending order; a single vertex counts as a leaf.
  std::vector<VertexId> leaves() const;

  /// Bounded-turning constant: max over vertex pairs of
  /// arc_diameter(x,y) / d(x,y).  Computed once and cached.
  double turning_constant() const;

  /// The deformed metric d'(x,y) = arc_diameter(x,y) for all pairs.
  std::vector<double> arc_diameter_metric() const;

  /// Deforms to the arc-diameter metric and rescales so the diameter is
  /// exactly 1.  Idempotent: a normalized tree comes back bit-identical.
  MetricTree normalize() const;

  /// True only for trees produced by normalize().
  bool normalized() const { return normalized_; }

  /// Unique vertex p of the connected set `component` lying on path(x, q)
  /// for every q in the set (the projection of x onto the subtree).
  VertexId gate(VertexId x, const std::vector<VertexId>& component) const;

  /// Empirical doubling diagnostic: worst greedy count of (r/2)-balls needed
  /// to cover any vertex ball of dyadic radius r.
  int doubling_estimate() const;

 private:
  void validate_and_index();

  std::size_t vertex_count_ = 0;
  std::vector<std::pair<VertexId, VertexId>> edges_;
  std::vector<std::vector<VertexId>> adjacency_;
  std::vector<double> metric_;
  std::vector<VertexId> parent_;   // rooted at vertex 0
  std::vector<std::uint32_t> depth_;
  bool normalized_ = false;
  mutable double turning_cache_ = 0.0;  // 0 = not yet computed
};

}  // namespace qct
