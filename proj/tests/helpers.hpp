#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "qct/tree.hpp"

namespace fixtures {

/// Three unit legs joined at vertex 3; leaves 0, 1, 2.  Normalizing halves
/// every leg (diameter 2), so leaf-leaf distances become 1 and leaf-center 0.5.
inline qct::MetricTree y_tree() {
  return qct::MetricTree::from_edge_lengths(4, {{0, 3}, {1, 3}, {2, 3}}, {1.0, 1.0, 1.0});
}

/// Path 0-1-2-3 with edge lengths 0.5, 0.4, 0.1 plus leaf 4 hanging 0.1 off
/// vertex 2.  Geodesic with diameter exactly 1, so it is its own
/// normalization; the hierarchy needs three net levels to reach leaf 4.
inline qct::MetricTree side_branch() {
  return qct::MetricTree::from_edge_lengths(5, {{0, 1}, {1, 2}, {2, 3}, {2, 4}},
                                            {0.5, 0.4, 0.1, 0.1});
}

/// Uniform geodesic path on n vertices of total length 1.
inline qct::MetricTree uniform_path(std::size_t n) {
  std::vector<std::pair<qct::VertexId, qct::VertexId>> edges;
  std::vector<double> lengths;
  for (qct::VertexId i = 0; i + 1 < n; ++i) {
    edges.push_back({i, i + 1});
    lengths.push_back(1.0 / double(n - 1));
  }
  return qct::MetricTree::from_edge_lengths(n, std::move(edges), lengths);
}

/// Path graph over planar points carrying the chordal Euclidean metric
/// (generally non-geodesic, so normalization deforms it).
inline qct::MetricTree polyline(const std::vector<std::pair<double, double>>& pts) {
  const std::size_t n = pts.size();
  std::vector<std::pair<qct::VertexId, qct::VertexId>> edges;
  for (qct::VertexId i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  std::vector<double> metric(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::hypot(pts[i].first - pts[j].first, pts[i].second - pts[j].second);
      metric[i * n + j] = d;
      metric[j * n + i] = d;
    }
  return qct::MetricTree::from_metric(n, std::move(edges), std::move(metric));
}

/// U-shaped polyline (0,0), (3,0), (3,4), (0,4): every pairwise distance is an
/// integer (two 3-4-5 triangles), the arc over (0,3) has diameter 5 against
/// chord 4, so the turning constant is exactly 1.25.
inline qct::MetricTree u_polyline() {
  return polyline({{0.0, 0.0}, {3.0, 0.0}, {3.0, 4.0}, {0.0, 4.0}});
}

}  // namespace fixtures
