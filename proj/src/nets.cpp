#include "qct/nets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qct/errors.hpp"

namespace qct {

NetHierarchy build_nets(const MetricTree& tree) {
  if (!tree.normalized()) throw ValidationError("build_nets requires a normalized tree");
  const std::vector<VertexId> lvs = tree.leaves();
  if (lvs.size() < 2) throw ValidationError("build_nets requires at least two leaves");

  const std::size_t k = lvs.size();
  std::vector<double> min_dist(k, std::numeric_limits<double>::infinity());
  std::vector<char> in_net(k, 0);
  std::vector<VertexId> net;

  auto insert = [&](std::size_t idx) {
    in_net[idx] = 1;
    min_dist[idx] = 0.0;
    net.push_back(lvs[idx]);
    for (std::size_t j = 0; j < k; ++j)
      if (!in_net[j]) min_dist[j] = std::min(min_dist[j], tree.distance(lvs[idx], lvs[j]));
  };
  insert(0);  // seed: smallest leaf id (leaves() is ascending)

  NetHierarchy nets;
  for (int n = 1;; ++n) {
    const double eps = std::ldexp(1.0, -n);
    for (;;) {
      // Farthest remaining leaf; strict > keeps the smallest id on ties.
      std::size_t best = k;
      double best_d = -1.0;
      for (std::size_t j = 0; j < k; ++j)
        if (!in_net[j] && min_dist[j] > best_d) {
          best = j;
          best_d = min_dist[j];
        }
      if (best == k || best_d < eps) break;
      insert(best);
    }
    std::vector<VertexId> level = net;
    std::sort(level.begin(), level.end());
    nets.levels.push_back(std::move(level));
    if (net.size() == k) {
      nets.n_max = n;
      break;
    }
    if (n > 64)
      throw ValidationError("build_nets did not terminate; leaf separations may be degenerate");
  }
  return nets;
}

std::vector<VertexId> hull(const MetricTree& tree, const std::vector<VertexId>& points) {
  if (points.empty()) throw ValidationError("hull of an empty point set");
  std::vector<char> in(tree.vertex_count(), 0);
  for (VertexId b : points)
    for (VertexId v : tree.path(points.front(), b)) in[v] = 1;
  std::vector<VertexId> out;
  for (VertexId v = 0; v < tree.vertex_count(); ++v)
    if (in[v]) out.push_back(v);
  return out;
}

}  // namespace qct
