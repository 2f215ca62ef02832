#include "qct/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qct/errors.hpp"

namespace qct {

namespace {

std::string pair_label(VertexId a, VertexId b) {
  return "(" + std::to_string(a) + "," + std::to_string(b) + ")";
}

}  // namespace

MetricTree MetricTree::from_metric(std::size_t vertex_count,
                                   std::vector<std::pair<VertexId, VertexId>> edges,
                                   std::vector<double> metric) {
  MetricTree t;
  t.vertex_count_ = vertex_count;
  t.edges_ = std::move(edges);
  t.metric_ = std::move(metric);
  t.validate_and_index();
  return t;
}

MetricTree MetricTree::from_edge_lengths(std::size_t vertex_count,
                                         std::vector<std::pair<VertexId, VertexId>> edges,
                                         const std::vector<double>& lengths) {
  if (lengths.size() != edges.size())
    throw ValidationError("edge_lengths: expected one length per edge, got " +
                          std::to_string(lengths.size()) + " for " +
                          std::to_string(edges.size()) + " edges");
  for (double len : lengths)
    if (!(len > 0.0) || !std::isfinite(len))
      throw ValidationError("edge_lengths: lengths must be finite and positive");

  // Adjacency with weights, then one DFS per source accumulates path lengths.
  std::vector<std::vector<std::pair<VertexId, double>>> adj(vertex_count);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    auto [u, v] = edges[e];
    if (u >= vertex_count || v >= vertex_count)
      throw ValidationError("edge endpoint out of range");
    adj[u].push_back({v, lengths[e]});
    adj[v].push_back({u, lengths[e]});
  }
  const std::size_t n = vertex_count;
  std::vector<double> metric(n * n, 0.0);
  std::vector<VertexId> stack;
  for (VertexId s = 0; s < n; ++s) {
    double* row = metric.data() + std::size_t(s) * n;
    std::vector<char> seen(n, 0);
    stack.assign(1, s);
    seen[s] = 1;
    while (!stack.empty()) {
      VertexId u = stack.back();
      stack.pop_back();
      for (auto [v, len] : adj[u]) {
        if (seen[v]) continue;
        seen[v] = 1;
        row[v] = row[u] + len;
        stack.push_back(v);
      }
    }
  }
  // Accumulation order differs between the two directions of a pair; force
  // exact symmetry by mirroring the upper triangle.
  for (VertexId a = 0; a < n; ++a)
    for (VertexId b = a + 1; b < n; ++b) metric[std::size_t(b) * n + a] = metric[std::size_t(a) * n + b];
  return from_metric(vertex_count, std::move(edges), std::move(metric));
}

void MetricTree::validate_and_index() {
  const std::size_t n = vertex_count_;
  if (n == 0) throw ValidationError("tree must have at least one vertex");
  if (edges_.size() != n - 1)
    throw ValidationError("tree on " + std::to_string(n) + " vertices must have " +
                          std::to_string(n - 1) + " edges, got " + std::to_string(edges_.size()));
  if (metric_.size() != n * n)
    throw ValidationError("metric must be a " + std::to_string(n) + "x" + std::to_string(n) +
                          " matrix");

  adjacency_.assign(n, {});
  for (auto [u, v] : edges_) {
    if (u >= n || v >= n) throw ValidationError("edge endpoint out of range");
    if (u == v) throw ValidationError("self-loop at vertex " + std::to_string(u));
    adjacency_[u].push_back(v);
    adjacency_[v].push_back(u);
  }
  for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());

  // Connectivity (with V-1 edges this also rules out cycles); record the
  // rooted structure used by path().
  parent_.assign(n, 0);
  depth_.assign(n, 0);
  std::vector<char> seen(n, 0);
  std::vector<VertexId> stack{0};
  seen[0] = 1;
  std::size_t reached = 0;
  while (!stack.empty()) {
    VertexId u = stack.back();
    stack.pop_back();
    ++reached;
    for (VertexId v : adjacency_[u]) {
      if (seen[v]) continue;
      seen[v] = 1;
      parent_[v] = u;
      depth_[v] = depth_[u] + 1;
      stack.push_back(v);
    }
  }
  if (reached != n) throw ValidationError("edge list does not connect the tree");

  for (std::size_t i = 0; i < metric_.size(); ++i)
    if (!std::isfinite(metric_[i])) throw ValidationError("metric contains a non-finite entry");
  for (VertexId a = 0; a < n; ++a) {
    if (metric_[std::size_t(a) * n + a] != 0.0)
      throw ValidationError("metric diagonal must be exactly zero at vertex " + std::to_string(a));
    for (VertexId b = a + 1; b < n; ++b) {
      const double dab = metric_[std::size_t(a) * n + b];
      if (dab != metric_[std::size_t(b) * n + a])
        throw ValidationError("metric not symmetric at " + pair_label(a, b));
      if (!(dab > 0.0))
        throw ValidationError("distinct vertices at non-positive distance: " + pair_label(a, b));
    }
  }
  // Triangle inequality with a small slack for serialized data.
  for (VertexId a = 0; a < n; ++a) {
    const double* ra = metric_.data() + std::size_t(a) * n;
    for (VertexId b = 0; b < n; ++b) {
      const double* rb = metric_.data() + std::size_t(b) * n;
      const double dab = ra[b];
      for (VertexId c = 0; c < n; ++c) {
        if (dab > ra[c] + rb[c] + 1e-12)
          throw ValidationError("triangle inequality violated at (" + std::to_string(a) + "," +
                                std::to_string(b) + "," + std::to_string(c) + ")");
      }
    }
  }
}

std::vector<VertexId> MetricTree::path(VertexId x, VertexId y) const {
  if (x >= vertex_count_ || y >= vertex_count_) throw ValidationError("path: vertex out of range");
  std::vector<VertexId> left{x}, right{y};
  VertexId u = x, v = y;
  while (depth_[u] > depth_[v]) {
    u = parent_[u];
    left.push_back(u);
  }
  while (depth_[v] > depth_[u]) {
    v = parent_[v];
    right.push_back(v);
  }
  while (u != v) {
    u = parent_[u];
    left.push_back(u);
    v = parent_[v];
    right.push_back(v);
  }
  // `left` ends at the meeting vertex; append the other half reversed,
  // skipping the duplicate.
  left.insert(left.end(), right.rbegin() + 1, right.rend());
  return left;
}

double MetricTree::arc_diameter(VertexId x, VertexId y) const {
  const auto p = path(x, y);
  double best = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) best = std::max(best, distance(p[i], p[j]));
  return best;
}

std::vector<VertexId> MetricTree::leaves() const {
  std::vector<VertexId> out;
  if (vertex_count_ == 1) return {0};
  for (VertexId v = 0; v < vertex_count_; ++v)
    if (adjacency_[v].size() == 1) out.push_back(v);
  return out;
}

std::vector<double> MetricTree::arc_diameter_metric() const {
  const std::size_t n = vertex_count_;
  std::vector<double> out(n * n, 0.0);
  // Per source s, a DFS maintains the vertex list of the path s..current;
  // d'(s,v) = max(d'(s,parent), max_{u on path} d(u,v)).
  std::vector<VertexId> on_path;
  std::vector<double> dcur(n, 0.0);
  struct Frame {
    VertexId vertex;
    VertexId from;
    std::size_t next_child;
  };
  std::vector<Frame> stack;
  for (VertexId s = 0; s < n; ++s) {
    on_path.clear();
    stack.clear();
    stack.push_back({s, s, 0});
    dcur[s] = 0.0;
    on_path.push_back(s);
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next_child < adjacency_[f.vertex].size()) {
        VertexId c = adjacency_[f.vertex][f.next_child++];
        if (c == f.from) continue;
        double m = 0.0;
        const double* row = metric_.data() + std::size_t(c) * n;
        for (VertexId u : on_path) m = std::max(m, row[u]);
        dcur[c] = std::max(dcur[f.vertex], m);
        on_path.push_back(c);
        stack.push_back({c, f.vertex, 0});
      } else {
        on_path.pop_back();
        stack.pop_back();
      }
    }
    double* row = out.data() + std::size_t(s) * n;
    for (VertexId v = 0; v < n; ++v) row[v] = dcur[v];
  }
  return out;
}

double MetricTree::turning_constant() const {
  if (vertex_count_ < 2) throw ValidationError("turning_constant requires at least two vertices");
  if (turning_cache_ > 0.0) return turning_cache_;
  const std::size_t n = vertex_count_;
  const std::vector<double> deformed = arc_diameter_metric();
  double worst = 1.0;
  for (VertexId a = 0; a < n; ++a)
    for (VertexId b = a + 1; b < n; ++b) {
      const std::size_t k = std::size_t(a) * n + b;
      worst = std::max(worst, deformed[k] / metric_[k]);
    }
  turning_cache_ = worst;
  return worst;
}

MetricTree MetricTree::normalize() const {
  if (vertex_count_ < 2) throw ValidationError("normalize requires at least two vertices");
  std::vector<double> deformed = arc_diameter_metric();
  double dmax = 0.0;
  for (double v : deformed) dmax = std::max(dmax, v);
  for (double& v : deformed) v /= dmax;

  MetricTree out;
  out.vertex_count_ = vertex_count_;
  out.edges_ = edges_;
  out.metric_ = std::move(deformed);
  out.validate_and_index();
  out.normalized_ = true;
  out.turning_cache_ = 1.0;
  return out;
}

VertexId MetricTree::gate(VertexId x, const std::vector<VertexId>& component) const {
  if (component.empty()) throw ValidationError("gate: component is empty");
  if (x >= vertex_count_) throw ValidationError("gate: vertex out of range");
  std::vector<char> member(vertex_count_, 0);
  for (VertexId v : component) {
    if (v >= vertex_count_) throw ValidationError("gate: component vertex out of range");
    member[v] = 1;
  }
  // The set must be connected in the tree for the gate to be well defined.
  std::vector<VertexId> stack{component.front()};
  std::vector<char> seen(vertex_count_, 0);
  seen[component.front()] = 1;
  std::size_t reached = 0;
  while (!stack.empty()) {
    VertexId u = stack.back();
    stack.pop_back();
    ++reached;
    for (VertexId v : adjacency_[u])
      if (member[v] && !seen[v]) {
        seen[v] = 1;
        stack.push_back(v);
      }
  }
  std::size_t distinct = 0;
  for (VertexId v = 0; v < vertex_count_; ++v) distinct += member[v];
  if (reached != distinct) throw ValidationError("gate: component is not connected");

  if (member[x]) return x;
  for (VertexId v : path(x, component.front()))
    if (member[v]) return v;
  throw ValidationError("gate: unreachable component");  // cannot happen in a connected tree
}

int MetricTree::doubling_estimate() const {
  if (vertex_count_ == 1) return 1;
  if (!normalized_) throw ValidationError("doubling_estimate requires a normalized tree");
  const std::size_t n = vertex_count_;
  double min_d = std::numeric_limits<double>::infinity();
  for (VertexId a = 0; a < n; ++a)
    for (VertexId b = a + 1; b < n; ++b) min_d = std::min(min_d, distance(a, b));
  int deepest = 1;
  while (deepest < 30 && std::ldexp(1.0, -deepest) > min_d / 2.0) ++deepest;

  int worst = 1;
  std::vector<VertexId> ball;
  std::vector<char> covered(n, 0);
  for (int level = 1; level <= deepest; ++level) {
    const double r = std::ldexp(1.0, -level);
    for (VertexId center = 0; center < n; ++center) {
      ball.clear();
      for (VertexId v = 0; v < n; ++v)
        if (distance(center, v) <= r) ball.push_back(v);
      for (VertexId v : ball) covered[v] = 0;
      int count = 0;
      for (VertexId u : ball) {  // ascending ids: deterministic greedy
        if (covered[u]) continue;
        ++count;
        for (VertexId w : ball)
          if (!covered[w] && distance(u, w) <= r / 2.0) covered[w] = 1;
      }
      worst = std::max(worst, count);
    }
  }
  return worst;
}

}  // namespace qct
