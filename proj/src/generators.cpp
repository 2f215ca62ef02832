#include "qct/generators.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <utility>
#include <vector>

#include "qct/errors.hpp"
#include "qct/util.hpp"

namespace qct {

MetricTree make_star(int legs, int samples_per_leg) {
  if (legs < 2) throw ValidationError("make_star: needs at least two legs");
  if (samples_per_leg < 1) throw ValidationError("make_star: needs at least one sample per leg");
  const std::size_t n = 1 + std::size_t(legs) * std::size_t(samples_per_leg);
  std::vector<std::pair<VertexId, VertexId>> edges;
  std::vector<double> lengths;
  const double step = 1.0 / samples_per_leg;
  for (int leg = 0; leg < legs; ++leg) {
    VertexId prev = 0;
    for (int s = 0; s < samples_per_leg; ++s) {
      const VertexId id = 1 + VertexId(leg) * VertexId(samples_per_leg) + VertexId(s);
      edges.push_back({prev, id});
      lengths.push_back(step);
      prev = id;
    }
  }
  return MetricTree::from_edge_lengths(n, edges, lengths);
}

MetricTree make_path(std::size_t n) {
  if (n < 2) throw ValidationError("make_path: needs at least two vertices");
  std::vector<std::pair<VertexId, VertexId>> edges;
  std::vector<double> lengths;
  const double step = 1.0 / double(n - 1);
  for (VertexId i = 0; i + 1 < n; ++i) {
    edges.push_back({i, i + 1});
    lengths.push_back(step);
  }
  return MetricTree::from_edge_lengths(n, edges, lengths);
}

MetricTree make_koch_arc(int depth) {
  if (depth < 0 || depth > 8) throw ValidationError("make_koch_arc: depth must be in [0, 8]");
  std::vector<std::complex<double>> pts{{0.0, 0.0}, {1.0, 0.0}};
  const std::complex<double> rot = std::polar(1.0, std::acos(-1.0) / 3.0);  // 60 degrees
  for (int it = 0; it < depth; ++it) {
    std::vector<std::complex<double>> next;
    next.reserve((pts.size() - 1) * 4 + 1);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const auto p = pts[i], q = pts[i + 1];
      const auto a = p + (q - p) / 3.0;
      const auto c = p + (q - p) * (2.0 / 3.0);
      const auto b = a + (c - a) * rot;
      next.push_back(p);
      next.push_back(a);
      next.push_back(b);
      next.push_back(c);
    }
    next.push_back(pts.back());
    pts = std::move(next);
  }
  const std::size_t n = pts.size();
  std::vector<std::pair<VertexId, VertexId>> edges;
  for (VertexId i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  std::vector<double> metric(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::abs(pts[i] - pts[j]);
      metric[i * n + j] = d;
      metric[j * n + i] = d;
    }
  return MetricTree::from_metric(n, edges, metric);
}

MetricTree make_snowflake_path(double alpha, std::size_t n) {
  if (!(alpha >= 0.4 && alpha <= 1.0))
    throw ValidationError("make_snowflake_path: alpha must be in [0.4, 1]");
  if (n < 2) throw ValidationError("make_snowflake_path: needs at least two vertices");
  std::vector<std::pair<VertexId, VertexId>> edges;
  for (VertexId i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  std::vector<double> metric(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::pow(double(j - i) / double(n - 1), alpha);
      metric[i * n + j] = d;
      metric[j * n + i] = d;
    }
  return MetricTree::from_metric(n, edges, metric);
}

MetricTree make_vicsek(int depth) {
  if (depth < 1 || depth > 6) throw ValidationError("make_vicsek: depth must be in [1, 6]");
  std::vector<std::pair<int, int>> cells{{0, 0}};
  constexpr int kOffsets[5][2] = {{1, 0}, {0, 1}, {1, 1}, {2, 1}, {1, 2}};
  for (int it = 0; it < depth; ++it) {
    std::vector<std::pair<int, int>> next;
    next.reserve(cells.size() * 5);
    for (const auto& [x, y] : cells)
      for (const auto& off : kOffsets) next.push_back({3 * x + off[0], 3 * y + off[1]});
    cells = std::move(next);
  }
  std::sort(cells.begin(), cells.end());
  std::vector<std::pair<VertexId, VertexId>> edges;
  std::vector<double> lengths;
  const auto id_of = [&](int x, int y) -> VertexId {
    const auto it = std::lower_bound(cells.begin(), cells.end(), std::pair<int, int>{x, y});
    return VertexId(it - cells.begin());
  };
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto [x, y] = cells[i];
    for (const auto& [dx, dy] : {std::pair<int, int>{1, 0}, std::pair<int, int>{0, 1}}) {
      if (std::binary_search(cells.begin(), cells.end(), std::pair<int, int>{x + dx, y + dy})) {
        edges.push_back({VertexId(i), id_of(x + dx, y + dy)});
        lengths.push_back(1.0);
      }
    }
  }
  // from_edge_lengths rejects anything that is not a connected tree, so a
  // non-tree cell adjacency cannot slip through
  return MetricTree::from_edge_lengths(cells.size(), edges, lengths);
}

MetricTree make_random_tree(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ValidationError("make_random_tree: needs at least two vertices");
  std::vector<std::pair<VertexId, VertexId>> edges;
  std::vector<double> lengths;
  for (VertexId i = 1; i < n; ++i) {
    const VertexId parent = VertexId(splitmix64(seed ^ (2ULL * i)) % i);
    const double len = 0.5 + 0.5 * canonical_double(splitmix64(seed ^ (2ULL * i + 1)));
    edges.push_back({parent, i});
    lengths.push_back(len);
  }
  return MetricTree::from_edge_lengths(n, edges, lengths);
}

MetricTree generate(const GeneratorSpec& spec) {
  MetricTree raw;
  if (spec.kind == "star")
    raw = make_star(spec.legs, spec.samples);
  else if (spec.kind == "path")
    raw = make_path(spec.vertices);
  else if (spec.kind == "koch")
    raw = make_koch_arc(spec.depth);
  else if (spec.kind == "snowflake")
    raw = make_snowflake_path(spec.alpha, spec.vertices);
  else if (spec.kind == "vicsek")
    raw = make_vicsek(spec.depth);
  else if (spec.kind == "random")
    raw = make_random_tree(spec.vertices, spec.seed);
  else
    throw ValidationError("generate: unknown kind '" + spec.kind + "'");
  return raw.normalize();
}

}  // namespace qct
