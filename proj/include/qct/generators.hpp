#pragma once

#include <cstdint>
#include <string>

#include "qct/tree.hpp"

namespace qct {

/// Geodesic star: `legs` paths of `samples_per_leg` vertices each radiating
/// from vertex 0, every leg of total length one.
MetricTree make_star(int legs, int samples_per_leg);

/// Geodesic path on n vertices with uniform edge lengths summing to one.
MetricTree make_path(std::size_t n);

/// Koch arc: polyline vertices of the middle-third construction after `depth`
/// substitutions (4^depth + 1 vertices), a path graph carrying the planar
/// Euclidean metric.
MetricTree make_koch_arc(int depth);

/// Unit-interval path with the snowflaked metric |t_i - t_j|^alpha,
/// alpha in [0.4, 1].
MetricTree make_snowflake_path(double alpha, std::size_t n);

/// Plus-shaped fractal of the given depth: the adjacency graph of the 5^depth
/// filled cells of the 3^depth grid, which is a tree, with unit edges.
MetricTree make_vicsek(int depth);

/// Random recursive tree: vertex i attaches to a seeded uniform parent among
/// 0..i-1 with edge length in [1/2, 1]; identical on every platform.
MetricTree make_random_tree(std::size_t n, std::uint64_t seed);

struct GeneratorSpec {
  std::string kind;  // star | path | koch | snowflake | vicsek | random
  int legs = 3;
  int samples = 5;
  std::size_t vertices = 65;
  int depth = 3;
  double alpha = 0.5;
  std::uint64_t seed = 0;
};

/// Builds the named tree and normalizes it.
MetricTree generate(const GeneratorSpec& spec);

}  // namespace qct
