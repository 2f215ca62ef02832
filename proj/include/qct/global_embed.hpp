#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qct/decomposition.hpp"
#include "qct/local_embed.hpp"
#include "qct/proximity.hpp"
#include "qct/tree.hpp"

namespace qct {

struct GlobalConstants {
  double L = 1.0;  // worst certified local upper bound
  int M = 1;       // piece-count bound along short arcs
  int N = 0;       // separation exponent
  double S = 1.0;  // proximity threshold 2^N
  int A = 0;       // number of colors
  int d = 0;       // local dimension
  double theoretical_lower = 0.0;  // 1/(2 sqrt(2N+M+1)) - L 2^(3-N)
  double theoretical_upper = 0.0;  // L (M + 17)
  bool forced_N = false;
};

/// Scans N = 1, 2, ... for the first value making the lower-bound constant
/// positive, and fills in the derived quantities.
GlobalConstants choose_constants(double L, int M, int A, int d);

/// Same derived quantities but with a caller-imposed N (recorded as forced).
GlobalConstants choose_constants_forced(double L, int M, int A, int d, int N);

/// The assembled map into R^(A*d): per vertex, the sum of the extended local
/// embeddings, each written into the coordinate block of its piece's color.
struct GlobalEmbedding {
  GlobalConstants constants;
  int ambient = 0;
  std::size_t vertex_count = 0;
  std::vector<double> coords;  // vertex_count x ambient, row-major
  VertexId root = 0;           // root of the level-1 piece; maps to the origin

  std::span<const double> point(VertexId v) const {
    return {coords.data() + std::size_t(v) * std::size_t(ambient), std::size_t(ambient)};
  }
};

/// Accumulates every piece's extension in (level, index) order, so block sums
/// are bit-reproducible.  Requires coloring.S == constants.S and uniform
/// local dimension d.
GlobalEmbedding assemble(const MetricTree& tree, const Decomposition& dec,
                         const Coloring& coloring, const std::vector<LocalEmbedding>& locals,
                         const GlobalConstants& constants);

/// Recomputes the coordinates of x summing only pieces traversed by the path
/// from the global root; skipped pieces contribute exact zeros, so the result
/// equals the assembled row bit for bit.
std::vector<double> evaluate_path_sum(const MetricTree& tree, const Decomposition& dec,
                                      const Coloring& coloring,
                                      const std::vector<LocalEmbedding>& locals,
                                      const GlobalEmbedding& emb, VertexId x);

/// Residual norm of f(x) - f(y) against the telescoping sum over traversal
/// waypoints; exact arithmetic would give zero.
double telescoping_check(const MetricTree& tree, const Decomposition& dec,
                         const GlobalEmbedding& emb, VertexId x, VertexId y);

}  // namespace qct
