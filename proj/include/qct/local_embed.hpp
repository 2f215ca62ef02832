#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "qct/decomposition.hpp"
#include "qct/tree.hpp"

namespace qct {

struct LocalEmbedConfig {
  int dim = 3;
  int max_iterations = 2000;
  double L_cap = 64.0;
  enum class Strategy { StressCertify, GeodesicAxes };
  Strategy strategy = Strategy::StressCertify;
  std::uint64_t seed = 0;
};

/// Certified placement of one piece in R^dim with the root at the origin:
/// for all member pairs, certified_lower * d(u,v) <= |x_u - x_v| <=
/// certified_upper * d(u,v), with certified_lower held at 1 by rescaling.
struct LocalEmbedding {
  int level = 0;
  int index = 0;
  int dim = 0;
  std::vector<VertexId> members;  // sorted, mirrors the piece
  std::vector<double> coords;     // members.size() x dim, row-major
  double certified_lower = 1.0;
  double certified_upper = 1.0;

  std::span<const double> point(std::size_t member_idx) const {
    return {coords.data() + member_idx * std::size_t(dim), std::size_t(dim)};
  }
  std::size_t member_index(VertexId v) const;  // throws if v is not a member
  bool contains(VertexId v) const;
};

/// Exhaustively measures (min_ratio, max_ratio) of |x_u - x_v| / d(u,v) over
/// all member pairs.
std::pair<double, double> certify(const LocalEmbedding& emb, const MetricTree& tree);

/// Embeds one piece.  StressCertify seeds with classical MDS and then runs a
/// deterministic max-ratio descent; GeodesicAxes lays root-to-leaf branches
/// isometrically along separate axes (additive metrics only).  Either way the
/// output is rescaled so the certified lower bound is 1, and retried in one
/// higher dimension (up to 8) whenever the certified upper bound exceeds
/// L_cap.
LocalEmbedding embed_piece(const MetricTree& tree, const Piece& piece,
                           const LocalEmbedConfig& config);

/// Extension to the whole tree: the value at x is the piece value at the gate
/// of x, so it agrees with the embedding on members and is constant on each
/// complementary component.
std::vector<double> extend_value(const MetricTree& tree, const Piece& piece,
                                 const LocalEmbedding& emb, VertexId x);

/// Gate of every vertex with respect to the piece (bulk version of the above,
/// one BFS over the tree).
std::vector<VertexId> piece_gates(const MetricTree& tree, const Piece& piece);

/// Appends zero coordinates so the embedding lives in `new_dim` dimensions;
/// distances and certificates are unchanged.
void pad_dimension(LocalEmbedding& emb, int new_dim);

}  // namespace qct
