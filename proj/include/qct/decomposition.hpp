#pragma once

#include <cstdint>
#include <vector>

#include "qct/checks.hpp"
#include "qct/nets.hpp"
#include "qct/tree.hpp"

namespace qct {

/// One piece of the hull decomposition: for level 1 the whole first hull, for
/// level n >= 2 a component of hull(n) \ hull(n-1) together with the unique
/// vertex (the root) through which it attaches to hull(n-1).
struct Piece {
  int level = 0;
  int index = 0;  // 1-based position within its level
  VertexId root = 0;
  std::vector<VertexId> members;         // sorted ascending, includes root
  std::vector<VertexId> new_net_points;  // members that entered the net at this level
};

struct Decomposition {
  std::vector<Piece> pieces;                             // (level, index) order
  std::vector<std::vector<VertexId>> hulls;              // hulls[n-1], sorted
  std::vector<std::vector<std::uint32_t>> level_pieces;  // piece ids per level (may be empty)
  std::vector<std::vector<std::uint32_t>> membership;    // vertex -> piece ids
  std::uint32_t root_piece = 0;                          // always the level-1 piece
  int n_max = 0;
};

/// Splits the tree along the net hierarchy.  Components of a hull difference
/// that share their attachment vertex are merged into one piece; pieces
/// within a level are ordered by smallest member id.
Decomposition decompose(const MetricTree& tree, const NetHierarchy& nets);

struct PieceStats {
  int level = 0;
  int index = 0;
  double diameter = 0.0;       // max pairwise distance over members
  std::size_t leaf_count = 0;  // members that are leaves of the whole tree
  std::size_t arc_count = 0;   // leaves of the piece viewed as a subtree
};

struct DecompositionAudit {
  std::vector<CheckResult> checks;
  std::vector<PieceStats> piece_stats;

  bool all_pass() const { return all_checks_pass(checks); }
  const CheckResult* find(std::string_view name) const { return find_check(checks, name); }
};

/// Re-derives every structural property of the decomposition from scratch:
/// connectivity, unique attachment, disjointness, leaf/net membership, cover,
/// and the per-level diameter bound 2^(2-n).
DecompositionAudit audit_pieces(const MetricTree& tree, const NetHierarchy& nets,
                                const Decomposition& dec);

struct TraversalEntry {
  std::uint32_t piece = 0;
  VertexId entry = 0;          // first path vertex inside the piece
  std::size_t first_pos = 0;   // positions on path(x,y)
  std::size_t last_pos = 0;
};

/// Pieces met by path(x,y) in at least two vertices, ordered by entry
/// position, plus the terminal endpoint.  waypoints() gives the telescoping
/// sequence p_1 = x, ..., p_k, y.
struct Traversal {
  VertexId x = 0, y = 0;
  std::vector<TraversalEntry> entries;
  VertexId terminal = 0;
  std::size_t valley = 0;  // index of the minimum-level entry

  std::vector<VertexId> waypoints() const;
};

Traversal traversal(const MetricTree& tree, const Decomposition& dec, VertexId x, VertexId y);

/// Scale index of a distance: the n >= 0 with 2^-(n+1) <= d <= 2^-n, exact
/// dyadic ties resolved to the larger n.
int scale_index(double d);

/// Max over vertex pairs (x,y) of the number of distinct pieces with level
/// <= scale_index(d(x,y)) meeting path(x,y); clamped to at least 1.
int compute_M(const MetricTree& tree, const Decomposition& dec);

}  // namespace qct
