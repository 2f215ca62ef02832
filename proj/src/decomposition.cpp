#include "qct/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>

#include "qct/errors.hpp"

namespace qct {

namespace {

std::string piece_label(const Piece& p) {
  return "(" + std::to_string(p.level) + "," + std::to_string(p.index) + ")";
}

std::vector<char> flags_of(std::size_t n, const std::vector<VertexId>& vs) {
  std::vector<char> f(n, 0);
  for (VertexId v : vs) f[v] = 1;
  return f;
}

/// Degree of each member within the piece's induced subtree.
std::vector<std::size_t> piece_degrees(const MetricTree& tree, const Piece& piece,
                                       const std::vector<char>& member) {
  std::vector<std::size_t> deg(piece.members.size(), 0);
  for (std::size_t i = 0; i < piece.members.size(); ++i)
    for (VertexId nb : tree.neighbors(piece.members[i]))
      if (member[nb]) ++deg[i];
  return deg;
}

}  // namespace

Decomposition decompose(const MetricTree& tree, const NetHierarchy& nets) {
  if (!tree.normalized()) throw ValidationError("decompose requires a normalized tree");
  if (nets.n_max < 1 || nets.levels.empty())
    throw ValidationError("decompose requires a non-empty net hierarchy");

  const std::size_t n_vertices = tree.vertex_count();
  Decomposition dec;
  dec.n_max = nets.n_max;
  dec.hulls.reserve(std::size_t(nets.n_max));
  for (int n = 1; n <= nets.n_max; ++n) dec.hulls.push_back(hull(tree, nets.level(n)));

  // Level 1: the first hull is a single piece rooted at the smallest net point.
  {
    Piece k11;
    k11.level = 1;
    k11.index = 1;
    k11.members = dec.hulls[0];
    k11.root = nets.level(1).front();
    k11.new_net_points = nets.level(1);
    dec.pieces.push_back(std::move(k11));
    dec.level_pieces.push_back({0});
  }

  std::vector<char> prev_hull = flags_of(n_vertices, dec.hulls[0]);
  for (int n = 2; n <= nets.n_max; ++n) {
    const auto& hull_n = dec.hulls[std::size_t(n) - 1];
    std::vector<char> cur_hull = flags_of(n_vertices, hull_n);

    // Net points new at this level.
    std::vector<VertexId> fresh;
    std::set_difference(nets.level(n).begin(), nets.level(n).end(), nets.level(n - 1).begin(),
                        nets.level(n - 1).end(), std::back_inserter(fresh));

    // Components of hull(n) \ hull(n-1), each attached to hull(n-1) through
    // exactly one vertex; components sharing that vertex form one piece.
    std::vector<char> visited(n_vertices, 0);
    std::map<VertexId, std::vector<VertexId>> by_attachment;  // attachment -> component union
    for (VertexId start : hull_n) {
      if (prev_hull[start] || visited[start]) continue;
      std::vector<VertexId> component;
      std::vector<VertexId> stack{start};
      visited[start] = 1;
      VertexId attachment = n_vertices;  // sentinel
      bool multiple_attachments = false;
      while (!stack.empty()) {
        VertexId u = stack.back();
        stack.pop_back();
        component.push_back(u);
        for (VertexId v : tree.neighbors(u)) {
          if (!cur_hull[v]) continue;
          if (prev_hull[v]) {
            if (attachment == n_vertices)
              attachment = v;
            else if (attachment != v)
              multiple_attachments = true;
          } else if (!visited[v]) {
            visited[v] = 1;
            stack.push_back(v);
          }
        }
      }
      if (attachment == n_vertices)
        throw ValidationError("decompose: hull component at level " + std::to_string(n) +
                              " is detached from the previous hull");
      if (multiple_attachments)
        throw ValidationError("decompose: hull component at level " + std::to_string(n) +
                              " attaches at more than one vertex");
      auto& bucket = by_attachment[attachment];
      bucket.insert(bucket.end(), component.begin(), component.end());
    }

    std::vector<Piece> level;
    for (auto& [attachment, verts] : by_attachment) {
      Piece p;
      p.level = n;
      p.root = attachment;
      verts.push_back(attachment);
      std::sort(verts.begin(), verts.end());
      p.members = std::move(verts);
      std::set_intersection(p.members.begin(), p.members.end(), fresh.begin(), fresh.end(),
                            std::back_inserter(p.new_net_points));
      level.push_back(std::move(p));
    }
    std::sort(level.begin(), level.end(),
              [](const Piece& a, const Piece& b) { return a.members.front() < b.members.front(); });

    std::vector<std::uint32_t> ids;
    for (std::size_t j = 0; j < level.size(); ++j) {
      level[j].index = int(j) + 1;
      ids.push_back(std::uint32_t(dec.pieces.size()));
      dec.pieces.push_back(std::move(level[j]));
    }
    dec.level_pieces.push_back(std::move(ids));  // may be empty: J_n can vanish
    prev_hull = std::move(cur_hull);
  }

  dec.membership.assign(n_vertices, {});
  for (std::uint32_t p = 0; p < dec.pieces.size(); ++p)
    for (VertexId v : dec.pieces[p].members) dec.membership[v].push_back(p);
  dec.root_piece = 0;
  return dec;
}

DecompositionAudit audit_pieces(const MetricTree& tree, const NetHierarchy& nets,
                                const Decomposition& dec) {
  const std::size_t n_vertices = tree.vertex_count();
  DecompositionAudit audit;
  auto& checks = audit.checks;
  checks.resize(7);
  checks[0].name = "piece_connected_rooted";   // connected subtree containing its root
  checks[1].name = "piece_unique_attachment";  // previous-hull contact is exactly the root
  checks[2].name = "piece_disjointness";  // same-level disjoint, cross-level overlap <= 1 vertex
  checks[3].name = "piece_leaf_coverage";  // piece leaves lie in prev hull or the new net points
  checks[4].name = "piece_cover";          // pieces cover every vertex
  checks[5].name = "piece_diameter_bound";  // diam <= 2^(2-n)
  checks[6].name = "hulls_match_nets";      // stored hulls equal recomputed hulls

  for (int n = 1; n <= dec.n_max && std::size_t(n) <= dec.hulls.size(); ++n) {
    if (hull(tree, nets.level(n)) != dec.hulls[std::size_t(n) - 1])
      checks[6].fail("hull at level " + std::to_string(n));
  }

  std::vector<std::vector<char>> hull_flags;
  for (const auto& h : dec.hulls) hull_flags.push_back(flags_of(n_vertices, h));
  const std::vector<char> tree_leaf = flags_of(n_vertices, tree.leaves());

  std::vector<std::uint32_t> cover_count(n_vertices, 0);
  for (const Piece& piece : dec.pieces) {
    const std::string label = piece_label(piece);

    // Structural sanity first, so a mutated decomposition fails cleanly
    // instead of faulting the deeper checks.
    bool shaped = !piece.members.empty() && piece.level >= 1 && piece.level <= dec.n_max &&
                  std::size_t(piece.level) <= dec.hulls.size();
    for (std::size_t i = 0; shaped && i < piece.members.size(); ++i) {
      if (piece.members[i] >= n_vertices || (i > 0 && piece.members[i] <= piece.members[i - 1]))
        shaped = false;
    }
    if (!shaped) {
      checks[0].fail(label + " malformed");
      continue;
    }
    const std::vector<char> member = flags_of(n_vertices, piece.members);

    // Connected subtree containing the root.
    bool root_in = std::binary_search(piece.members.begin(), piece.members.end(), piece.root);
    std::size_t reached = 0;
    if (root_in) {
      std::vector<char> seen(n_vertices, 0);
      std::vector<VertexId> stack{piece.root};
      seen[piece.root] = 1;
      while (!stack.empty()) {
        VertexId u = stack.back();
        stack.pop_back();
        ++reached;
        for (VertexId v : tree.neighbors(u))
          if (member[v] && !seen[v]) {
            seen[v] = 1;
            stack.push_back(v);
          }
      }
    }
    if (!root_in || reached != piece.members.size()) checks[0].fail(label);

    // For n >= 2 the members meet the previous hull exactly at the root.
    if (piece.level >= 2) {
      const auto& prev = hull_flags[std::size_t(piece.level) - 2];
      std::size_t contact = 0;
      bool root_is_contact = false;
      for (VertexId v : piece.members)
        if (prev[v]) {
          ++contact;
          root_is_contact |= (v == piece.root);
        }
      if (contact != 1 || !root_is_contact) checks[1].fail(label);
    }

    // Piece-subtree leaves other than vertices of the previous hull must be
    // net points new at this level; at least one such point exists.
    {
      const auto deg = piece_degrees(tree, piece, member);
      std::vector<VertexId> fresh;
      if (piece.level == 1) {
        fresh = nets.level(1);
      } else {
        std::set_difference(nets.level(piece.level).begin(), nets.level(piece.level).end(),
                            nets.level(piece.level - 1).begin(), nets.level(piece.level - 1).end(),
                            std::back_inserter(fresh));
      }
      for (std::size_t i = 0; i < piece.members.size(); ++i) {
        if (deg[i] > 1 || piece.members.size() == 1) continue;
        const VertexId v = piece.members[i];
        const bool in_prev = piece.level >= 2 && hull_flags[std::size_t(piece.level) - 2][v];
        const bool is_fresh = std::binary_search(fresh.begin(), fresh.end(), v);
        if (!in_prev && !is_fresh)
          checks[3].fail(label + " leaf " + std::to_string(v));
      }
      std::vector<VertexId> expected;
      std::set_intersection(piece.members.begin(), piece.members.end(), fresh.begin(),
                            fresh.end(), std::back_inserter(expected));
      if (expected.empty() || expected != piece.new_net_points)
        checks[3].fail(label + " net points");
    }

    for (VertexId v : piece.members) ++cover_count[v];

    // Diameter bound, plus the reported stats.
    PieceStats stats;
    stats.level = piece.level;
    stats.index = piece.index;
    for (std::size_t i = 0; i < piece.members.size(); ++i)
      for (std::size_t j = i + 1; j < piece.members.size(); ++j)
        stats.diameter =
            std::max(stats.diameter, tree.distance(piece.members[i], piece.members[j]));
    if (stats.diameter > std::ldexp(1.0, 2 - piece.level)) checks[5].fail(label);
    const auto deg = piece_degrees(tree, piece, member);
    for (std::size_t i = 0; i < piece.members.size(); ++i) {
      if (tree_leaf[piece.members[i]]) ++stats.leaf_count;
      if (deg[i] <= 1) ++stats.arc_count;  // subtree leaves (a singleton counts once)
    }
    audit.piece_stats.push_back(stats);
  }

  // Overlap rules, via joint membership of each vertex.
  {
    std::vector<std::vector<std::uint32_t>> membership(n_vertices);
    for (std::uint32_t p = 0; p < dec.pieces.size(); ++p)
      for (VertexId v : dec.pieces[p].members)
        if (v < n_vertices) membership[v].push_back(p);
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> shared;
    for (VertexId v = 0; v < n_vertices; ++v)
      for (std::size_t a = 0; a < membership[v].size(); ++a)
        for (std::size_t b = a + 1; b < membership[v].size(); ++b)
          ++shared[{membership[v][a], membership[v][b]}];
    for (const auto& [key, count] : shared) {
      const Piece& pa = dec.pieces[key.first];
      const Piece& pb = dec.pieces[key.second];
      if (pa.level == pb.level)
        checks[2].fail(piece_label(pa) + " overlaps " + piece_label(pb));
      else if (count > 1)
        checks[2].fail(piece_label(pa) + " meets " + piece_label(pb) + " in " +
                       std::to_string(count) + " vertices");
    }
    // A leaf of the whole tree belongs to exactly one piece.
    for (VertexId v = 0; v < n_vertices; ++v)
      if (tree_leaf[v] && membership[v].size() != 1)
        checks[2].fail("tree leaf " + std::to_string(v) + " lies in " +
                       std::to_string(membership[v].size()) + " pieces");
  }

  // Cover.
  for (VertexId v = 0; v < n_vertices; ++v)
    if (cover_count[v] == 0) checks[4].fail("vertex " + std::to_string(v));

  return audit;
}

std::vector<VertexId> Traversal::waypoints() const {
  std::vector<VertexId> out;
  out.reserve(entries.size() + 1);
  for (const auto& e : entries) out.push_back(e.entry);
  out.push_back(terminal);
  return out;
}

Traversal traversal(const MetricTree& tree, const Decomposition& dec, VertexId x, VertexId y) {
  if (x == y) throw ValidationError("traversal requires distinct endpoints");
  const auto p = tree.path(x, y);

  // Gather per-piece first/last positions along the path.
  std::unordered_map<std::uint32_t, TraversalEntry> hits;
  for (std::size_t pos = 0; pos < p.size(); ++pos) {
    for (std::uint32_t piece : dec.membership[p[pos]]) {
      auto [it, fresh] = hits.try_emplace(piece);
      if (fresh) {
        it->second.piece = piece;
        it->second.first_pos = pos;
      }
      it->second.last_pos = pos;
    }
  }

  Traversal t;
  t.x = x;
  t.y = y;
  t.terminal = y;
  for (const auto& [piece, entry] : hits)
    if (entry.last_pos > entry.first_pos) t.entries.push_back(entry);  // two or more vertices
  std::sort(t.entries.begin(), t.entries.end(),
            [](const TraversalEntry& a, const TraversalEntry& b) {
              return a.first_pos < b.first_pos;
            });
  for (auto& e : t.entries) e.entry = p[e.first_pos];

  t.valley = 0;
  for (std::size_t i = 1; i < t.entries.size(); ++i)
    if (dec.pieces[t.entries[i].piece].level < dec.pieces[t.entries[t.valley].piece].level)
      t.valley = i;
  return t;
}

int scale_index(double d) {
  if (!(d > 0.0)) throw ValidationError("scale_index requires a positive distance");
  int n = int(std::floor(-std::log2(d)));
  while (d > std::ldexp(1.0, -n)) --n;        // ensure d <= 2^-n
  while (d <= std::ldexp(1.0, -n - 1)) ++n;   // tighten; exact ties go to the larger n
  return std::max(n, 0);
}

int compute_M(const MetricTree& tree, const Decomposition& dec) {
  const std::size_t n_vertices = tree.vertex_count();
  int best = 0;
  std::vector<std::uint32_t> stamp(dec.pieces.size(), 0);
  std::uint32_t epoch = 0;
  for (VertexId x = 0; x < n_vertices; ++x) {
    for (VertexId y = x + 1; y < n_vertices; ++y) {
      const int n = scale_index(tree.distance(x, y));
      if (n < 1) continue;  // no pieces have level <= 0
      ++epoch;
      int count = 0;
      for (VertexId v : tree.path(x, y))
        for (std::uint32_t piece : dec.membership[v])
          if (dec.pieces[piece].level <= n && stamp[piece] != epoch) {
            stamp[piece] = epoch;
            ++count;
          }
      best = std::max(best, count);
    }
  }
  return std::max(best, 1);
}

}  // namespace qct
