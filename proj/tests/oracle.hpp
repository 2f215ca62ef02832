#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "qct/decomposition.hpp"
#include "qct/nets.hpp"
#include "qct/tree.hpp"

/// Independent reference implementations of the structural layer, built from
/// the same definitions but with deliberately different algorithms and data
/// structures (frexp instead of ldexp adjustment loops, all-pairs hulls
/// instead of basepoint hulls, BFS paths instead of rooted walks, union-find
/// components instead of stack floods).  Tests compare library output against
/// these field for field.
namespace oracle {

inline int scale_index(double d) {
  if (!(d > 0.0)) throw std::invalid_argument("oracle::scale_index: d must be positive");
  int e = 0;
  const double m = std::frexp(d, &e);  // d = m * 2^e, m in [0.5, 1)
  const int n = (m == 0.5) ? 1 - e : -e;
  return std::max(n, 0);
}

/// BFS path from x to y, endpoints inclusive.
inline std::vector<qct::VertexId> path(const qct::MetricTree& t, qct::VertexId x,
                                       qct::VertexId y) {
  const std::size_t n = t.vertex_count();
  std::vector<qct::VertexId> parent(n, qct::VertexId(n));
  std::vector<qct::VertexId> queue{x};
  parent[x] = x;
  for (std::size_t head = 0; head < queue.size() && parent[y] == n; ++head)
    for (qct::VertexId nb : t.neighbors(queue[head]))
      if (parent[nb] == n) {
        parent[nb] = queue[head];
        queue.push_back(nb);
      }
  std::vector<qct::VertexId> rev{y};
  while (rev.back() != x) rev.push_back(parent[rev.back()]);
  return {rev.rbegin(), rev.rend()};
}

inline double arc_diameter(const qct::MetricTree& t, qct::VertexId x, qct::VertexId y) {
  const auto p = path(t, x, y);
  double best = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      best = std::max(best, t.distance(p[i], p[j]));
  return best;
}

/// Greedy farthest-point leaf nets, recomputing every min-distance from
/// scratch each round and breaking ties by explicit min-id scan.
inline std::vector<std::vector<qct::VertexId>> nets(const qct::MetricTree& t) {
  const std::vector<qct::VertexId> lvs = t.leaves();
  std::set<qct::VertexId> net{lvs.front()};
  std::vector<std::vector<qct::VertexId>> levels;
  for (int n = 1;; ++n) {
    const double eps = std::pow(2.0, -n);
    for (;;) {
      double best_d = -1.0;
      qct::VertexId best = lvs.front();
      for (qct::VertexId leaf : lvs) {
        if (net.count(leaf)) continue;
        double md = std::numeric_limits<double>::infinity();
        for (qct::VertexId q : net) md = std::min(md, t.distance(leaf, q));
        if (md > best_d) {
          best_d = md;
          best = leaf;
        }
      }
      if (best_d < eps) break;  // also covers "no leaf left" (best_d stays -1)
      net.insert(best);
    }
    levels.emplace_back(net.begin(), net.end());
    if (net.size() == lvs.size()) break;
  }
  return levels;
}

/// Hull as the union of BFS paths over all point pairs.
inline std::vector<qct::VertexId> hull(const qct::MetricTree& t,
                                       const std::vector<qct::VertexId>& pts) {
  std::set<qct::VertexId> in;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i; j < pts.size(); ++j)
      for (qct::VertexId v : path(t, pts[i], pts[j])) in.insert(v);
  return {in.begin(), in.end()};
}

struct Piece {
  int level = 0;
  int index = 0;
  qct::VertexId root = 0;
  std::vector<qct::VertexId> members;
  std::vector<qct::VertexId> new_net_points;
};

/// Hull-difference pieces via union-find over the difference vertices, with
/// components merged by their unique attachment to the previous hull.
inline std::vector<Piece> pieces(const qct::MetricTree& t,
                                 const std::vector<std::vector<qct::VertexId>>& levels) {
  const std::size_t n_vertices = t.vertex_count();
  std::vector<Piece> out;

  {
    Piece first;
    first.level = 1;
    first.index = 1;
    first.members = oracle::hull(t, levels.at(0));
    first.root = *std::min_element(levels[0].begin(), levels[0].end());
    std::set_intersection(first.members.begin(), first.members.end(), levels[0].begin(),
                          levels[0].end(), std::back_inserter(first.new_net_points));
    out.push_back(std::move(first));
  }

  for (std::size_t n = 2; n <= levels.size(); ++n) {
    const auto prev = oracle::hull(t, levels[n - 2]);
    const auto cur = oracle::hull(t, levels[n - 1]);
    std::vector<char> in_prev(n_vertices, 0), in_cur(n_vertices, 0);
    for (qct::VertexId v : prev) in_prev[v] = 1;
    for (qct::VertexId v : cur) in_cur[v] = 1;

    std::vector<qct::VertexId> uf(n_vertices);
    for (std::size_t v = 0; v < n_vertices; ++v) uf[v] = qct::VertexId(v);
    const auto find = [&](qct::VertexId v) {
      while (uf[v] != v) v = uf[v] = uf[uf[v]];
      return v;
    };
    for (const auto& [a, b] : t.edges())
      if (in_cur[a] && in_cur[b] && !in_prev[a] && !in_prev[b]) uf[find(a)] = find(b);

    std::map<qct::VertexId, std::set<qct::VertexId>> groups;  // component rep -> vertices
    for (qct::VertexId v = 0; v < n_vertices; ++v)
      if (in_cur[v] && !in_prev[v]) groups[find(v)].insert(v);

    std::map<qct::VertexId, std::set<qct::VertexId>> by_attachment;
    for (auto& [rep, comp] : groups) {
      std::set<qct::VertexId> contacts;
      for (qct::VertexId v : comp)
        for (qct::VertexId nb : t.neighbors(v))
          if (in_prev[nb]) contacts.insert(nb);
      if (contacts.size() != 1)
        throw std::logic_error("oracle::pieces: component with " +
                               std::to_string(contacts.size()) + " attachments");
      auto& bucket = by_attachment[*contacts.begin()];
      bucket.insert(comp.begin(), comp.end());
      bucket.insert(*contacts.begin());
    }

    std::vector<qct::VertexId> fresh;
    std::set_difference(levels[n - 1].begin(), levels[n - 1].end(), levels[n - 2].begin(),
                        levels[n - 2].end(), std::back_inserter(fresh));
    std::vector<Piece> level_out;
    for (auto& [attachment, verts] : by_attachment) {
      Piece p;
      p.level = int(n);
      p.root = attachment;
      p.members.assign(verts.begin(), verts.end());
      std::set_intersection(p.members.begin(), p.members.end(), fresh.begin(), fresh.end(),
                            std::back_inserter(p.new_net_points));
      level_out.push_back(std::move(p));
    }
    std::sort(level_out.begin(), level_out.end(),
              [](const Piece& a, const Piece& b) { return a.members.front() < b.members.front(); });
    for (std::size_t j = 0; j < level_out.size(); ++j) {
      level_out[j].index = int(j) + 1;
      out.push_back(std::move(level_out[j]));
    }
  }
  return out;
}

/// Max over pairs of distinct pieces at level <= scale_index(d) touching the
/// path; pairs coarser than every level are skipped; clamped to >= 1.
inline int piece_count_bound(const qct::MetricTree& t, const std::vector<Piece>& pcs) {
  const std::size_t n_vertices = t.vertex_count();
  int best = 0;
  for (qct::VertexId x = 0; x < n_vertices; ++x)
    for (qct::VertexId y = x + 1; y < n_vertices; ++y) {
      const int n = scale_index(t.distance(x, y));
      if (n < 1) continue;
      const auto p = path(t, x, y);
      const std::set<qct::VertexId> on_path(p.begin(), p.end());
      int count = 0;
      for (const Piece& piece : pcs) {
        if (piece.level > n) continue;
        for (qct::VertexId v : piece.members)
          if (on_path.count(v)) {
            ++count;
            break;
          }
      }
      best = std::max(best, count);
    }
  return std::max(best, 1);
}

struct Step {
  std::size_t piece = 0;
  qct::VertexId entry = 0;
  std::size_t first_pos = 0;
  std::size_t last_pos = 0;
};

struct Walk {
  std::vector<Step> steps;
  qct::VertexId terminal = 0;
  std::size_t valley = 0;
};

/// Pieces meeting the BFS path in two or more vertices, ordered by first
/// contact; valley = first index of minimal level.
inline Walk walk(const qct::MetricTree& t, const std::vector<Piece>& pcs, qct::VertexId x,
                 qct::VertexId y) {
  const auto p = path(t, x, y);
  std::map<qct::VertexId, std::size_t> pos;
  for (std::size_t i = 0; i < p.size(); ++i) pos[p[i]] = i;

  Walk w;
  w.terminal = y;
  for (std::size_t id = 0; id < pcs.size(); ++id) {
    std::vector<std::size_t> hits;
    for (qct::VertexId v : pcs[id].members) {
      auto it = pos.find(v);
      if (it != pos.end()) hits.push_back(it->second);
    }
    if (hits.size() < 2) continue;
    Step s;
    s.piece = id;
    s.first_pos = *std::min_element(hits.begin(), hits.end());
    s.last_pos = *std::max_element(hits.begin(), hits.end());
    s.entry = p[s.first_pos];
    w.steps.push_back(s);
  }
  std::sort(w.steps.begin(), w.steps.end(),
            [](const Step& a, const Step& b) { return a.first_pos < b.first_pos; });
  w.valley = 0;
  for (std::size_t i = 1; i < w.steps.size(); ++i)
    if (pcs[w.steps[i].piece].level < pcs[w.steps[w.valley].piece].level) w.valley = i;
  return w;
}

/// Full structural comparison used for small trees: recomputes nets, hulls,
/// pieces, the piece-count constant, and every pairwise walk, and lists each
/// field that disagrees with the library artifacts.  Empty result = match.
inline std::vector<std::string> compare_all(const qct::MetricTree& t,
                                            const qct::NetHierarchy& lib_nets,
                                            const qct::Decomposition& lib_dec, int lib_m) {
  std::vector<std::string> bad;
  const auto levels = nets(t);

  if (int(levels.size()) != lib_nets.n_max || lib_nets.levels.size() != levels.size())
    bad.push_back("net level count: oracle " + std::to_string(levels.size()) + " vs library " +
                  std::to_string(lib_nets.levels.size()));
  for (std::size_t n = 0; n < std::min(levels.size(), lib_nets.levels.size()); ++n)
    if (levels[n] != lib_nets.levels[n])
      bad.push_back("net level " + std::to_string(n + 1) + " differs");

  for (std::size_t n = 0; n < std::min(levels.size(), lib_dec.hulls.size()); ++n)
    if (oracle::hull(t, levels[n]) != lib_dec.hulls[n])
      bad.push_back("hull " + std::to_string(n + 1) + " differs");

  const auto pcs = pieces(t, levels);
  if (pcs.size() != lib_dec.pieces.size()) {
    bad.push_back("piece count: oracle " + std::to_string(pcs.size()) + " vs library " +
                  std::to_string(lib_dec.pieces.size()));
    return bad;  // per-piece and walk comparisons would misalign
  }
  for (std::size_t i = 0; i < pcs.size(); ++i) {
    const auto& a = pcs[i];
    const auto& b = lib_dec.pieces[i];
    const std::string label = "piece " + std::to_string(i);
    if (a.level != b.level || a.index != b.index) bad.push_back(label + " level/index");
    if (a.root != b.root) bad.push_back(label + " root");
    if (a.members != b.members) bad.push_back(label + " members");
    if (a.new_net_points != b.new_net_points) bad.push_back(label + " new net points");
  }

  if (piece_count_bound(t, pcs) != lib_m)
    bad.push_back("piece count constant: oracle " + std::to_string(piece_count_bound(t, pcs)) +
                  " vs library " + std::to_string(lib_m));

  for (qct::VertexId x = 0; x < t.vertex_count() && bad.size() < 32; ++x)
    for (qct::VertexId y = x + 1; y < t.vertex_count(); ++y) {
      const Walk w = walk(t, pcs, x, y);
      const qct::Traversal trav = qct::traversal(t, lib_dec, x, y);
      const std::string label =
          "walk (" + std::to_string(x) + "," + std::to_string(y) + ")";
      if (w.steps.size() != trav.entries.size()) {
        bad.push_back(label + " length");
        continue;
      }
      for (std::size_t i = 0; i < w.steps.size(); ++i) {
        const auto& s = w.steps[i];
        const auto& e = trav.entries[i];
        if (s.piece != e.piece || s.entry != e.entry || s.first_pos != e.first_pos ||
            s.last_pos != e.last_pos)
          bad.push_back(label + " step " + std::to_string(i));
      }
      if (w.terminal != trav.terminal || w.valley != trav.valley)
        bad.push_back(label + " terminal/valley");
    }
  return bad;
}

}  // namespace oracle
