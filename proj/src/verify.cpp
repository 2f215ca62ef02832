#include "qct/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>

#include "qct/errors.hpp"
#include "qct/util.hpp"

namespace qct {
namespace {

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, args...);
  return std::string(buf);
}

void merge_check(CheckResult& into, const CheckResult& from) {
  into.pass = into.pass && from.pass;
  into.violation_count += from.violation_count;
  for (const auto& w : from.witnesses) {
    if (into.witnesses.size() >= CheckResult::kMaxWitnesses) break;
    into.witnesses.push_back(w);
  }
}

/// k-th pair of the seeded sample, uniform over unordered pairs' endpoints.
std::pair<VertexId, VertexId> sample_pair(std::uint64_t seed, std::uint64_t k, std::uint32_t v) {
  const std::uint64_t h = splitmix64(seed ^ (0x517cc1b727220a95ULL * (k + 1)));
  std::uint32_t x = static_cast<std::uint32_t>(h % v);
  std::uint32_t y = static_cast<std::uint32_t>((h >> 32) % (v - 1));
  if (y >= x) ++y;
  if (x > y) std::swap(x, y);
  return {x, y};
}

double diff_norm(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return std::sqrt(s);
}

/// Folds over a deterministic pair set: all x < y when exhaustive, a seeded
/// sample otherwise.  Chunk merge order is ascending, so order-insensitive
/// reductions are independent of the thread count.
template <class State, class PerPair, class Merge>
State pair_fold(std::size_t v, bool exhaustive, std::uint64_t samples, std::uint64_t seed,
                int threads, State init, PerPair per_pair, Merge merge) {
  if (v < 2) return init;
  if (exhaustive) {
    return parallel_fold(
        static_cast<std::uint64_t>(v), threads, std::move(init),
        [&](State& s, std::uint64_t xi) {
          for (VertexId y = static_cast<VertexId>(xi) + 1; y < v; ++y)
            per_pair(s, static_cast<VertexId>(xi), y);
        },
        merge);
  }
  return parallel_fold(
      samples, threads, std::move(init),
      [&](State& s, std::uint64_t k) {
        const auto [x, y] = sample_pair(seed, k, static_cast<std::uint32_t>(v));
        per_pair(s, x, y);
      },
      merge);
}

struct BandIndices {
  std::size_t lo = 0, hi = 0;
  bool empty = false;
};

/// First/last entry whose piece level is <= cutoff; collapses to the valley
/// when no entry qualifies.
BandIndices level_band(const Traversal& trav, const Decomposition& dec, int cutoff) {
  BandIndices band;
  bool found = false;
  for (std::size_t i = 0; i < trav.entries.size(); ++i) {
    if (dec.pieces[trav.entries[i].piece].level <= cutoff) {
      if (!found) band.lo = i;
      band.hi = i;
      found = true;
    }
  }
  if (!found) {
    band.lo = band.hi = trav.valley;
    band.empty = true;
  }
  return band;
}

struct Increments {
  std::vector<VertexId> wp;   // waypoints x = p_1, ..., p_k, y
  std::vector<double> diffs;  // k x ambient, f(wp[i]) - f(wp[i+1])
  std::vector<double> norms;
  std::vector<double> seg_d;  // d(wp[i], wp[i+1])
};

Increments compute_increments(const MetricTree& tree, const GlobalEmbedding& emb,
                              const Traversal& trav) {
  Increments inc;
  inc.wp = trav.waypoints();
  const std::size_t k = inc.wp.size() - 1;
  const std::size_t amb = static_cast<std::size_t>(emb.ambient);
  inc.diffs.resize(k * amb);
  inc.norms.resize(k);
  inc.seg_d.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto a = emb.point(inc.wp[i]);
    const auto b = emb.point(inc.wp[i + 1]);
    double s = 0.0;
    for (std::size_t j = 0; j < amb; ++j) {
      const double t = a[j] - b[j];
      inc.diffs[i * amb + j] = t;
      s += t * t;
    }
    inc.norms[i] = std::sqrt(s);
    inc.seg_d[i] = tree.distance(inc.wp[i], inc.wp[i + 1]);
  }
  return inc;
}

}  // namespace

DistortionReport measure_distortion(const MetricTree& tree, const GlobalEmbedding& emb,
                                    const DistortionOptions& options) {
  const std::size_t v = tree.vertex_count();
  DistortionReport rep;
  rep.theoretical_lower = emb.constants.theoretical_lower;
  rep.theoretical_upper = emb.constants.theoretical_upper;
  if (v < 2) {
    rep.a_measured = rep.b_measured = rep.distortion = 1.0;
    rep.pass_lower = rep.pass_upper = true;
    return rep;
  }
  rep.exhaustive = v <= options.exhaustive_threshold;
  rep.pair_count = rep.exhaustive ? static_cast<std::uint64_t>(v) * (v - 1) / 2
                                  : options.sample_pairs;

  struct MinMax {
    double a = std::numeric_limits<double>::infinity();
    double b = -std::numeric_limits<double>::infinity();
    VertexId ax = 0, ay = 0, bx = 0, by = 0;
  };
  const auto ratio = [&](VertexId x, VertexId y) {
    return diff_norm(emb.point(x), emb.point(y)) / tree.distance(x, y);
  };
  const MinMax mm = pair_fold(
      v, rep.exhaustive, options.sample_pairs, options.seed, options.threads, MinMax{},
      [&](MinMax& s, VertexId x, VertexId y) {
        const double r = ratio(x, y);
        if (r < s.a) {
          s.a = r;
          s.ax = x;
          s.ay = y;
        }
        if (r > s.b) {
          s.b = r;
          s.bx = x;
          s.by = y;
        }
      },
      [](MinMax& s, const MinMax& o) {
        if (o.a < s.a) {
          s.a = o.a;
          s.ax = o.ax;
          s.ay = o.ay;
        }
        if (o.b > s.b) {
          s.b = o.b;
          s.bx = o.bx;
          s.by = o.by;
        }
      });
  rep.a_measured = mm.a;
  rep.b_measured = mm.b;
  rep.distortion = mm.b / mm.a;
  rep.argmin_x = mm.ax;
  rep.argmin_y = mm.ay;
  rep.argmax_x = mm.bx;
  rep.argmax_y = mm.by;
  rep.pass_lower = geq_slack(rep.a_measured, rep.theoretical_lower);
  rep.pass_upper = leq_slack(rep.b_measured, rep.theoretical_upper);

  rep.hist_lo = std::log10(mm.a);
  rep.hist_hi = std::log10(mm.b);
  if (!(rep.hist_hi - rep.hist_lo > 1e-12)) rep.hist_hi = rep.hist_lo + 1e-12;
  const double width = rep.hist_hi - rep.hist_lo;
  using Hist = std::array<std::uint64_t, 32>;
  rep.histogram = pair_fold(
      v, rep.exhaustive, options.sample_pairs, options.seed, options.threads, Hist{},
      [&](Hist& h, VertexId x, VertexId y) {
        const double t = (std::log10(ratio(x, y)) - rep.hist_lo) / width * 32.0;
        const auto bin = std::min<std::size_t>(31, static_cast<std::size_t>(std::max(0.0, t)));
        ++h[bin];
      },
      [](Hist& h, const Hist& o) {
        for (std::size_t i = 0; i < h.size(); ++i) h[i] += o[i];
      });
  return rep;
}

TraversalBand band_analysis(const MetricTree& tree, const Decomposition& dec,
                            const GlobalEmbedding& emb, VertexId x, VertexId y) {
  TraversalBand band;
  band.x = x;
  band.y = y;
  band.dist = tree.distance(x, y);
  band.n_raw = scale_index(band.dist);
  band.n = std::max(1, band.n_raw);
  band.clamped = band.n != band.n_raw;

  const Traversal trav = traversal(tree, dec, x, y);
  band.valley = trav.valley;
  const BandIndices star = level_band(trav, dec, band.n);
  band.star_lo = star.lo;
  band.star_hi = star.hi;
  band.star_empty = star.empty;
  const BandIndices mid = level_band(trav, dec, band.n + emb.constants.N);
  band.under = mid.lo;
  band.over = mid.hi;
  band.middle_empty = mid.empty;

  const Increments inc = compute_increments(tree, emb, trav);
  for (std::size_t i = 0; i < inc.seg_d.size(); ++i) {
    if (i < mid.lo)
      band.tail_low += inc.seg_d[i];
    else if (i > mid.hi)
      band.tail_high += inc.seg_d[i];
    else
      band.middle_norms.push_back(inc.norms[i]);
  }
  return band;
}

LowerBoundAuditResult lower_bound_audit(const MetricTree& tree, const Decomposition& dec,
                                        const Coloring& coloring, const GlobalEmbedding& emb,
                                        const LowerBoundOptions& options) {
  const std::size_t v = tree.vertex_count();
  const GlobalConstants& c = emb.constants;
  const std::size_t amb = static_cast<std::size_t>(emb.ambient);

  struct State {
    LowerBoundAuditResult r;
  };
  State out = pair_fold(
      v, options.exhaustive, options.sample_pairs, options.seed, options.threads, State{},
      [&](State& s, VertexId x, VertexId y) {
        ++s.r.pairs_checked;
        const double dxy = tree.distance(x, y);
        const Traversal trav = traversal(tree, dec, x, y);
        const Increments inc = compute_increments(tree, emb, trav);
        const int n_raw = scale_index(dxy);
        const BandIndices band = level_band(trav, dec, n_raw + c.N);

        // middle-band pieces must carry pairwise distinct colors
        for (std::size_t i = band.lo; i <= band.hi; ++i) {
          for (std::size_t j = i + 1; j <= band.hi; ++j) {
            const int ci = coloring.assignment[trav.entries[i].piece];
            const int cj = coloring.assignment[trav.entries[j].piece];
            if (ci == cj)
              s.r.orthogonality.fail(fmt("pair (%u,%u): band entries %zu,%zu share color %d", x, y,
                                         i, j, ci));
          }
        }

        // the band sum lives in pairwise disjoint blocks, so its squared norm
        // must match the sum of squared increment norms
        std::vector<double> mid(amb, 0.0);
        double sum_sq = 0.0, band_sum_d = 0.0;
        for (std::size_t i = band.lo; i <= band.hi; ++i) {
          for (std::size_t j = 0; j < amb; ++j) mid[j] += inc.diffs[i * amb + j];
          sum_sq += inc.norms[i] * inc.norms[i];
          band_sum_d += inc.seg_d[i];
        }
        double mid_sq = 0.0;
        for (const double t : mid) mid_sq += t * t;
        if (std::abs(mid_sq - sum_sq) > kRelSlack * std::max(mid_sq, sum_sq) + kAbsSlack)
          s.r.pythagoras.fail(
              fmt("pair (%u,%u): |mid|^2 = %.17g vs sum %.17g", x, y, mid_sq, sum_sq));

        double tail_low = 0.0, tail_high = 0.0;
        for (std::size_t i = 0; i < inc.seg_d.size(); ++i) {
          if (i < band.lo) tail_low += inc.seg_d[i];
          if (i > band.hi) tail_high += inc.seg_d[i];
        }
        const double tails = tail_low + tail_high;
        const double cnt = static_cast<double>(band.hi - band.lo + 1);
        const double mid_norm = std::sqrt(mid_sq);
        const double fxy = diff_norm(emb.point(x), emb.point(y));
        // waypoint distances over-cover the endpoint distance
        if (!geq_slack(band_sum_d + tails, dxy))
          s.r.chain.fail(fmt("pair (%u,%u): waypoint sum %.17g below distance %.17g", x, y,
                             band_sum_d + tails, dxy));
        // Cauchy-Schwarz across the band
        if (!geq_slack(mid_norm * std::sqrt(cnt), band_sum_d))
          s.r.chain.fail(fmt("pair (%u,%u): band norm %.17g too small for sum %.17g over %g", x, y,
                             mid_norm, band_sum_d, cnt));
        // tails cost at most L times their metric length
        if (!geq_slack(fxy + c.L * tails, mid_norm))
          s.r.chain.fail(
              fmt("pair (%u,%u): |f(x)-f(y)| = %.17g vs band %.17g minus tails", x, y, fxy,
                  mid_norm));
        if (!geq_slack(fxy, c.theoretical_lower * dxy))
          s.r.final_bound.fail(fmt("pair (%u,%u): |f(x)-f(y)| = %.17g below %.17g", x, y, fxy,
                                   c.theoretical_lower * dxy));
      },
      [](State& s, const State& o) {
        s.r.pairs_checked += o.r.pairs_checked;
        merge_check(s.r.orthogonality, o.r.orthogonality);
        merge_check(s.r.pythagoras, o.r.pythagoras);
        merge_check(s.r.chain, o.r.chain);
        merge_check(s.r.final_bound, o.r.final_bound);
      });
  return out.r;
}

int compute_M_alt(const MetricTree& tree, const Decomposition& dec) {
  const std::size_t v = tree.vertex_count();
  std::vector<char> on_path(v, 0);
  int best = 1;
  for (VertexId x = 0; x < v; ++x) {
    for (VertexId y = x + 1; y < v; ++y) {
      const int n = scale_index(tree.distance(x, y));
      if (n < 1) continue;
      const auto path = tree.path(x, y);
      for (const VertexId p : path) on_path[p] = 1;
      int count = 0;
      for (const Piece& piece : dec.pieces) {
        if (piece.level > n) continue;
        for (const VertexId m : piece.members) {
          if (on_path[m]) {
            ++count;
            break;
          }
        }
      }
      best = std::max(best, count);
      for (const VertexId p : path) on_path[p] = 0;
    }
  }
  return best;
}

AuditReport audit_all(const MetricTree& tree, const NetHierarchy& nets, const Decomposition& dec,
                      const ProximityGraph& graph, const Coloring& coloring,
                      const std::vector<LocalEmbedding>& locals, const GlobalEmbedding& emb,
                      const AuditOptions& options) {
  const std::size_t v = tree.vertex_count();
  const std::size_t p_count = dec.pieces.size();
  const GlobalConstants& c = emb.constants;
  const std::size_t amb = static_cast<std::size_t>(emb.ambient);
  if (v < 2) throw ValidationError("audit_all: needs at least two vertices");
  if (locals.size() != p_count) throw ValidationError("audit_all: locals do not match pieces");
  if (coloring.assignment.size() != p_count)
    throw ValidationError("audit_all: coloring does not match pieces");
  if (emb.vertex_count != v || emb.coords.size() != v * amb)
    throw ValidationError("audit_all: embedding shape mismatch");

  AuditReport rep;

  // ---- net axioms ----
  CheckResult nest{"net_nesting"}, sep{"net_separation"}, cover{"net_covering"},
      term{"net_termination"};
  const auto leaves = tree.leaves();
  for (int n = 1; n <= nets.n_max; ++n) {
    const auto& net = nets.level(n);
    if (n < nets.n_max) {
      const auto& next = nets.level(n + 1);
      if (!std::includes(next.begin(), next.end(), net.begin(), net.end()))
        nest.fail(fmt("level %d not contained in level %d", n, n + 1));
    }
    const double r = std::ldexp(1.0, -n);
    for (std::size_t i = 0; i < net.size(); ++i)
      for (std::size_t j = i + 1; j < net.size(); ++j)
        if (!(tree.distance(net[i], net[j]) >= r))
          sep.fail(fmt("level %d: vertices %u,%u at distance %.17g < 2^-%d", n, net[i], net[j],
                       tree.distance(net[i], net[j]), n));
    for (const VertexId leaf : leaves) {
      if (std::binary_search(net.begin(), net.end(), leaf)) continue;
      double best = std::numeric_limits<double>::infinity();
      for (const VertexId q : net) best = std::min(best, tree.distance(leaf, q));
      if (!(best < r)) cover.fail(fmt("level %d: leaf %u at distance %.17g from net", n, leaf, best));
    }
  }
  if (nets.n_max != static_cast<int>(nets.levels.size()) || nets.levels.empty())
    term.fail("level count disagrees with n_max");
  else {
    if (nets.levels.back() != leaves) term.fail("final net is not the leaf set");
    if (nets.level(1).size() < 2) term.fail("first net has fewer than two points");
  }
  rep.checks.push_back(std::move(nest));
  rep.checks.push_back(std::move(sep));
  rep.checks.push_back(std::move(cover));
  rep.checks.push_back(std::move(term));

  // ---- decomposition structure ----
  rep.decomposition = audit_pieces(tree, nets, dec);
  for (const auto& chk : rep.decomposition.checks) rep.checks.push_back(chk);

  // ---- proximity graph and coloring ----
  {
    CheckResult gm{"graph_matches"};
    if (graph.S != coloring.S || graph.S != c.S)
      gm.fail(fmt("thresholds disagree: graph %.17g, coloring %.17g, constants %.17g", graph.S,
                  coloring.S, c.S));
    const ProximityGraph rebuilt = build_graph(tree, dec, coloring.S);
    if (rebuilt.edges != graph.edges)
      gm.fail(fmt("edge set differs from rebuild (%zu vs %zu edges)", graph.edges.size(),
                  rebuilt.edges.size()));
    rep.checks.push_back(std::move(gm));

    CheckResult proper{"coloring_proper"};
    for (const auto& [a, b] : graph.edges)
      if (coloring.assignment[a] == coloring.assignment[b])
        proper.fail(fmt("adjacent pieces %u,%u share color %d", a, b, coloring.assignment[a]));
    rep.checks.push_back(std::move(proper));

    CheckResult greedy{"coloring_matches_greedy"};
    const Coloring redo = greedy_color(graph);
    if (redo.assignment != coloring.assignment || redo.A != coloring.A)
      greedy.fail("assignment differs from deterministic greedy recoloring");
    rep.checks.push_back(std::move(greedy));

    CheckResult contig{"coloring_contiguous"};
    std::vector<char> used(static_cast<std::size_t>(std::max(coloring.A, 1)) + 1, 0);
    int max_color = 0;
    for (std::size_t i = 0; i < coloring.assignment.size(); ++i) {
      const int col = coloring.assignment[i];
      if (col < 1 || col > coloring.A) {
        contig.fail(fmt("piece %zu has color %d outside 1..%d", i, col, coloring.A));
        continue;
      }
      used[static_cast<std::size_t>(col)] = 1;
      max_color = std::max(max_color, col);
    }
    for (int col = 1; col <= coloring.A; ++col)
      if (!used[static_cast<std::size_t>(col)]) contig.fail(fmt("color %d unused", col));
    if (max_color != coloring.A) contig.fail(fmt("max color %d but A = %d", max_color, coloring.A));
    rep.checks.push_back(std::move(contig));

    CheckResult degree{"coloring_degree_bound"};
    std::size_t max_deg = 0;
    for (const auto& adj : graph.adjacency) max_deg = std::max(max_deg, adj.size());
    if (static_cast<std::size_t>(coloring.A) > max_deg + 1)
      degree.fail(fmt("A = %d exceeds 1 + max degree %zu", coloring.A, max_deg));
    rep.checks.push_back(std::move(degree));
  }

  // ---- local embeddings ----
  {
    CheckResult cert{"local_certification"};
    for (std::size_t pc = 0; pc < p_count; ++pc) {
      const Piece& piece = dec.pieces[pc];
      const LocalEmbedding& lp = locals[pc];
      if (lp.level != piece.level || lp.index != piece.index || lp.members != piece.members) {
        cert.fail(fmt("piece (%d,%d): stored embedding does not match piece", piece.level,
                      piece.index));
        continue;
      }
      if (lp.dim != c.d) {
        cert.fail(fmt("piece (%d,%d): dim %d but constants say %d", piece.level, piece.index,
                      lp.dim, c.d));
        continue;
      }
      const auto root_pt = lp.point(lp.member_index(piece.root));
      for (const double t : root_pt)
        if (t != 0.0 || std::signbit(t))
          cert.fail(fmt("piece (%d,%d): root coordinate %.17g not +0", piece.level, piece.index, t));
      const auto [lo, hi] = certify(lp, tree);
      if (std::abs(lo - lp.certified_lower) > 1e-12 || std::abs(hi - lp.certified_upper) > 1e-12)
        cert.fail(fmt("piece (%d,%d): stored certificate (%.17g,%.17g) vs recomputed (%.17g,%.17g)",
                      piece.level, piece.index, lp.certified_lower, lp.certified_upper, lo, hi));
      if (!geq_slack(lp.certified_lower, 1.0))
        cert.fail(fmt("piece (%d,%d): lower certificate %.17g below 1", piece.level, piece.index,
                      lp.certified_lower));
      if (!leq_slack(lp.certified_upper, options.L_cap))
        cert.fail(fmt("piece (%d,%d): upper certificate %.17g above cap %.17g", piece.level,
                      piece.index, lp.certified_upper, options.L_cap));
      if (!leq_slack(lp.certified_upper, c.L, 1e-12))
        cert.fail(fmt("piece (%d,%d): upper certificate %.17g above L = %.17g", piece.level,
                      piece.index, lp.certified_upper, c.L));
    }
    rep.checks.push_back(std::move(cert));
  }

  // gate of every vertex into every piece, used by the extension checks
  std::vector<std::vector<VertexId>> gates(p_count);
  for (std::size_t pc = 0; pc < p_count; ++pc) gates[pc] = piece_gates(tree, dec.pieces[pc]);

  {
    CheckResult constancy{"extension_constancy"};
    for (std::size_t pc = 0; pc < p_count; ++pc) {
      for (std::size_t qc = 0; qc < p_count; ++qc) {
        if (qc == pc) continue;
        const auto& q_members = dec.pieces[qc].members;
        const VertexId g0 = gates[pc][q_members.front()];
        for (const VertexId u : q_members) {
          if (gates[pc][u] != g0) {
            constancy.fail(fmt("piece (%d,%d) gate varies over piece (%d,%d)",
                               dec.pieces[pc].level, dec.pieces[pc].index, dec.pieces[qc].level,
                               dec.pieces[qc].index));
            break;
          }
        }
      }
    }
    rep.checks.push_back(std::move(constancy));

    CheckResult rootv{"root_vanishing"};
    for (std::size_t pc = 0; pc < p_count; ++pc)
      if (gates[pc][emb.root] != dec.pieces[pc].root)
        rootv.fail(fmt("piece (%d,%d) gates the base vertex to %u, not its root %u",
                       dec.pieces[pc].level, dec.pieces[pc].index, gates[pc][emb.root],
                       dec.pieces[pc].root));
    rep.checks.push_back(std::move(rootv));

    CheckResult origin{"assembly_root_origin"};
    const auto root_row = emb.point(emb.root);
    for (const double t : root_row)
      if (t != 0.0 || std::signbit(t)) origin.fail(fmt("base row holds %.17g, not +0", t));
    rep.checks.push_back(std::move(origin));
  }

  {
    CheckResult vanish{"vanishing_off_root_paths"}, psum{"path_sum_equality"};
    std::vector<char> traversed(p_count, 0);
    for (VertexId x = 0; x < v; ++x) {
      const auto ps = evaluate_path_sum(tree, dec, coloring, locals, emb, x);
      if (std::memcmp(ps.data(), emb.coords.data() + std::size_t(x) * amb,
                      amb * sizeof(double)) != 0)
        psum.fail(fmt("vertex %u: path sum differs from assembled row", x));
      if (x == emb.root) continue;
      std::fill(traversed.begin(), traversed.end(), 0);
      const Traversal trav = traversal(tree, dec, emb.root, x);
      for (const auto& e : trav.entries) traversed[e.piece] = 1;
      for (std::size_t pc = 0; pc < p_count; ++pc)
        if (!traversed[pc] && gates[pc][x] != dec.pieces[pc].root)
          vanish.fail(fmt("vertex %u: untraversed piece (%d,%d) gates it to %u", x,
                          dec.pieces[pc].level, dec.pieces[pc].index, gates[pc][x]));
    }
    rep.checks.push_back(std::move(vanish));
    rep.checks.push_back(std::move(psum));
  }

  {
    CheckResult restr{"per_piece_restriction"};
    for (std::size_t pc = 0; pc < p_count; ++pc) {
      const auto& members = dec.pieces[pc].members;
      for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t j = i + 1; j < members.size(); ++j) {
          const double dist = tree.distance(members[i], members[j]);
          const double norm = diff_norm(emb.point(members[i]), emb.point(members[j]));
          if (!geq_slack(norm, dist) ||
              !leq_slack(norm, locals[pc].certified_upper * dist))
            restr.fail(fmt("piece (%d,%d): members %u,%u map to ratio %.17g",
                           dec.pieces[pc].level, dec.pieces[pc].index, members[i], members[j],
                           norm / dist));
        }
      }
    }
    rep.checks.push_back(std::move(restr));
  }

  const int m_ref = compute_M(tree, dec);
  {
    CheckResult cons{"constants_consistency"};
    if (c.S != std::ldexp(1.0, c.N)) cons.fail(fmt("S = %.17g is not 2^%d", c.S, c.N));
    if (c.A != coloring.A) cons.fail(fmt("A = %d but coloring used %d colors", c.A, coloring.A));
    if (emb.ambient != c.A * c.d)
      cons.fail(fmt("ambient %d is not A*d = %d", emb.ambient, c.A * c.d));
    double max_upper = 1.0;
    for (const auto& lp : locals) max_upper = std::max(max_upper, lp.certified_upper);
    if (std::abs(c.L - max_upper) > 1e-12 * std::max(1.0, std::abs(c.L)))
      cons.fail(fmt("L = %.17g but worst local certificate is %.17g", c.L, max_upper));
    if (c.M != m_ref) cons.fail(fmt("M = %d but recomputation gives %d", c.M, m_ref));
    const GlobalConstants redo = choose_constants_forced(c.L, c.M, c.A, c.d, c.N);
    if (redo.theoretical_lower != c.theoretical_lower ||
        redo.theoretical_upper != c.theoretical_upper)
      cons.fail(fmt("bounds (%.17g,%.17g) differ from recomputed (%.17g,%.17g)",
                    c.theoretical_lower, c.theoretical_upper, redo.theoretical_lower,
                    redo.theoretical_upper));
    if (!(c.theoretical_lower > 0.0))
      cons.fail(fmt("lower bound constant %.17g is not positive", c.theoretical_lower));
    if (!c.forced_N) {
      const GlobalConstants scan = choose_constants(c.L, c.M, c.A, c.d);
      if (scan.N != c.N) cons.fail(fmt("N = %d but minimal admissible is %d", c.N, scan.N));
    }
    rep.checks.push_back(std::move(cons));

    CheckResult malt{"m_double_check"};
    const int alt = compute_M_alt(tree, dec);
    if (alt != m_ref) malt.fail(fmt("piece-major recount gives %d, pair-major gives %d", alt, m_ref));
    rep.checks.push_back(std::move(malt));
  }

  // ---- per-pair sweep: traversal shape, increments, bands, telescoping ----
  struct SweepState {
    CheckResult valley{"traversal_valley"};
    CheckResult tiling{"traversal_tiling"};
    CheckResult increment{"increment_bounds"};
    CheckResult block{"block_support"};
    CheckResult ext_lip{"extension_lipschitz"};
    CheckResult band_card{"band_cardinality"};
    CheckResult band_tail{"band_tails"};
    CheckResult tele{"telescoping"};
    std::uint64_t pairs = 0, clamped = 0, empty_mid = 0;
  };
  const int dd = c.d;
  SweepState sweep = pair_fold(
      v, options.exhaustive, options.sample_pairs, options.seed, options.threads, SweepState{},
      [&](SweepState& s, VertexId x, VertexId y) {
        ++s.pairs;
        const double dxy = tree.distance(x, y);
        const Traversal trav = traversal(tree, dec, x, y);
        const std::size_t k = trav.entries.size();

        // valley is the first minimum-level entry
        int min_level = std::numeric_limits<int>::max();
        std::size_t first_min = 0;
        for (std::size_t i = 0; i < k; ++i) {
          const int lev = dec.pieces[trav.entries[i].piece].level;
          if (lev < min_level) {
            min_level = lev;
            first_min = i;
          }
        }
        if (trav.valley != first_min || trav.x != x || trav.terminal != y)
          s.valley.fail(fmt("pair (%u,%u): valley %zu, expected %zu", x, y, trav.valley, first_min));

        // entries tile the path, overlapping only at shared boundary vertices
        const auto path = tree.path(x, y);
        bool tiled = k > 0 && trav.entries.front().first_pos == 0 &&
                     trav.entries.back().last_pos == path.size() - 1;
        for (std::size_t i = 0; tiled && i < k; ++i) {
          const auto& e = trav.entries[i];
          if (e.first_pos >= e.last_pos || e.last_pos >= path.size() ||
              path[e.first_pos] != e.entry ||
              (i + 1 < k && e.last_pos != trav.entries[i + 1].first_pos)) {
            tiled = false;
            break;
          }
          const auto& members = dec.pieces[e.piece].members;
          for (std::size_t pos = e.first_pos; pos <= e.last_pos; ++pos)
            if (!std::binary_search(members.begin(), members.end(), path[pos])) {
              tiled = false;
              break;
            }
        }
        if (tiled) {
          // every piece meeting the path twice must appear as an entry
          std::unordered_map<std::uint32_t, int> hits;
          for (const VertexId u : path)
            for (const std::uint32_t pc : dec.membership[u]) ++hits[pc];
          std::size_t expect = 0;
          for (const auto& [pc, count] : hits)
            if (count >= 2) ++expect;
          tiled = expect == k;
        }
        if (!tiled) s.tiling.fail(fmt("pair (%u,%u): traversal does not tile the path", x, y));

        const Increments inc = compute_increments(tree, emb, trav);
        for (std::size_t i = 0; i < k; ++i) {
          const std::uint32_t pc = trav.entries[i].piece;
          const int level = dec.pieces[pc].level;
          const int col = coloring.assignment[pc];
          const std::size_t block_lo = static_cast<std::size_t>(col - 1) * dd;
          for (std::size_t j = 0; j < amb; ++j) {
            if (j >= block_lo && j < block_lo + static_cast<std::size_t>(dd)) continue;
            if (inc.diffs[i * amb + j] != 0.0) {
              s.block.fail(fmt("pair (%u,%u): increment %zu leaks outside color block %d", x, y, i,
                               col));
              break;
            }
          }
          if (!geq_slack(inc.norms[i], inc.seg_d[i]) ||
              !leq_slack(inc.norms[i], locals[pc].certified_upper * inc.seg_d[i]) ||
              !leq_slack(inc.seg_d[i], std::ldexp(1.0, 2 - level)))
            s.increment.fail(fmt("pair (%u,%u): increment %zu norm %.17g, step %.17g, level %d", x,
                                 y, i, inc.norms[i], inc.seg_d[i], level));
        }

        // extensions are L-Lipschitz piece by piece
        for (std::size_t pc = 0; pc < p_count; ++pc) {
          const VertexId gx = gates[pc][x], gy = gates[pc][y];
          if (gx == gy) continue;
          const LocalEmbedding& lp = locals[pc];
          const double norm =
              diff_norm(lp.point(lp.member_index(gx)), lp.point(lp.member_index(gy)));
          if (!leq_slack(norm, lp.certified_upper * dxy))
            s.ext_lip.fail(fmt("pair (%u,%u): piece (%d,%d) extension moves %.17g over %.17g", x, y,
                               dec.pieces[pc].level, dec.pieces[pc].index, norm, dxy));
        }

        // scale bands
        const int n_raw = scale_index(dxy);
        const int n = std::max(1, n_raw);
        if (n != n_raw) ++s.clamped;
        const BandIndices star = level_band(trav, dec, n);
        if (!star.empty && star.hi - star.lo > static_cast<std::size_t>(c.M))
          s.band_card.fail(fmt("pair (%u,%u): fine band spans %zu entries, M = %d", x, y,
                               star.hi - star.lo + 1, c.M));
        const BandIndices mid = level_band(trav, dec, n + c.N);
        if (mid.empty) {
          ++s.empty_mid;
        } else {
          if (mid.hi - mid.lo > static_cast<std::size_t>(2 * c.N + c.M))
            s.band_card.fail(fmt("pair (%u,%u): middle band spans %zu entries, 2N+M = %d", x, y,
                                 mid.hi - mid.lo + 1, 2 * c.N + c.M));
          double tail_low = 0.0, tail_high = 0.0;
          for (std::size_t i = 0; i < inc.seg_d.size(); ++i) {
            if (i < mid.lo) tail_low += inc.seg_d[i];
            if (i > mid.hi) tail_high += inc.seg_d[i];
          }
          const double bound = std::ldexp(1.0, 2 - (n + c.N));
          if (!leq_slack(tail_low, bound) || !leq_slack(tail_high, bound))
            s.band_tail.fail(fmt("pair (%u,%u): tails %.17g/%.17g above %.17g", x, y, tail_low,
                                 tail_high, bound));
        }

        // telescoping: increments sum to f(x) - f(y) up to rounding
        const auto fx = emb.point(x), fy = emb.point(y);
        double res_sq = 0.0, fxy_sq = 0.0;
        for (std::size_t j = 0; j < amb; ++j) {
          double acc = fx[j] - fy[j];
          fxy_sq += acc * acc;
          for (std::size_t i = 0; i < k; ++i) acc -= inc.diffs[i * amb + j];
          res_sq += acc * acc;
        }
        if (std::sqrt(res_sq) > kRelSlack * (1.0 + std::sqrt(fxy_sq)))
          s.tele.fail(fmt("pair (%u,%u): telescoping residual %.17g", x, y, std::sqrt(res_sq)));
      },
      [](SweepState& s, const SweepState& o) {
        merge_check(s.valley, o.valley);
        merge_check(s.tiling, o.tiling);
        merge_check(s.increment, o.increment);
        merge_check(s.block, o.block);
        merge_check(s.ext_lip, o.ext_lip);
        merge_check(s.band_card, o.band_card);
        merge_check(s.band_tail, o.band_tail);
        merge_check(s.tele, o.tele);
        s.pairs += o.pairs;
        s.clamped += o.clamped;
        s.empty_mid += o.empty_mid;
      });
  rep.pairs_checked = sweep.pairs;
  rep.clamped_pairs = sweep.clamped;
  rep.empty_middle_bands = sweep.empty_mid;
  rep.checks.push_back(std::move(sweep.valley));
  rep.checks.push_back(std::move(sweep.tiling));
  rep.checks.push_back(std::move(sweep.increment));
  rep.checks.push_back(std::move(sweep.block));
  rep.checks.push_back(std::move(sweep.ext_lip));
  rep.checks.push_back(std::move(sweep.band_card));
  rep.checks.push_back(std::move(sweep.band_tail));
  rep.checks.push_back(std::move(sweep.tele));

  // ---- lower-bound replay ----
  LowerBoundOptions lb_opts;
  lb_opts.exhaustive = options.exhaustive;
  lb_opts.sample_pairs = options.sample_pairs;
  lb_opts.seed = options.seed;
  lb_opts.threads = options.threads;
  const LowerBoundAuditResult lb = lower_bound_audit(tree, dec, coloring, emb, lb_opts);
  rep.checks.push_back(lb.orthogonality);
  rep.checks.push_back(lb.pythagoras);
  rep.checks.push_back(lb.chain);
  rep.checks.push_back(lb.final_bound);

  // ---- measured distortion ----
  DistortionOptions d_opts;
  d_opts.seed = options.seed;
  d_opts.threads = options.threads;
  if (options.exhaustive) {
    d_opts.exhaustive_threshold = std::max<std::size_t>(v, 2);
  } else {
    d_opts.exhaustive_threshold = 0;
    d_opts.sample_pairs = options.sample_pairs;
  }
  rep.distortion = measure_distortion(tree, emb, d_opts);
  CheckResult dlo{"distortion_lower"}, dhi{"distortion_upper"};
  if (!rep.distortion.pass_lower)
    dlo.fail(fmt("min ratio %.17g at pair (%u,%u) below %.17g", rep.distortion.a_measured,
                 rep.distortion.argmin_x, rep.distortion.argmin_y,
                 rep.distortion.theoretical_lower));
  if (!rep.distortion.pass_upper)
    dhi.fail(fmt("max ratio %.17g at pair (%u,%u) above %.17g", rep.distortion.b_measured,
                 rep.distortion.argmax_x, rep.distortion.argmax_y,
                 rep.distortion.theoretical_upper));
  rep.checks.push_back(std::move(dlo));
  rep.checks.push_back(std::move(dhi));

  return rep;
}

}  // namespace qct
