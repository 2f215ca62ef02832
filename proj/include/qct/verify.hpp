#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qct/checks.hpp"
#include "qct/decomposition.hpp"
#include "qct/global_embed.hpp"
#include "qct/local_embed.hpp"
#include "qct/nets.hpp"
#include "qct/proximity.hpp"
#include "qct/tree.hpp"

namespace qct {

struct DistortionOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  std::size_t exhaustive_threshold = 2000;  // vertex count up to which all pairs are measured
  std::uint64_t sample_pairs = 2000000;     // deterministic sample size above the threshold
};

struct DistortionReport {
  std::uint64_t pair_count = 0;
  bool exhaustive = true;
  double a_measured = 0.0;  // min |f(x)-f(y)| / d(x,y)
  double b_measured = 0.0;  // max
  double distortion = 0.0;  // b/a
  VertexId argmin_x = 0, argmin_y = 0;
  VertexId argmax_x = 0, argmax_y = 0;
  double theoretical_lower = 0.0, theoretical_upper = 0.0;
  bool pass_lower = false, pass_upper = false;
  std::array<std::uint64_t, 32> histogram{};  // counts of log10(ratio) bins
  double hist_lo = 0.0, hist_hi = 0.0;        // bin range in log10
};

/// Min/max embedding-vs-metric ratio over vertex pairs (all pairs up to the
/// threshold, a seeded deterministic sample beyond it), with witnesses, a
/// log-ratio histogram, and pass/fail against the theoretical constants.
/// Results are independent of the thread count.
DistortionReport measure_distortion(const MetricTree& tree, const GlobalEmbedding& emb,
                                    const DistortionOptions& options = {});

/// Scale bands of one traversal.  Entry indices are 0-based; when a band is
/// empty it collapses to the valley index and the flag is set.
struct TraversalBand {
  VertexId x = 0, y = 0;
  double dist = 0.0;
  int n_raw = 0;       // scale_index(d), may be 0 for far pairs
  int n = 1;           // reporting scale, clamped to >= 1
  bool clamped = false;
  std::size_t valley = 0;
  std::size_t star_lo = 0, star_hi = 0;  // entries with level <= n
  bool star_empty = false;
  std::size_t under = 0, over = 0;       // entries with level <= n + N
  bool middle_empty = false;
  double tail_low = 0.0, tail_high = 0.0;   // waypoint distances outside [under, over]
  std::vector<double> middle_norms;         // increment norms inside the band
};

TraversalBand band_analysis(const MetricTree& tree, const Decomposition& dec,
                            const GlobalEmbedding& emb, VertexId x, VertexId y);

struct LowerBoundOptions {
  bool exhaustive = true;
  std::uint64_t sample_pairs = 100000;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Per-pair replay of the lower-bound argument at the raw scale: middle-band
/// colors must be pairwise distinct (orthogonality), the band sum must obey
/// the Pythagorean identity, the norm chain must reach theoretical_lower.
struct LowerBoundAuditResult {
  std::uint64_t pairs_checked = 0;
  CheckResult orthogonality{"lower_orthogonality"};
  CheckResult pythagoras{"lower_pythagoras"};
  CheckResult chain{"lower_chain"};
  CheckResult final_bound{"lower_final"};

  bool pass() const {
    return orthogonality.pass && pythagoras.pass && chain.pass && final_bound.pass;
  }
};

LowerBoundAuditResult lower_bound_audit(const MetricTree& tree, const Decomposition& dec,
                                        const Coloring& coloring, const GlobalEmbedding& emb,
                                        const LowerBoundOptions& options = {});

/// Independent recount of the piece-count constant M, iterating piece-major
/// over a path membership mask instead of pair-major over vertex memberships.
int compute_M_alt(const MetricTree& tree, const Decomposition& dec);

struct AuditOptions {
  bool exhaustive = true;            // all vertex pairs in pair-quantified checks
  std::uint64_t sample_pairs = 100000;
  std::uint64_t seed = 0;
  int threads = 1;
  double L_cap = 64.0;
};

struct AuditReport {
  std::vector<CheckResult> checks;
  DecompositionAudit decomposition;
  DistortionReport distortion;
  std::uint64_t pairs_checked = 0;
  std::uint64_t clamped_pairs = 0;
  std::uint64_t empty_middle_bands = 0;

  bool all_pass() const { return all_checks_pass(checks); }
  const CheckResult* find(std::string_view name) const { return find_check(checks, name); }
};

/// Runs every invariant of the construction end to end: net axioms, piece
/// structure, coloring properness, local certificates and extension laws,
/// assembly exactness, traversal shape, band bounds, the lower-bound replay,
/// and measured distortion against the theoretical constants.
AuditReport audit_all(const MetricTree& tree, const NetHierarchy& nets, const Decomposition& dec,
                      const ProximityGraph& graph, const Coloring& coloring,
                      const std::vector<LocalEmbedding>& locals, const GlobalEmbedding& emb,
                      const AuditOptions& options = {});

}  // namespace qct
