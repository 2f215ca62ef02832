#pragma once

#include <cstdint>
#include <vector>

#include "qct/decomposition.hpp"
#include "qct/global_embed.hpp"
#include "qct/local_embed.hpp"
#include "qct/nets.hpp"
#include "qct/proximity.hpp"
#include "qct/tree.hpp"

namespace qct {

struct PipelineOptions {
  int dim = 3;             // requested local dimension; pieces may escalate
  std::uint64_t seed = 0;  // drives every randomized refinement deterministically
  int threads = 1;
  int forced_N = 0;  // 0 scans for the minimal admissible separation exponent
  double L_cap = 64.0;
  int max_iterations = 2000;
};

/// Everything the construction produces, in dependency order.
struct PipelineResult {
  MetricTree tree;  // normalized copy the rest refers to
  NetHierarchy nets;
  Decomposition dec;
  ProximityGraph graph;
  Coloring coloring;
  std::vector<LocalEmbedding> locals;
  GlobalEmbedding emb;
};

/// Normalize, build nets, decompose, embed each piece (seeded per piece, so
/// the result is independent of the thread count), derive the constants,
/// color, and assemble.  A single-vertex tree short-circuits to the constant
/// map with trivial artifacts.
PipelineResult run_pipeline(const MetricTree& input, const PipelineOptions& options = {});

}  // namespace qct
