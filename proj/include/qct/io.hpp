#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qct/decomposition.hpp"
#include "qct/global_embed.hpp"
#include "qct/local_embed.hpp"
#include "qct/proximity.hpp"
#include "qct/tree.hpp"
#include "qct/verify.hpp"

namespace qct {

/// Tree JSON: {"vertices", "edges", "metric"} with a full row-major matrix,
/// or {"vertices", "edges", "edge_lengths"} for geodesic input; the two forms
/// are mutually exclusive.  Numbers round-trip exactly.
MetricTree load_tree(const std::string& path);
void save_tree(const MetricTree& tree, const std::string& path);

void save_decomposition(const Decomposition& dec, const std::string& path);
/// Rebuilds level lists and memberships; validates against the tree size.
Decomposition load_decomposition(const std::string& path, const MetricTree& tree);

void save_coloring(const Coloring& coloring, const Decomposition& dec, const std::string& path);
Coloring load_coloring(const std::string& path, const Decomposition& dec);

void save_locals(const std::vector<LocalEmbedding>& locals, const std::string& path);
std::vector<LocalEmbedding> load_locals(const std::string& path);

void save_constants(const GlobalConstants& constants, const std::string& path);
GlobalConstants load_constants(const std::string& path);

/// CSV with header vertex,c0,...,c{k-1}; coordinates printed with %.17g so
/// parsing recovers each double bit for bit.
void save_embedding_csv(const GlobalEmbedding& emb, const std::string& path);

struct EmbeddingTable {
  std::size_t vertex_count = 0;
  int ambient = 0;
  std::vector<double> coords;  // row-major
};
EmbeddingTable load_embedding_csv(const std::string& path);

void save_audit_json(const AuditReport& report, const std::string& path);

/// Per-pair distances, embedded norms, and ratios over all vertex pairs.
void save_pair_ratios_csv(const MetricTree& tree, const GlobalEmbedding& emb,
                          const std::string& path);

}  // namespace qct
