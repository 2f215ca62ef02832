#include "qct/global_embed.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qct/errors.hpp"

namespace qct {

namespace {

GlobalConstants derive(double L, int M, int A, int d, int N, bool forced) {
  GlobalConstants c;
  c.L = L;
  c.M = M;
  c.N = N;
  c.S = std::ldexp(1.0, N);
  c.A = A;
  c.d = d;
  c.theoretical_lower = 1.0 / (2.0 * std::sqrt(double(2 * N + M + 1))) - L * std::ldexp(1.0, 3 - N);
  c.theoretical_upper = L * (double(M) + 17.0);
  c.forced_N = forced;
  return c;
}

}  // namespace

GlobalConstants choose_constants(double L, int M, int A, int d) {
  if (!(L >= 1.0)) throw ValidationError("choose_constants requires L >= 1");
  if (M < 1) throw ValidationError("choose_constants requires M >= 1");
  for (int N = 1; N <= 128; ++N) {
    const double lower = 1.0 / (2.0 * std::sqrt(double(2 * N + M + 1))) - L * std::ldexp(1.0, 3 - N);
    if (lower > 0.0) return derive(L, M, A, d, N, false);
  }
  throw ValidationError("choose_constants found no workable N up to 128");  // unreachable for sane L
}

GlobalConstants choose_constants_forced(double L, int M, int A, int d, int N) {
  if (N < 1) throw ValidationError("forced N must be at least 1");
  return derive(L, M, A, d, N, true);
}

GlobalEmbedding assemble(const MetricTree& tree, const Decomposition& dec,
                         const Coloring& coloring, const std::vector<LocalEmbedding>& locals,
                         const GlobalConstants& constants) {
  if (coloring.S != constants.S)
    throw ValidationError("assemble: coloring was built for S = " + std::to_string(coloring.S) +
                          " but constants carry S = " + std::to_string(constants.S));
  if (coloring.A != constants.A)
    throw ValidationError("assemble: color count disagrees with constants");
  if (locals.size() != dec.pieces.size())
    throw ValidationError("assemble: expected one local embedding per piece");
  for (std::size_t p = 0; p < locals.size(); ++p) {
    if (locals[p].level != dec.pieces[p].level || locals[p].index != dec.pieces[p].index ||
        locals[p].members != dec.pieces[p].members)
      throw ValidationError("assemble: local embedding " + std::to_string(p) +
                            " does not match its piece");
    if (locals[p].dim != constants.d)
      throw ValidationError("assemble: local embeddings must share dimension d");
  }

  GlobalEmbedding emb;
  emb.constants = constants;
  emb.ambient = constants.A * constants.d;
  emb.vertex_count = tree.vertex_count();
  emb.coords.assign(emb.vertex_count * std::size_t(emb.ambient), 0.0);
  emb.root = dec.pieces[dec.root_piece].root;

  // Pieces are stored in (level, index) order, so accumulating in storage
  // order fixes the float summation order within every color block.
  for (std::size_t p = 0; p < dec.pieces.size(); ++p) {
    const auto gates = piece_gates(tree, dec.pieces[p]);
    const std::size_t offset = std::size_t(coloring.assignment[p] - 1) * std::size_t(constants.d);
    for (VertexId v = 0; v < emb.vertex_count; ++v) {
      const auto value = locals[p].point(locals[p].member_index(gates[v]));
      double* row = emb.coords.data() + std::size_t(v) * std::size_t(emb.ambient) + offset;
      for (int k = 0; k < constants.d; ++k) row[k] += value[std::size_t(k)];
    }
  }
  return emb;
}

std::vector<double> evaluate_path_sum(const MetricTree& tree, const Decomposition& dec,
                                      const Coloring& coloring,
                                      const std::vector<LocalEmbedding>& locals,
                                      const GlobalEmbedding& emb, VertexId x) {
  std::vector<double> row(std::size_t(emb.ambient), 0.0);
  if (x == emb.root) return row;  // nothing is traversed; the root sits at the origin

  std::vector<char> traversed(dec.pieces.size(), 0);
  for (const auto& entry : traversal(tree, dec, emb.root, x).entries) traversed[entry.piece] = 1;

  for (std::size_t p = 0; p < dec.pieces.size(); ++p) {
    if (!traversed[p]) continue;
    const VertexId g = tree.gate(x, dec.pieces[p].members);
    const auto value = locals[p].point(locals[p].member_index(g));
    const std::size_t offset =
        std::size_t(coloring.assignment[p] - 1) * std::size_t(emb.constants.d);
    for (int k = 0; k < emb.constants.d; ++k) row[offset + std::size_t(k)] += value[std::size_t(k)];
  }
  return row;
}

double telescoping_check(const MetricTree& tree, const Decomposition& dec,
                         const GlobalEmbedding& emb, VertexId x, VertexId y) {
  const auto waypoints = traversal(tree, dec, x, y).waypoints();
  std::vector<double> sum(std::size_t(emb.ambient), 0.0);
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    const auto a = emb.point(waypoints[i]);
    const auto b = emb.point(waypoints[i + 1]);
    for (std::size_t k = 0; k < std::size_t(emb.ambient); ++k) sum[k] += a[k] - b[k];
  }
  const auto fx = emb.point(x);
  const auto fy = emb.point(y);
  double residual = 0.0;
  for (std::size_t k = 0; k < std::size_t(emb.ambient); ++k) {
    const double r = (fx[k] - fy[k]) - sum[k];
    residual += r * r;
  }
  return std::sqrt(residual);
}

}  // namespace qct
