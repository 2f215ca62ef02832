#include "qct/local_embed.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qct/errors.hpp"
#include "qct/util.hpp"

namespace qct {

namespace {

struct Ratios {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
};

double pair_norm(const double* a, const double* b, int dim) {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

Ratios measure(const std::vector<double>& coords, const std::vector<double>& dist, std::size_t m,
               int dim) {
  Ratios r;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double ratio =
          pair_norm(coords.data() + i * dim, coords.data() + j * dim, dim) / dist[i * m + j];
      r.lo = std::min(r.lo, ratio);
      r.hi = std::max(r.hi, ratio);
    }
  return r;
}

/// Classical MDS: double-center the squared distances and keep the top
/// eigenvectors scaled by sqrt(eigenvalue).
std::vector<double> mds_init(const std::vector<double>& dist, std::size_t m, int dim) {
  Eigen::MatrixXd B(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double d = dist[i * m + j];
      B(long(i), long(j)) = d * d;
    }
  const Eigen::VectorXd row_mean = B.rowwise().mean();
  const double total_mean = B.mean();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      B(long(i), long(j)) = -0.5 * (B(long(i), long(j)) - row_mean(long(i)) - row_mean(long(j)) +
                                    total_mean);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  std::vector<double> coords(m * std::size_t(dim), 0.0);
  for (int k = 0; k < dim; ++k) {
    const long col = long(m) - 1 - k;  // eigenvalues ascending
    if (col < 0) break;
    const double lambda = std::max(es.eigenvalues()(col), 0.0);
    const double scale = std::sqrt(lambda);
    for (std::size_t i = 0; i < m; ++i)
      coords[i * std::size_t(dim) + std::size_t(k)] = scale * es.eigenvectors()(long(i), col);
  }
  return coords;
}

/// Deterministic jitter keyed by (seed, salt) to break exact coincidences.
void separate_coincident(std::vector<double>& coords, std::size_t m, int dim, double scale,
                         std::uint64_t seed, std::uint64_t salt) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      if (pair_norm(coords.data() + i * dim, coords.data() + j * dim, dim) > 1e-12 * scale)
        continue;
      for (int k = 0; k < dim; ++k) {
        const std::uint64_t bits = splitmix64(seed ^ salt ^ (i * 0x1000193ULL) ^ std::uint64_t(k));
        coords[i * std::size_t(dim) + std::size_t(k)] +=
            (canonical_double(bits) - 0.5) * 1e-6 * scale;
      }
    }
}

/// Max-ratio polish: gradient descent on the smoothed objective
/// softmax(log ratios) + softmax(-log ratios), with a sharpening temperature
/// and decaying normalized steps.  Tracks the best exactly-certified iterate.
void refine(std::vector<double>& coords, const std::vector<double>& dist, std::size_t m, int dim,
            int iterations, std::uint64_t seed, double scale) {
  const std::size_t pair_count = m * (m - 1) / 2;
  if (pair_count == 0) return;
  std::vector<double> best = coords;
  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<double> log_ratio(pair_count), weight(pair_count), grad(coords.size());
  int since_improvement = 0;

  for (int t = 0; t < iterations; ++t) {
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    std::size_t p = 0;
    bool collapsed = false;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j, ++p) {
        const double norm = pair_norm(coords.data() + i * dim, coords.data() + j * dim, dim);
        if (norm < 1e-12 * scale) collapsed = true;
        log_ratio[p] = std::log(std::max(norm, 1e-300)) - std::log(dist[i * m + j]);
        hi = std::max(hi, log_ratio[p]);
        lo = std::min(lo, log_ratio[p]);
      }
    if (collapsed) {
      separate_coincident(coords, m, dim, scale, seed, std::uint64_t(t) + 1);
      continue;
    }
    const double objective = hi - lo;
    if (objective < best_obj - 1e-15) {
      best_obj = objective;
      best = coords;
      since_improvement = 0;
    } else if (++since_improvement > 300) {
      break;
    }
    if (best_obj < 1e-12) break;

    const double progress = iterations > 1 ? double(t) / double(iterations - 1) : 1.0;
    const double beta = 8.0 * std::pow(128.0, progress);  // 8 -> 1024
    double sum_hi = 0.0, sum_lo = 0.0;
    for (p = 0; p < pair_count; ++p) sum_hi += std::exp(beta * (log_ratio[p] - hi));
    for (p = 0; p < pair_count; ++p) sum_lo += std::exp(-beta * (log_ratio[p] - lo));
    std::fill(grad.begin(), grad.end(), 0.0);
    p = 0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j, ++p) {
        const double w = std::exp(beta * (log_ratio[p] - hi)) / sum_hi -
                         std::exp(-beta * (log_ratio[p] - lo)) / sum_lo;
        if (w == 0.0) continue;
        const double* a = coords.data() + i * dim;
        const double* b = coords.data() + j * dim;
        double norm2 = 0.0;
        for (int k = 0; k < dim; ++k) norm2 += (a[k] - b[k]) * (a[k] - b[k]);
        const double f = w / std::max(norm2, 1e-300);
        for (int k = 0; k < dim; ++k) {
          const double g = f * (a[k] - b[k]);
          grad[i * std::size_t(dim) + std::size_t(k)] += g;
          grad[j * std::size_t(dim) + std::size_t(k)] -= g;
        }
      }
    double gnorm = 0.0;
    for (double g : grad) gnorm += g * g;
    gnorm = std::sqrt(gnorm);
    if (gnorm < 1e-18) break;
    const double lr = 0.05 * std::pow(2e-3, progress) * scale;  // 0.05 -> 1e-4, times scale
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] -= (lr / gnorm) * grad[i];
  }
  coords = best;
}

/// Star-shaped layout for additive metrics: each component of piece \ root
/// must be a path hanging off the root; it gets its own axis.
std::vector<double> geodesic_axes_layout(const MetricTree& tree, const Piece& piece,
                                         std::size_t root_idx, int dim) {
  const std::size_t m = piece.members.size();
  std::vector<std::size_t> index_of(tree.vertex_count(), m);
  for (std::size_t i = 0; i < m; ++i) index_of[piece.members[i]] = i;

  // Verify additivity along piece edges before trusting the layout.
  std::vector<double> along(m, 0.0);
  std::vector<int> axis(m, -1);
  int branches = 0;
  const VertexId root = piece.members[root_idx];
  for (VertexId start : tree.neighbors(root)) {
    if (index_of[start] == m) continue;
    const int k = branches++;
    if (k >= dim) return {};  // needs a higher dimension
    VertexId prev = root;
    VertexId cur = start;
    double len = 0.0;
    for (;;) {
      len += tree.distance(prev, cur);
      const std::size_t ci = index_of[cur];
      axis[ci] = k;
      along[ci] = len;
      if (std::abs(len - tree.distance(root, cur)) > 1e-12 * std::max(1.0, len))
        throw ValidationError("geodesic_axes requires an additive piece metric");
      VertexId next = tree.vertex_count();
      int member_neighbors = 0;
      for (VertexId nb : tree.neighbors(cur)) {
        if (index_of[nb] == m || nb == prev) continue;
        ++member_neighbors;
        next = nb;
      }
      if (member_neighbors > 1)
        throw ValidationError("geodesic_axes requires each branch to be a simple path");
      if (member_neighbors == 0) break;
      prev = cur;
      cur = next;
    }
  }
  // Full additivity across branches: d(u,v) must be the sum of arc lengths
  // through the root (or their difference within one branch).
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double expected =
          axis[i] == axis[j] ? std::abs(along[i] - along[j]) : along[i] + along[j];
      const double actual = tree.distance(piece.members[i], piece.members[j]);
      if (std::abs(expected - actual) > 1e-12 * std::max(1.0, actual))
        throw ValidationError("geodesic_axes requires an additive piece metric");
    }
  std::vector<double> coords(m * std::size_t(dim), 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (axis[i] >= 0) coords[i * std::size_t(dim) + std::size_t(axis[i])] = along[i];
  return coords;
}

}  // namespace

std::size_t LocalEmbedding::member_index(VertexId v) const {
  const auto it = std::lower_bound(members.begin(), members.end(), v);
  if (it == members.end() || *it != v)
    throw ValidationError("vertex " + std::to_string(v) + " is not a member of piece (" +
                          std::to_string(level) + "," + std::to_string(index) + ")");
  return std::size_t(it - members.begin());
}

bool LocalEmbedding::contains(VertexId v) const {
  return std::binary_search(members.begin(), members.end(), v);
}

std::pair<double, double> certify(const LocalEmbedding& emb, const MetricTree& tree) {
  const std::size_t m = emb.members.size();
  if (m < 2) return {1.0, 1.0};
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double ratio =
          pair_norm(emb.coords.data() + i * emb.dim, emb.coords.data() + j * emb.dim, emb.dim) /
          tree.distance(emb.members[i], emb.members[j]);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  return {lo, hi};
}

LocalEmbedding embed_piece(const MetricTree& tree, const Piece& piece,
                           const LocalEmbedConfig& config) {
  if (config.dim < 1 || config.dim > 8) throw ValidationError("embed_piece: dim must be in 1..8");
  if (config.max_iterations < 1) throw ValidationError("embed_piece: max_iterations must be >= 1");
  if (!(config.L_cap > 1.0)) throw ValidationError("embed_piece: L_cap must exceed 1");

  LocalEmbedding emb;
  emb.level = piece.level;
  emb.index = piece.index;
  emb.members = piece.members;
  const std::size_t m = piece.members.size();
  const std::size_t root_idx =
      std::size_t(std::lower_bound(piece.members.begin(), piece.members.end(), piece.root) -
                  piece.members.begin());
  if (root_idx >= m || piece.members[root_idx] != piece.root)
    throw ValidationError("embed_piece: piece root is not among its members");

  if (m == 1) {
    emb.dim = config.dim;
    emb.coords.assign(std::size_t(config.dim), 0.0);
    return emb;
  }

  std::vector<double> dist(m * m, 0.0);
  double scale = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      dist[i * m + j] = tree.distance(piece.members[i], piece.members[j]);
      scale = std::max(scale, dist[i * m + j]);
    }

  std::string attempts;
  for (int dim = config.dim; dim <= 8; ++dim) {
    std::vector<double> coords;
    if (config.strategy == LocalEmbedConfig::Strategy::GeodesicAxes) {
      coords = geodesic_axes_layout(tree, piece, root_idx, dim);
      if (coords.empty()) continue;  // more branches than axes: escalate
    } else if (m == 2) {
      coords.assign(2 * std::size_t(dim), 0.0);
      coords[(1 - root_idx) * std::size_t(dim)] = dist[1];  // exact segment
    } else {
      coords = mds_init(dist, m, dim);
      separate_coincident(coords, m, dim, scale, config.seed, 0);
      refine(coords, dist, m, dim, config.max_iterations, config.seed, scale);
    }

    // Rescale so the smallest ratio is exactly 1, then move the root to the
    // origin and flush negative zeros so downstream sums are reproducible
    // bit for bit.
    Ratios r = measure(coords, dist, m, dim);
    for (double& c : coords) c /= r.lo;
    std::vector<double> root_coords(coords.begin() + long(root_idx) * dim,
                                    coords.begin() + long(root_idx + 1) * dim);
    for (std::size_t i = 0; i < m; ++i)
      for (int k = 0; k < dim; ++k) {
        double& c = coords[i * std::size_t(dim) + std::size_t(k)];
        c -= root_coords[std::size_t(k)];
        if (c == 0.0) c = 0.0;  // -0 -> +0
      }

    LocalEmbedding candidate = emb;
    candidate.dim = dim;
    candidate.coords = std::move(coords);
    const auto [lo, hi] = certify(candidate, tree);
    candidate.certified_lower = lo;
    candidate.certified_upper = hi;
    if (hi <= config.L_cap && lo >= 1.0 - kRelSlack) return candidate;
    attempts += " dim " + std::to_string(dim) + ": L = " + std::to_string(hi) + ";";
  }
  throw EmbeddingFailure("no certified embedding within L_cap " + std::to_string(config.L_cap) +
                         " for piece (" + std::to_string(piece.level) + "," +
                         std::to_string(piece.index) + ") up to dimension 8:" + attempts);
}

std::vector<VertexId> piece_gates(const MetricTree& tree, const Piece& piece) {
  const std::size_t n = tree.vertex_count();
  std::vector<VertexId> gate(n, n < 1 ? 0 : VertexId(n));
  std::vector<VertexId> queue;
  queue.reserve(n);
  for (VertexId v : piece.members) {
    gate[v] = v;
    queue.push_back(v);
  }
  // BFS outward: each complementary component is reachable only through the
  // single member it attaches to, which therefore labels all of it.
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const VertexId u = queue[head];
    for (VertexId v : tree.neighbors(u)) {
      if (gate[v] != VertexId(n)) continue;
      gate[v] = gate[u];
      queue.push_back(v);
    }
  }
  return gate;
}

std::vector<double> extend_value(const MetricTree& tree, const Piece& piece,
                                 const LocalEmbedding& emb, VertexId x) {
  const VertexId g = tree.gate(x, piece.members);
  const auto p = emb.point(emb.member_index(g));
  return {p.begin(), p.end()};
}

void pad_dimension(LocalEmbedding& emb, int new_dim) {
  if (new_dim < emb.dim) throw ValidationError("pad_dimension cannot shrink an embedding");
  if (new_dim == emb.dim) return;
  std::vector<double> coords(emb.members.size() * std::size_t(new_dim), 0.0);
  for (std::size_t i = 0; i < emb.members.size(); ++i)
    for (int k = 0; k < emb.dim; ++k)
      coords[i * std::size_t(new_dim) + std::size_t(k)] =
          emb.coords[i * std::size_t(emb.dim) + std::size_t(k)];
  emb.coords = std::move(coords);
  emb.dim = new_dim;
}

}  // namespace qct
