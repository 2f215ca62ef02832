#include "qct/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

#include "qct/errors.hpp"
#include "qct/util.hpp"

namespace qct {
namespace {

PipelineResult single_vertex_result(const MetricTree& input, const PipelineOptions& options) {
  PipelineResult r;
  r.tree = input;
  r.nets.levels = {{0}};
  r.nets.n_max = 1;
  Piece piece;
  piece.level = 1;
  piece.index = 1;
  piece.root = 0;
  piece.members = {0};
  piece.new_net_points = {0};
  r.dec.pieces.push_back(std::move(piece));
  r.dec.hulls = {{0}};
  r.dec.level_pieces = {{0}};
  r.dec.membership = {{0}};
  r.dec.root_piece = 0;
  r.dec.n_max = 1;

  GlobalConstants constants = choose_constants(1.0, 1, 1, options.dim);
  r.graph.S = constants.S;
  r.graph.piece_count = 1;
  r.graph.adjacency.resize(1);
  r.coloring.S = constants.S;
  r.coloring.assignment = {1};
  r.coloring.A = 1;

  LocalEmbedding local;
  local.level = 1;
  local.index = 1;
  local.dim = options.dim;
  local.members = {0};
  local.coords.assign(std::size_t(options.dim), 0.0);
  r.locals.push_back(std::move(local));

  r.emb.constants = constants;
  r.emb.ambient = constants.A * constants.d;
  r.emb.vertex_count = 1;
  r.emb.coords.assign(std::size_t(r.emb.ambient), 0.0);
  r.emb.root = 0;
  return r;
}

}  // namespace

PipelineResult run_pipeline(const MetricTree& input, const PipelineOptions& options) {
  if (options.dim < 1 || options.dim > 8)
    throw ValidationError("run_pipeline: dim must be in [1, 8]");
  if (options.threads < 1) throw ValidationError("run_pipeline: threads must be positive");
  if (options.forced_N < 0) throw ValidationError("run_pipeline: forced_N must be nonnegative");
  if (input.vertex_count() == 0) throw ValidationError("run_pipeline: empty tree");
  if (input.vertex_count() == 1) return single_vertex_result(input, options);

  PipelineResult r;
  r.tree = input.normalize();
  r.nets = build_nets(r.tree);
  r.dec = decompose(r.tree, r.nets);

  const std::size_t n_pieces = r.dec.pieces.size();
  r.locals.resize(n_pieces);
  const auto embed_one = [&](std::size_t p) {
    const Piece& piece = r.dec.pieces[p];
    LocalEmbedConfig cfg;
    cfg.dim = options.dim;
    cfg.max_iterations = options.max_iterations;
    cfg.L_cap = options.L_cap;
    cfg.seed = options.seed ^ splitmix64((std::uint64_t(std::uint32_t(piece.level)) << 32) ^
                                         std::uint64_t(std::uint32_t(piece.index)));
    r.locals[p] = embed_piece(r.tree, piece, cfg);
  };
  if (options.threads > 1 && n_pieces > 1) {
    // per-piece seeds are fixed up front and every slot is written once, so
    // the schedule cannot change the result
    std::atomic<std::size_t> cursor{0};
    std::atomic<bool> failed{false};
    std::mutex mu;
    std::exception_ptr err;
    const auto worker = [&] {
      for (std::size_t p = cursor.fetch_add(1); p < n_pieces && !failed.load();
           p = cursor.fetch_add(1)) {
        try {
          embed_one(p);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!err) err = std::current_exception();
          failed.store(true);
        }
      }
    };
    std::vector<std::thread> pool;
    const std::size_t workers = std::min<std::size_t>(std::size_t(options.threads), n_pieces);
    pool.reserve(workers);
    for (std::size_t c = 0; c < workers; ++c) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
  } else {
    for (std::size_t p = 0; p < n_pieces; ++p) embed_one(p);
  }

  // dimension escalation in any one piece pads every other piece with zeros
  int d_use = options.dim;
  for (const auto& lp : r.locals) d_use = std::max(d_use, lp.dim);
  for (auto& lp : r.locals) pad_dimension(lp, d_use);

  double worst = 1.0;
  for (const auto& lp : r.locals) worst = std::max(worst, lp.certified_upper);
  const int m = compute_M(r.tree, r.dec);
  GlobalConstants constants = options.forced_N > 0
                                  ? choose_constants_forced(worst, m, 0, d_use, options.forced_N)
                                  : choose_constants(worst, m, 0, d_use);
  r.graph = build_graph(r.tree, r.dec, constants.S);
  r.coloring = greedy_color(r.graph);
  constants.A = r.coloring.A;
  r.emb = assemble(r.tree, r.dec, r.coloring, r.locals, constants);
  return r;
}

}  // namespace qct
