/// End-to-end acceptance runner: builds the full corpus of generator trees,
/// runs the pipeline and the exhaustive audit on each, and aggregates the
/// results into eight pass/fail criteria printed one per line.  Exits 0 only
/// if every criterion holds.
#include <chrono>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "helpers.hpp"
#include "oracle.hpp"
#include "qct/generators.hpp"
#include "qct/pipeline.hpp"
#include "qct/proximity.hpp"
#include "qct/verify.hpp"

using namespace qct;

namespace {

struct Run {
  std::string name;
  PipelineResult r;
  AuditReport rep;
};

struct Criterion {
  explicit Criterion(std::string l) : label(std::move(l)) {}

  std::string label;
  bool pass = true;
  std::vector<std::string> notes;

  void fail(std::string note) {
    pass = false;
    notes.push_back(std::move(note));
  }
};

void require_checks(const std::vector<Run>& runs, std::initializer_list<const char*> names,
                    Criterion& c) {
  for (const Run& run : runs)
    for (const char* nm : names) {
      const CheckResult* chk = run.rep.find(nm);
      if (chk == nullptr)
        c.fail(run.name + ": check '" + nm + "' missing");
      else if (!chk->pass)
        c.fail(run.name + ": " + nm +
               (chk->witnesses.empty() ? "" : " - " + chk->witnesses.front()));
    }
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<std::pair<std::string, MetricTree>> corpus;
  corpus.emplace_back("star-3x5", make_star(3, 5));
  corpus.emplace_back("star-5x5", make_star(5, 5));
  corpus.emplace_back("path-65", make_path(65));
  corpus.emplace_back("koch-3", make_koch_arc(3));
  corpus.emplace_back("koch-4", make_koch_arc(4));
  corpus.emplace_back("snowflake-0.5", make_snowflake_path(0.5, 33));
  corpus.emplace_back("snowflake-0.7", make_snowflake_path(0.7, 33));
  corpus.emplace_back("vicsek-2", make_vicsek(2));
  corpus.emplace_back("vicsek-3", make_vicsek(3));
  for (std::uint64_t seed : {1, 2, 3})
    corpus.emplace_back("random-50-s" + std::to_string(seed), make_random_tree(50, seed));
  for (std::uint64_t seed : {1, 2, 3})
    corpus.emplace_back("random-200-s" + std::to_string(seed), make_random_tree(200, seed));

  std::vector<Run> runs;
  runs.reserve(corpus.size());
  for (auto& [name, tree] : corpus) {
    PipelineOptions po;
    po.threads = 2;
    AuditOptions ao;
    ao.threads = 2;
    ao.exhaustive = true;  // every corpus tree is small enough for all pairs
    Run run{name, run_pipeline(tree, po), {}};
    run.rep = audit_all(run.r.tree, run.r.nets, run.r.dec, run.r.graph, run.r.coloring,
                        run.r.locals, run.r.emb, ao);
    runs.push_back(std::move(run));
  }

  std::vector<Criterion> criteria;

  // 1: every decomposition satisfies the structural axioms, and doctored
  // decompositions are rejected by the same audit.
  {
    Criterion c("decomposition axioms hold and tampering is detected");
    for (const Run& run : runs)
      if (!run.rep.decomposition.all_pass())
        c.fail(run.name + ": structural audit failed");

    const MetricTree sb = fixtures::side_branch().normalize();
    const NetHierarchy sb_nets = build_nets(sb);
    Decomposition bad_root = decompose(sb, sb_nets);
    bad_root.pieces[1].root = 4;
    if (audit_pieces(sb, sb_nets, bad_root).all_pass())
      c.fail("side branch with a displaced piece root was not rejected");
    else
      c.notes.push_back("control: displaced piece root rejected");

    const MetricTree vi = make_vicsek(2).normalize();
    const NetHierarchy vi_nets = build_nets(vi);
    Decomposition bad_members = decompose(vi, vi_nets);
    bad_members.pieces[2].members.pop_back();
    if (audit_pieces(vi, vi_nets, bad_members).all_pass())
      c.fail("fractal with a dropped piece member was not rejected");
    else
      c.notes.push_back("control: dropped piece member rejected");
    criteria.push_back(std::move(c));
  }

  // 2: colorings are proper and reproduce the deterministic greedy order.
  {
    Criterion c("proximity colorings are proper and deterministic");
    require_checks(runs, {"coloring_proper", "coloring_matches_greedy"}, c);
    for (const Run& run : runs) {
      const Coloring again = greedy_color(run.r.graph);
      const Coloring twice = greedy_color(run.r.graph);
      if (again.assignment != run.r.coloring.assignment || again.A != run.r.coloring.A)
        c.fail(run.name + ": recolored assignment differs from the pipeline's");
      if (again.assignment != twice.assignment)
        c.fail(run.name + ": greedy coloring changed between runs");
    }
    criteria.push_back(std::move(c));
  }

  // 3: every pair traversal attains its minimum level exactly once (checked
  // over all vertex pairs; the audits above ran exhaustively).
  {
    Criterion c("traversals have the single-valley shape");
    require_checks(runs, {"traversal_valley", "traversal_tiling"}, c);
    for (const Run& run : runs) {
      const std::size_t v = run.r.tree.vertex_count();
      if (run.rep.pairs_checked != std::uint64_t(v) * (v - 1) / 2)
        c.fail(run.name + ": audit did not cover all vertex pairs");
    }
    criteria.push_back(std::move(c));
  }

  // 4: every local embedding carries a certificate inside the caps, and the
  // gate extensions obey their constancy and Lipschitz laws.
  {
    Criterion c("local certificates and extension laws hold");
    require_checks(runs,
                   {"local_certification", "extension_constancy", "extension_lipschitz"}, c);
    for (const Run& run : runs)
      for (const LocalEmbedding& lp : run.r.locals) {
        if (!(lp.certified_lower >= 1.0 - 1e-9))
          c.fail(run.name + ": certified lower below one");
        if (!(lp.certified_upper <= 64.0 * (1.0 + 1e-9)))
          c.fail(run.name + ": certified upper above the cap");
      }
    criteria.push_back(std::move(c));
  }

  // 5: the assembled map is exact: it vanishes off root paths, restricts to
  // the locals piece by piece, and its path sums reproduce the rows.
  {
    Criterion c("assembly is exact and telescopes");
    require_checks(runs,
                   {"path_sum_equality", "vanishing_off_root_paths", "per_piece_restriction",
                    "assembly_root_origin", "telescoping"},
                   c);
    criteria.push_back(std::move(c));
  }

  // 6: per-pair scale bands respect the cardinality and tail mass bounds.
  {
    Criterion c("scale bands obey cardinality and tail bounds");
    require_checks(runs, {"band_cardinality", "band_tails", "block_support"}, c);
    criteria.push_back(std::move(c));
  }

  // 7: measured distortion sits inside the theoretical envelope on every tree.
  {
    Criterion c("measured distortion stays inside the envelope");
    require_checks(runs, {"distortion_lower", "distortion_upper"}, c);
    for (const Run& run : runs) {
      const DistortionReport& d = run.rep.distortion;
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%s: a=%.6g b=%.6g distortion=%.6g", run.name.c_str(),
                    d.a_measured, d.b_measured, d.distortion);
      c.notes.push_back(buf);
      if (!(d.pass_lower && d.pass_upper && d.distortion >= 1.0))
        c.fail(run.name + ": distortion outside the envelope");
    }
    criteria.push_back(std::move(c));
  }

  // 8: a from-scratch reimplementation (different code path, set-based)
  // reproduces nets, hulls, pieces, the piece-count constant, and every pair
  // traversal on small trees.
  {
    Criterion c("independent recomputation matches on small trees");
    std::vector<std::pair<std::string, MetricTree>> small;
    small.emplace_back("y-tree", fixtures::y_tree());
    small.emplace_back("side-branch", fixtures::side_branch());
    small.emplace_back("path-9", fixtures::uniform_path(9));
    small.emplace_back("star-3x2", make_star(3, 2));
    small.emplace_back("koch-1", make_koch_arc(1));
    small.emplace_back("snowflake-9", make_snowflake_path(0.5, 9));
    small.emplace_back("random-12", make_random_tree(12, 7));
    small.emplace_back("random-11", make_random_tree(11, 9));
    for (auto& [name, raw] : small) {
      const MetricTree t = raw.normalize();
      const NetHierarchy nets = build_nets(t);
      const Decomposition dec = decompose(t, nets);
      const std::vector<std::string> mismatches =
          oracle::compare_all(t, nets, dec, compute_M(t, dec));
      for (const std::string& m : mismatches) c.fail(name + ": " + m);
      if (mismatches.empty()) c.notes.push_back(name + ": all fields agree");
    }
    criteria.push_back(std::move(c));
  }

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const Criterion& c = criteria[i];
    std::printf("[%s] criterion %zu: %s\n", c.pass ? "PASS" : "FAIL", i + 1, c.label.c_str());
    for (const std::string& note : c.notes) std::printf("    %s\n", note.c_str());
    if (!c.pass) ++failures;
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%zu trees audited in %.1fs, %d of %zu criteria failed\n", runs.size(), secs,
              failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
