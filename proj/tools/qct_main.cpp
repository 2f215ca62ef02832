#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qct/errors.hpp"
#include "qct/generators.hpp"
#include "qct/io.hpp"
#include "qct/pipeline.hpp"
#include "qct/verify.hpp"

namespace fs = std::filesystem;

namespace {

struct GenOpts {
  std::string kind, output, spec_path;
  int legs = 3, samples = 5, depth = 3;
  std::size_t vertices = 65;
  double alpha = 0.5;
  std::uint64_t seed = 0;
};

struct DecomposeOpts {
  std::string input, output;
};

struct EmbedOpts {
  std::string input, output;
  std::uint64_t seed = 0;
  int dim = 3, force_n = 0, threads = 1;
};

struct AuditCmdOpts {
  std::string input, embedding, output, pairs_csv;
  std::string audit = "exhaustive";
  std::uint64_t seed = 0;
  int threads = 1;
};

qct::GeneratorSpec spec_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qct::ParseError(path + ": cannot open file");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    qct::GeneratorSpec spec;
    spec.kind = j.at("kind").get<std::string>();
    if (j.contains("legs")) spec.legs = j.at("legs").get<int>();
    if (j.contains("samples")) spec.samples = j.at("samples").get<int>();
    if (j.contains("vertices")) spec.vertices = j.at("vertices").get<std::size_t>();
    if (j.contains("depth")) spec.depth = j.at("depth").get<int>();
    if (j.contains("alpha")) spec.alpha = j.at("alpha").get<double>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw qct::ParseError(path + ": " + e.what());
  }
}

int cmd_gen(const GenOpts& o) {
  qct::GeneratorSpec spec;
  if (!o.spec_path.empty()) {
    spec = spec_from_file(o.spec_path);
  } else {
    if (o.kind.empty())
      throw qct::ValidationError("gen: provide --kind or --spec");
    spec.kind = o.kind;
    spec.legs = o.legs;
    spec.samples = o.samples;
    spec.vertices = o.vertices;
    spec.depth = o.depth;
    spec.alpha = o.alpha;
    spec.seed = o.seed;
  }
  const qct::MetricTree tree = qct::generate(spec);
  qct::save_tree(tree, o.output);
  std::cout << "kind=" << spec.kind << " vertices=" << tree.vertex_count() << "\n";
  return 0;
}

int cmd_decompose(const DecomposeOpts& o) {
  const qct::MetricTree tree = qct::load_tree(o.input).normalize();
  const qct::NetHierarchy nets = qct::build_nets(tree);
  const qct::Decomposition dec = qct::decompose(tree, nets);
  const qct::DecompositionAudit audit = qct::audit_pieces(tree, nets, dec);
  qct::save_decomposition(dec, o.output);
  for (int n = 1; n <= dec.n_max; ++n)
    std::cout << "level " << n << ": " << dec.level_pieces[std::size_t(n) - 1].size()
              << " pieces\n";
  for (const auto& c : audit.checks)
    if (!c.pass) std::cout << "FAIL " << c.name << "\n";
  std::cout << (audit.all_pass() ? "STRUCTURE PASS" : "STRUCTURE FAIL") << " pieces="
            << dec.pieces.size() << " n_max=" << dec.n_max << "\n";
  return audit.all_pass() ? 0 : 1;
}

int cmd_embed(const EmbedOpts& o) {
  const qct::MetricTree input = qct::load_tree(o.input);
  qct::PipelineOptions opts;
  opts.dim = o.dim;
  opts.seed = o.seed;
  opts.threads = o.threads;
  opts.forced_N = o.force_n;
  const qct::PipelineResult r = qct::run_pipeline(input, opts);
  fs::create_directories(o.output);
  const auto at = [&](const char* name) { return (fs::path(o.output) / name).string(); };
  qct::save_decomposition(r.dec, at("decomposition.json"));
  qct::save_coloring(r.coloring, r.dec, at("coloring.json"));
  qct::save_locals(r.locals, at("locals.json"));
  qct::save_constants(r.emb.constants, at("constants.json"));
  qct::save_embedding_csv(r.emb, at("embedding.csv"));
  const qct::GlobalConstants& c = r.emb.constants;
  std::printf("%.17g %d %d %.17g %d %d %.17g %.17g\n", c.L, c.M, c.N, c.S, c.A, c.d,
              c.theoretical_lower, c.theoretical_upper);
  return 0;
}

struct Bundle {
  qct::MetricTree tree;  // normalized
  qct::NetHierarchy nets;
  qct::Decomposition dec;
  qct::Coloring coloring;
  std::vector<qct::LocalEmbedding> locals;
  qct::GlobalConstants constants;
  qct::EmbeddingTable table;
  qct::ProximityGraph graph;
  qct::GlobalEmbedding emb;  // reassembled from the artifacts
  qct::CheckResult consistency{"embedding_file_consistent"};
};

Bundle load_bundle(const std::string& tree_path, const std::string& dir) {
  Bundle b;
  b.tree = qct::load_tree(tree_path).normalize();
  const auto at = [&](const char* name) { return (fs::path(dir) / name).string(); };
  b.nets = qct::build_nets(b.tree);
  b.dec = qct::load_decomposition(at("decomposition.json"), b.tree);
  b.coloring = qct::load_coloring(at("coloring.json"), b.dec);
  b.locals = qct::load_locals(at("locals.json"));
  b.constants = qct::load_constants(at("constants.json"));
  b.table = qct::load_embedding_csv(at("embedding.csv"));
  b.graph = qct::build_graph(b.tree, b.dec, b.constants.S);
  b.emb = qct::assemble(b.tree, b.dec, b.coloring, b.locals, b.constants);
  if (b.table.vertex_count != b.emb.vertex_count || b.table.ambient != b.emb.ambient) {
    b.consistency.fail("stored table shape differs from the reassembled map");
  } else {
    for (std::size_t v = 0; v < b.table.vertex_count; ++v) {
      const std::size_t amb = std::size_t(b.table.ambient);
      if (std::memcmp(b.table.coords.data() + v * amb, b.emb.coords.data() + v * amb,
                      amb * sizeof(double)) != 0)
        b.consistency.fail("vertex " + std::to_string(v) +
                           " differs bitwise from the reassembled map");
    }
  }
  return b;
}

int run_audit(const AuditCmdOpts& o, bool want_report, bool want_pairs) {
  const qct::MetricTree raw = qct::load_tree(o.input);
  if (raw.vertex_count() == 1) {
    const auto table =
        qct::load_embedding_csv((fs::path(o.embedding) / "embedding.csv").string());
    bool ok = table.vertex_count == 1;
    for (const double x : table.coords) ok = ok && x == 0.0;
    std::cout << (ok ? "AUDIT PASS" : "AUDIT FAIL") << " single-vertex tree\n";
    return ok ? 0 : 1;
  }
  const Bundle b = load_bundle(o.input, o.embedding);
  qct::AuditOptions opts;
  opts.exhaustive = o.audit != "fast";
  opts.seed = o.seed;
  opts.threads = o.threads;
  qct::AuditReport rep =
      qct::audit_all(b.tree, b.nets, b.dec, b.graph, b.coloring, b.locals, b.emb, opts);
  rep.checks.push_back(b.consistency);
  if (want_report && !o.output.empty()) qct::save_audit_json(rep, o.output);
  if (want_pairs && !o.pairs_csv.empty()) qct::save_pair_ratios_csv(b.tree, b.emb, o.pairs_csv);
  for (const auto& c : rep.checks) {
    if (c.pass) continue;
    std::cout << "FAIL " << c.name << " violations=" << c.violation_count << "\n";
    for (const auto& w : c.witnesses) std::cout << "  " << w << "\n";
  }
  const bool pass = rep.all_pass();
  std::cout << (pass ? "AUDIT PASS" : "AUDIT FAIL") << " checks=" << rep.checks.size()
            << " pairs=" << rep.pairs_checked << " distortion=" << rep.distortion.distortion
            << " a=" << rep.distortion.a_measured << " b=" << rep.distortion.b_measured << "\n";
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"constructive bi-Lipschitz embeddings of quasiconformal trees"};
  app.require_subcommand(1);

  GenOpts gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a tree and write it as JSON");
  gen_cmd->add_option("--kind", gen.kind, "star | path | koch | snowflake | vicsek | random");
  gen_cmd->add_option("--spec", gen.spec_path, "generator spec JSON (overrides other flags)");
  gen_cmd->add_option("--legs", gen.legs, "star legs");
  gen_cmd->add_option("--samples", gen.samples, "vertices per star leg");
  gen_cmd->add_option("--vertices", gen.vertices, "vertex count for path/snowflake/random");
  gen_cmd->add_option("--depth", gen.depth, "recursion depth for koch/vicsek");
  gen_cmd->add_option("--alpha", gen.alpha, "snowflake exponent in [0.4, 1]");
  gen_cmd->add_option("--seed", gen.seed, "seed for random trees");
  gen_cmd->add_option("--output", gen.output, "output tree JSON")->required();

  DecomposeOpts dec;
  auto* dec_cmd = app.add_subcommand("decompose", "normalize, build nets, and split into pieces");
  dec_cmd->add_option("--input", dec.input, "tree JSON")->required();
  dec_cmd->add_option("--output", dec.output, "decomposition JSON")->required();

  EmbedOpts emb;
  auto* emb_cmd = app.add_subcommand("embed", "run the full construction and write the bundle");
  emb_cmd->add_option("--input", emb.input, "tree JSON")->required();
  emb_cmd->add_option("--output", emb.output, "bundle directory")->required();
  emb_cmd->add_option("--seed", emb.seed, "seed for the local refinements");
  emb_cmd->add_option("--dim", emb.dim, "local embedding dimension (1..8)");
  emb_cmd->add_option("--force-N", emb.force_n, "override the separation exponent (0 = minimal)");
  emb_cmd->add_option("--threads", emb.threads, "worker threads");

  AuditCmdOpts ver;
  auto* ver_cmd = app.add_subcommand("verify", "audit a bundle against its tree");
  ver_cmd->add_option("--input", ver.input, "tree JSON")->required();
  ver_cmd->add_option("--embedding", ver.embedding, "bundle directory")->required();
  ver_cmd->add_option("--audit", ver.audit, "fast | exhaustive")
      ->check(CLI::IsMember({"fast", "exhaustive"}));
  ver_cmd->add_option("--threads", ver.threads, "worker threads");
  ver_cmd->add_option("--seed", ver.seed, "seed for sampled audits");
  ver_cmd->add_option("--output", ver.output, "optional audit report JSON");

  AuditCmdOpts rpt;
  auto* rpt_cmd = app.add_subcommand("report", "audit and write the full report");
  rpt_cmd->add_option("--input", rpt.input, "tree JSON")->required();
  rpt_cmd->add_option("--embedding", rpt.embedding, "bundle directory")->required();
  rpt_cmd->add_option("--output", rpt.output, "audit report JSON")->required();
  rpt_cmd->add_option("--pairs-csv", rpt.pairs_csv, "optional per-pair ratio CSV");
  rpt_cmd->add_option("--audit", rpt.audit, "fast | exhaustive")
      ->check(CLI::IsMember({"fast", "exhaustive"}));
  rpt_cmd->add_option("--threads", rpt.threads, "worker threads");
  rpt_cmd->add_option("--seed", rpt.seed, "seed for sampled audits");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(gen_cmd)) return cmd_gen(gen);
    if (app.got_subcommand(dec_cmd)) return cmd_decompose(dec);
    if (app.got_subcommand(emb_cmd)) return cmd_embed(emb);
    if (app.got_subcommand(ver_cmd)) return run_audit(ver, true, false);
    if (app.got_subcommand(rpt_cmd)) return run_audit(rpt, true, true);
  } catch (const qct::EmbeddingFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const qct::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const qct::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
