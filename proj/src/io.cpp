#include "qct/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "qct/errors.hpp"

namespace qct {
namespace {

using nlohmann::json;

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open file for writing");
  out << text;
  if (!out.good()) throw ParseError(path + ": write failed");
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string g17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::vector<VertexId> vertex_list(const json& j, std::size_t n_vertices,
                                  const std::string& context) {
  std::vector<VertexId> out;
  for (const auto& e : j) {
    const std::uint64_t v = e.get<std::uint64_t>();
    if (v >= n_vertices) throw ParseError(context + ": vertex id " + std::to_string(v) +
                                          " out of range");
    out.push_back(static_cast<VertexId>(v));
  }
  return out;
}

}  // namespace

MetricTree load_tree(const std::string& path) {
  const json j = parse_file(path);
  try {
    const std::size_t n = j.at("vertices").get<std::size_t>();
    std::vector<std::pair<VertexId, VertexId>> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw ParseError(path + ": edge is not a pair");
      edges.push_back({e[0].get<VertexId>(), e[1].get<VertexId>()});
    }
    const bool has_metric = j.contains("metric");
    const bool has_lengths = j.contains("edge_lengths");
    if (has_metric == has_lengths)
      throw ParseError(path + ": exactly one of 'metric' and 'edge_lengths' is required");
    if (has_metric) {
      std::vector<double> metric;
      for (const auto& e : j.at("metric")) metric.push_back(e.get<double>());
      if (metric.size() != n * n) throw ParseError(path + ": metric is not a full matrix");
      return MetricTree::from_metric(n, edges, metric);
    }
    std::vector<double> lengths;
    for (const auto& e : j.at("edge_lengths")) lengths.push_back(e.get<double>());
    if (lengths.size() != edges.size())
      throw ParseError(path + ": edge_lengths does not match edges");
    return MetricTree::from_edge_lengths(n, edges, lengths);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_tree(const MetricTree& tree, const std::string& path) {
  json j;
  j["vertices"] = tree.vertex_count();
  json edges = json::array();
  for (const auto& [a, b] : tree.edges()) edges.push_back({a, b});
  j["edges"] = std::move(edges);
  j["metric"] = tree.metric();
  write_json(path, j);
}

void save_decomposition(const Decomposition& dec, const std::string& path) {
  json j;
  j["n_max"] = dec.n_max;
  j["vertices"] = dec.membership.size();
  json pieces = json::array();
  for (const Piece& p : dec.pieces) {
    json e;
    e["n"] = p.level;
    e["j"] = p.index;
    e["root"] = p.root;
    e["members"] = p.members;
    e["new_net_points"] = p.new_net_points;
    pieces.push_back(std::move(e));
  }
  j["pieces"] = std::move(pieces);
  json hulls = json::array();
  for (std::size_t n = 0; n < dec.hulls.size(); ++n) {
    json e;
    e["n"] = n + 1;
    e["vertices"] = dec.hulls[n];
    hulls.push_back(std::move(e));
  }
  j["hulls"] = std::move(hulls);
  write_json(path, j);
}

Decomposition load_decomposition(const std::string& path, const MetricTree& tree) {
  const json j = parse_file(path);
  try {
    Decomposition dec;
    dec.n_max = j.at("n_max").get<int>();
    const std::size_t n_vertices = j.at("vertices").get<std::size_t>();
    if (n_vertices != tree.vertex_count())
      throw ParseError(path + ": vertex count does not match the tree");
    if (dec.n_max < 1) throw ParseError(path + ": n_max must be positive");
    for (const auto& e : j.at("pieces")) {
      Piece p;
      p.level = e.at("n").get<int>();
      p.index = e.at("j").get<int>();
      const std::uint64_t root = e.at("root").get<std::uint64_t>();
      if (root >= n_vertices) throw ParseError(path + ": piece root out of range");
      p.root = static_cast<VertexId>(root);
      p.members = vertex_list(e.at("members"), n_vertices, path);
      p.new_net_points = vertex_list(e.at("new_net_points"), n_vertices, path);
      if (p.members.empty()) throw ParseError(path + ": piece with no members");
      if (p.level < 1 || p.level > dec.n_max) throw ParseError(path + ": piece level out of range");
      dec.pieces.push_back(std::move(p));
    }
    if (dec.pieces.empty() || dec.pieces.front().level != 1)
      throw ParseError(path + ": first piece must sit at level 1");
    for (const auto& e : j.at("hulls"))
      dec.hulls.push_back(vertex_list(e.at("vertices"), n_vertices, path));
    if (dec.hulls.size() != std::size_t(dec.n_max))
      throw ParseError(path + ": hull count does not match n_max");
    dec.level_pieces.assign(std::size_t(dec.n_max), {});
    for (std::uint32_t id = 0; id < dec.pieces.size(); ++id)
      dec.level_pieces[std::size_t(dec.pieces[id].level) - 1].push_back(id);
    dec.membership.assign(n_vertices, {});
    for (std::uint32_t id = 0; id < dec.pieces.size(); ++id)
      for (const VertexId v : dec.pieces[id].members) dec.membership[v].push_back(id);
    dec.root_piece = 0;
    return dec;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

namespace {
std::string piece_key(int level, int index) {
  return "(" + std::to_string(level) + "," + std::to_string(index) + ")";
}
}  // namespace

void save_coloring(const Coloring& coloring, const Decomposition& dec, const std::string& path) {
  json colors = json::object();
  for (std::size_t p = 0; p < dec.pieces.size(); ++p)
    colors[piece_key(dec.pieces[p].level, dec.pieces[p].index)] = coloring.assignment[p];
  json j;
  j["S"] = coloring.S;
  j["A"] = coloring.A;
  j["colors"] = std::move(colors);
  write_json(path, j);
}

Coloring load_coloring(const std::string& path, const Decomposition& dec) {
  const json j = parse_file(path);
  try {
    Coloring coloring;
    coloring.S = j.at("S").get<double>();
    coloring.A = j.at("A").get<int>();
    const json& colors = j.at("colors");
    if (colors.size() != dec.pieces.size())
      throw ParseError(path + ": color count does not match the decomposition");
    for (const Piece& p : dec.pieces) {
      const std::string key = piece_key(p.level, p.index);
      if (!colors.contains(key)) throw ParseError(path + ": missing color for piece " + key);
      coloring.assignment.push_back(colors.at(key).get<int>());
    }
    return coloring;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_locals(const std::vector<LocalEmbedding>& locals, const std::string& path) {
  json pieces = json::array();
  for (const LocalEmbedding& lp : locals) {
    json e;
    e["n"] = lp.level;
    e["j"] = lp.index;
    e["d"] = lp.dim;
    e["lower"] = lp.certified_lower;
    e["upper"] = lp.certified_upper;
    e["members"] = lp.members;
    e["coords"] = lp.coords;
    pieces.push_back(std::move(e));
  }
  json j;
  j["pieces"] = std::move(pieces);
  write_json(path, j);
}

std::vector<LocalEmbedding> load_locals(const std::string& path) {
  const json j = parse_file(path);
  try {
    std::vector<LocalEmbedding> locals;
    for (const auto& e : j.at("pieces")) {
      LocalEmbedding lp;
      lp.level = e.at("n").get<int>();
      lp.index = e.at("j").get<int>();
      lp.dim = e.at("d").get<int>();
      lp.certified_lower = e.at("lower").get<double>();
      lp.certified_upper = e.at("upper").get<double>();
      for (const auto& m : e.at("members")) lp.members.push_back(m.get<VertexId>());
      for (const auto& c : e.at("coords")) lp.coords.push_back(c.get<double>());
      if (lp.dim < 1) throw ParseError(path + ": non-positive dimension");
      if (!std::is_sorted(lp.members.begin(), lp.members.end()) ||
          std::adjacent_find(lp.members.begin(), lp.members.end()) != lp.members.end())
        throw ParseError(path + ": members must be sorted and distinct");
      if (lp.coords.size() != lp.members.size() * std::size_t(lp.dim))
        throw ParseError(path + ": coordinate count does not match members x dim");
      locals.push_back(std::move(lp));
    }
    return locals;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_constants(const GlobalConstants& constants, const std::string& path) {
  json j;
  j["L"] = constants.L;
  j["M"] = constants.M;
  j["N"] = constants.N;
  j["S"] = constants.S;
  j["A"] = constants.A;
  j["d"] = constants.d;
  j["lower"] = constants.theoretical_lower;
  j["upper"] = constants.theoretical_upper;
  j["forced_N"] = constants.forced_N;
  write_json(path, j);
}

GlobalConstants load_constants(const std::string& path) {
  const json j = parse_file(path);
  try {
    GlobalConstants c;
    c.L = j.at("L").get<double>();
    c.M = j.at("M").get<int>();
    c.N = j.at("N").get<int>();
    c.S = j.at("S").get<double>();
    c.A = j.at("A").get<int>();
    c.d = j.at("d").get<int>();
    c.theoretical_lower = j.at("lower").get<double>();
    c.theoretical_upper = j.at("upper").get<double>();
    c.forced_N = j.at("forced_N").get<bool>();
    return c;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_embedding_csv(const GlobalEmbedding& emb, const std::string& path) {
  std::ostringstream out;
  out << "vertex";
  for (int k = 0; k < emb.ambient; ++k) out << ",c" << k;
  out << "\n";
  for (VertexId v = 0; v < emb.vertex_count; ++v) {
    out << v;
    const auto row = emb.point(v);
    for (const double x : row) out << ',' << g17(x);
    out << "\n";
  }
  write_text(path, out.str());
}

EmbeddingTable load_embedding_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  int ambient = 0;
  {
    std::stringstream header(line);
    std::string tok;
    if (!std::getline(header, tok, ',') || tok != "vertex")
      throw ParseError(path + ": header must start with 'vertex'");
    while (std::getline(header, tok, ',')) ++ambient;
    if (ambient < 1) throw ParseError(path + ": header has no coordinate columns");
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<double> row;
    if (!std::getline(ss, tok, ',')) throw ParseError(path + ": short row");
    char* end = nullptr;
    const unsigned long id = std::strtoul(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0') throw ParseError(path + ": bad vertex id '" + tok + "'");
    if (id != rows.size()) throw ParseError(path + ": vertex rows must be consecutive from 0");
    while (std::getline(ss, tok, ',')) {
      end = nullptr;
      const double x = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0') throw ParseError(path + ": bad number '" + tok + "'");
      row.push_back(x);
    }
    if (row.size() != std::size_t(ambient))
      throw ParseError(path + ": row width does not match header");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path + ": no data rows");
  EmbeddingTable table;
  table.vertex_count = rows.size();
  table.ambient = ambient;
  table.coords.reserve(rows.size() * std::size_t(ambient));
  for (const auto& row : rows) table.coords.insert(table.coords.end(), row.begin(), row.end());
  return table;
}

void save_audit_json(const AuditReport& report, const std::string& path) {
  json j;
  j["all_pass"] = report.all_pass();
  j["pairs_checked"] = report.pairs_checked;
  j["clamped_pairs"] = report.clamped_pairs;
  j["empty_middle_bands"] = report.empty_middle_bands;
  json checks = json::array();
  for (const CheckResult& c : report.checks) {
    json e;
    e["check"] = c.name;
    e["pass"] = c.pass;
    e["violations"] = c.violation_count;
    e["witnesses"] = c.witnesses;
    checks.push_back(std::move(e));
  }
  j["checks"] = std::move(checks);
  const DistortionReport& d = report.distortion;
  json dj;
  dj["pairs"] = d.pair_count;
  dj["exhaustive"] = d.exhaustive;
  dj["a"] = d.a_measured;
  dj["b"] = d.b_measured;
  dj["distortion"] = d.distortion;
  dj["argmin"] = {d.argmin_x, d.argmin_y};
  dj["argmax"] = {d.argmax_x, d.argmax_y};
  dj["theoretical_lower"] = d.theoretical_lower;
  dj["theoretical_upper"] = d.theoretical_upper;
  dj["pass_lower"] = d.pass_lower;
  dj["pass_upper"] = d.pass_upper;
  dj["histogram"] = d.histogram;
  dj["hist_log10_lo"] = d.hist_lo;
  dj["hist_log10_hi"] = d.hist_hi;
  j["distortion"] = std::move(dj);
  json stats = json::array();
  for (const PieceStats& s : report.decomposition.piece_stats) {
    json e;
    e["n"] = s.level;
    e["j"] = s.index;
    e["diameter"] = s.diameter;
    e["leaves"] = s.leaf_count;
    e["arcs"] = s.arc_count;
    stats.push_back(std::move(e));
  }
  j["piece_stats"] = std::move(stats);
  write_json(path, j);
}

void save_pair_ratios_csv(const MetricTree& tree, const GlobalEmbedding& emb,
                          const std::string& path) {
  std::ostringstream out;
  out << "x,y,distance,norm,ratio\n";
  const std::size_t n = tree.vertex_count();
  for (VertexId x = 0; x < n; ++x) {
    for (VertexId y = x + 1; y < n; ++y) {
      const double dist = tree.distance(x, y);
      double s = 0.0;
      const auto a = emb.point(x), b = emb.point(y);
      for (std::size_t k = 0; k < a.size(); ++k) {
        const double t = a[k] - b[k];
        s += t * t;
      }
      const double norm = std::sqrt(s);
      out << x << ',' << y << ',' << g17(dist) << ',' << g17(norm) << ',' << g17(norm / dist)
          << "\n";
    }
  }
  write_text(path, out.str());
}

}  // namespace qct
