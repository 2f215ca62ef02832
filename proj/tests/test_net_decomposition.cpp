#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "oracle.hpp"
#include "qct/decomposition.hpp"
#include "qct/errors.hpp"
#include "qct/generators.hpp"
#include "qct/nets.hpp"
#include "qct/util.hpp"
#include "qct/verify.hpp"

using namespace qct;

namespace {

struct Built {
  MetricTree tree;
  NetHierarchy nets;
  Decomposition dec;
};

Built build(const MetricTree& raw) {
  Built b;
  b.tree = raw.normalize();
  b.nets = build_nets(b.tree);
  b.dec = decompose(b.tree, b.nets);
  return b;
}

}  // namespace

TEST_CASE("scale index matches the dyadic definition") {
  // Hand-frozen anchors: 2^-(n+1) <= d <= 2^-n with ties to the larger n.
  CHECK(scale_index(1.0) == 0);
  CHECK(scale_index(0.7) == 0);
  CHECK(scale_index(0.5) == 1);  // tie
  CHECK(scale_index(0.3) == 1);
  CHECK(scale_index(0.25) == 2);  // tie
  CHECK(scale_index(0.2) == 2);
  CHECK(scale_index(0.1) == 3);
  CHECK(scale_index(0.0625) == 4);  // tie
  CHECK(scale_index(std::ldexp(1.0, -52)) == 52);
  CHECK_THROWS_AS(scale_index(0.0), ValidationError);
  CHECK_THROWS_AS(scale_index(-1.0), ValidationError);

  // Independent frexp-based recomputation across dyadic boundaries and a
  // seeded sweep of arbitrary distances.
  for (int k = 0; k <= 50; ++k) {
    const double p = std::ldexp(1.0, -k);
    CHECK(scale_index(p) == oracle::scale_index(p));
    CHECK(scale_index(std::nextafter(p, 0.0)) == oracle::scale_index(std::nextafter(p, 0.0)));
    CHECK(scale_index(std::nextafter(p, 2.0)) == oracle::scale_index(std::nextafter(p, 2.0)));
  }
  for (std::uint64_t i = 0; i < 20000; ++i) {
    const double d = canonical_double(splitmix64(i)) + 1e-12;
    CHECK(scale_index(d) == oracle::scale_index(d));
  }
}

TEST_CASE("side branch nets frozen by hand") {
  // Leaves 0, 3, 4 with d(0,3) = d(0,4) = 1 and d(3,4) = 0.2: the far pair is
  // picked at scale 1/2, the branch leaf only enters at scale 1/8.
  const Built b = build(fixtures::side_branch());
  REQUIRE(b.nets.n_max == 3);
  CHECK(b.nets.level(1) == std::vector<VertexId>{0, 3});
  CHECK(b.nets.level(2) == std::vector<VertexId>{0, 3});
  CHECK(b.nets.level(3) == std::vector<VertexId>{0, 3, 4});
  CHECK(oracle::nets(b.tree) == b.nets.levels);
}

TEST_CASE("side branch pieces frozen by hand") {
  const Built b = build(fixtures::side_branch());
  REQUIRE(b.dec.pieces.size() == 2);

  const Piece& trunk = b.dec.pieces[0];
  CHECK(trunk.level == 1);
  CHECK(trunk.index == 1);
  CHECK(trunk.root == 0);
  CHECK(trunk.members == std::vector<VertexId>{0, 1, 2, 3});
  CHECK(trunk.new_net_points == std::vector<VertexId>{0, 3});

  const Piece& branch = b.dec.pieces[1];
  CHECK(branch.level == 3);
  CHECK(branch.index == 1);
  CHECK(branch.root == 2);
  CHECK(branch.members == std::vector<VertexId>{2, 4});
  CHECK(branch.new_net_points == std::vector<VertexId>{4});

  CHECK(b.dec.hulls == std::vector<std::vector<VertexId>>{
                           {0, 1, 2, 3}, {0, 1, 2, 3}, {0, 1, 2, 3, 4}});
  CHECK(b.dec.level_pieces ==
        std::vector<std::vector<std::uint32_t>>{{0}, {}, {1}});  // level 2 adds nothing
  CHECK(b.dec.membership[2] == std::vector<std::uint32_t>{0, 1});
  CHECK(b.dec.root_piece == 0);
  CHECK(audit_pieces(b.tree, b.nets, b.dec).all_pass());
}

TEST_CASE("side branch traversals frozen by hand") {
  const Built b = build(fixtures::side_branch());

  const Traversal far = traversal(b.tree, b.dec, 3, 4);
  REQUIRE(far.entries.size() == 2);
  CHECK(far.entries[0].piece == 0);
  CHECK(far.entries[0].entry == 3);
  CHECK(far.entries[0].first_pos == 0);
  CHECK(far.entries[0].last_pos == 1);
  CHECK(far.entries[1].piece == 1);
  CHECK(far.entries[1].entry == 2);
  CHECK(far.entries[1].first_pos == 1);
  CHECK(far.entries[1].last_pos == 2);
  CHECK(far.terminal == 4);
  CHECK(far.valley == 0);
  CHECK(far.waypoints() == std::vector<VertexId>{3, 2, 4});

  const Traversal inside = traversal(b.tree, b.dec, 0, 3);
  REQUIRE(inside.entries.size() == 1);
  CHECK(inside.entries[0].piece == 0);
  CHECK(inside.entries[0].first_pos == 0);
  CHECK(inside.entries[0].last_pos == 3);
  CHECK(inside.waypoints() == std::vector<VertexId>{0, 3});

  const Traversal across = traversal(b.tree, b.dec, 0, 4);
  REQUIRE(across.entries.size() == 2);
  CHECK(across.entries[0].last_pos == across.entries[1].first_pos);  // waypoints tile the path
  CHECK(across.waypoints() == std::vector<VertexId>{0, 2, 4});

  CHECK_THROWS_AS(traversal(b.tree, b.dec, 1, 1), ValidationError);
}

TEST_CASE("piece count constant frozen at two on the side branch") {
  // The pair (2,4) sits at distance 0.1 (scale 3) and its path touches both
  // the trunk and the branch piece.
  const Built b = build(fixtures::side_branch());
  CHECK(compute_M(b.tree, b.dec) == 2);
  CHECK(compute_M_alt(b.tree, b.dec) == 2);
  CHECK(oracle::piece_count_bound(b.tree, oracle::pieces(b.tree, oracle::nets(b.tree))) == 2);
}

TEST_CASE("oracle equivalence on small trees") {
  const std::vector<MetricTree> small = {
      fixtures::y_tree(),
      fixtures::side_branch(),
      fixtures::uniform_path(9),
      make_star(3, 2),
      make_koch_arc(1),
      make_snowflake_path(0.5, 9),
      make_random_tree(12, 7),
      make_random_tree(11, 9),
  };
  for (const MetricTree& raw : small) {
    const Built b = build(raw);
    const int m = compute_M(b.tree, b.dec);
    const auto bad = oracle::compare_all(b.tree, b.nets, b.dec, m);
    for (const auto& msg : bad) MESSAGE(msg);
    CHECK(bad.empty());
  }
}

TEST_CASE("structural audit passes on generated trees") {
  const std::vector<MetricTree> corpus = {
      make_koch_arc(2),
      make_vicsek(2),
      make_snowflake_path(0.7, 17),
      make_random_tree(30, 5),
  };
  for (const MetricTree& raw : corpus) {
    const Built b = build(raw);
    const DecompositionAudit audit = audit_pieces(b.tree, b.nets, b.dec);
    for (const auto& chk : audit.checks) {
      INFO(chk.name);
      CHECK(chk.pass);
    }
    CHECK(oracle::nets(b.tree) == b.nets.levels);
    CHECK(compute_M(b.tree, b.dec) == compute_M_alt(b.tree, b.dec));
  }
}

TEST_CASE("mutated decompositions are detected") {
  const Built b = build(fixtures::side_branch());

  SUBCASE("root moved off the attachment vertex") {
    Decomposition dec = b.dec;
    dec.pieces[1].root = 4;
    const auto audit = audit_pieces(b.tree, b.nets, dec);
    CHECK_FALSE(audit.all_pass());
    CHECK_FALSE(audit.find("piece_unique_attachment")->pass);
  }

  SUBCASE("member dropped from a piece") {
    Decomposition dec = b.dec;
    dec.pieces[1].members = {2};
    dec.pieces[1].new_net_points = {};
    const auto audit = audit_pieces(b.tree, b.nets, dec);
    CHECK_FALSE(audit.all_pass());
    CHECK_FALSE(audit.find("piece_cover")->pass);
    CHECK_FALSE(audit.find("piece_leaf_coverage")->pass);
  }

  SUBCASE("piece level lowered") {
    Decomposition dec = b.dec;
    dec.pieces[1].level = 2;
    const auto audit = audit_pieces(b.tree, b.nets, dec);
    CHECK_FALSE(audit.all_pass());
    CHECK_FALSE(audit.find("piece_leaf_coverage")->pass);
  }

  SUBCASE("hull vertex dropped") {
    Decomposition dec = b.dec;
    dec.hulls[2] = {0, 1, 2, 3};
    const auto audit = audit_pieces(b.tree, b.nets, dec);
    CHECK_FALSE(audit.all_pass());
    CHECK_FALSE(audit.find("hulls_match_nets")->pass);
  }

  SUBCASE("malformed members fail cleanly") {
    Decomposition dec = b.dec;
    dec.pieces[1].members = {4, 2};  // unsorted
    const auto audit = audit_pieces(b.tree, b.nets, dec);
    CHECK_FALSE(audit.all_pass());
    CHECK_FALSE(audit.find("piece_connected_rooted")->pass);
  }
}

TEST_CASE("input preconditions are enforced") {
  const MetricTree raw = fixtures::side_branch();
  CHECK_THROWS_AS(build_nets(raw), ValidationError);  // not normalized
  const MetricTree t = raw.normalize();
  const NetHierarchy nets = build_nets(t);
  CHECK_THROWS_AS(decompose(raw, nets), ValidationError);
  CHECK_THROWS_AS(decompose(t, NetHierarchy{}), ValidationError);
}
