#include <algorithm>
#include <random>

#include "doctest.h"
#include "perch/errors.hpp"
#include "perch/rotation.hpp"
#include "perch/tree.hpp"
#include "test_util.hpp"

using namespace perch;
using perch::test::pt;

namespace {

ModeConfig plain() {
  ModeConfig c;
  c.rotations = Rotations::kNone;
  return c;
}

ModeConfig collapsed(std::size_t bound) {
  ModeConfig c = plain();
  c.collapse_bound = bound;
  return c;
}

std::vector<PointId> sorted(std::vector<PointId> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// Leaf payloads of a node's children, for asserting shapes.
std::vector<PointId> child_points(const ClusterTree& t, NodeId v, int c) {
  return sorted(t.points_under(t.node(v).children[c]));
}

}  // namespace

TEST_CASE("split on a single-leaf tree creates a root with two leaves") {
  ClusterTree t(plain());
  const NodeId a = t.make_root(pt(0, {0.0}));
  const NodeId b = t.split(a, pt(1, {1.0}));
  t.audit();
  const Node& root = t.node(t.root());
  CHECK(root.children[0] == a);
  CHECK(root.children[1] == b);
  CHECK(root.leaf_count == 2);
  CHECK(root.box == BoundingBox({0.0}, {1.0}));
  CHECK(t.num_leaves() == 2);
}

TEST_CASE("split of a deeper leaf keeps the parent's slot") {
  ClusterTree t(plain());
  const NodeId a = t.make_root(pt(0, {0.0}));
  const NodeId b = t.split(a, pt(1, {1.0}));
  const NodeId old_root = t.root();
  const NodeId c = t.split(b, pt(2, {2.0}));
  t.update_ancestors(c, std::vector<double>{2.0});
  t.audit();
  // (a, (b, c))
  CHECK(t.root() == old_root);
  CHECK(t.node(t.root()).children[0] == a);
  const NodeId p = t.node(t.root()).children[1];
  CHECK(t.node(p).children[0] == b);
  CHECK(t.node(p).children[1] == c);
  CHECK(t.node(t.root()).leaf_count == 3);
}

TEST_CASE("split rejects internal and collapsed nodes") {
  ClusterTree t(collapsed(2));
  const NodeId a = t.make_root(pt(0, {0.0}));
  t.split(a, pt(1, {1.0}));
  CHECK_THROWS_AS(t.split(t.root(), pt(2, {2.0})), InvalidOperation);
  t.collapse(t.root());
  CHECK(t.node(t.root()).collapsed);
  CHECK_THROWS_AS(t.split(t.root(), pt(2, {2.0})), InvalidOperation);
  // graft_sibling leaves the collapsed payload intact.
  t.graft_sibling(t.root(), pt(2, {2.0}));
  t.audit();
  CHECK(t.num_leaves() == 2);
}

TEST_CASE("split rejects a duplicate id or wrong dimension") {
  ClusterTree t(plain());
  const NodeId a = t.make_root(pt(0, {0.0, 0.0}));
  CHECK_THROWS_AS(t.split(a, pt(0, {1.0, 1.0})), InvalidInput);
  CHECK_THROWS_AS(t.split(a, pt(1, {1.0})), InvalidInput);
}

TEST_CASE("update_ancestors") {
  SUBCASE("root leaf is a no-op") {
    ClusterTree t(plain());
    const NodeId a = t.make_root(pt(0, {0.0}));
    t.update_ancestors(a, std::vector<double>{0.0});
    CHECK(t.node(a).leaf_count == 1);
  }
  SUBCASE("every pre-existing ancestor grows and counts once") {
    // Left spine: split the same leaf repeatedly, then hang a far point off
    // the deepest leaf. Its new parent is built by split; the three older
    // ancestors above it take one increment each.
    ClusterTree t(plain());
    NodeId a = t.make_root(pt(0, {0.0}));
    for (PointId i = 1; i <= 3; ++i) {
      const NodeId l = t.split(a, pt(i, {0.1 * i}));
      t.update_ancestors(l, std::vector<double>{0.1 * i});
    }
    t.audit();
    std::vector<std::size_t> before;
    std::vector<NodeId> chain;
    for (NodeId p = t.node(a).parent; p != kNoNode;
         p = t.node(p).parent) {
      chain.push_back(p);
      before.push_back(t.node(p).leaf_count);
    }
    REQUIRE(chain.size() == 3);
    const NodeId l = t.split(a, pt(9, {50.0}));
    t.update_ancestors(l, std::vector<double>{50.0});
    t.audit();
    for (std::size_t i = 0; i < chain.size(); ++i) {
      CHECK(t.node(chain[i]).leaf_count == before[i] + 1);
      CHECK(t.node(chain[i]).box.hi()[0] == 50.0);
    }
  }
}

TEST_CASE("rotate swaps sibling and aunt") {
  // (-1, (+1, +4)) rotated at leaf(+1) gives ((+1, -1), +4).
  ClusterTree t(plain());
  const NodeId m1 = t.make_root(pt(0, {-1.0}));
  const NodeId p1 = t.split(m1, pt(1, {1.0}));
  const NodeId p4 = t.split(p1, pt(2, {4.0}));
  t.update_ancestors(p4, std::vector<double>{4.0});
  const std::uint64_t before = t.structural_hash();
  const NodeId root = t.root();
  const NodeId p = t.node(p1).parent;

  t.rotate(p1);
  t.audit();
  CHECK(t.root() == root);
  // The aunt's slot under the root now holds the old sibling.
  CHECK(t.node(root).children[0] == p4);
  CHECK(t.node(root).children[1] == p);
  CHECK(sorted(t.points_under(p)) == std::vector<PointId>{0, 1});
  CHECK(t.node(p).box == BoundingBox({-1.0}, {1.0}));
  CHECK(t.node(root).leaf_count == 3);
  CHECK(t.structural_hash() != before);

  SUBCASE("rotating the same node again restores the partition") {
    t.rotate(p1);
    t.audit();
    CHECK(sorted(t.points_under(p)) == std::vector<PointId>{1, 2});
    CHECK(t.sibling(p) == m1);
  }
}

TEST_CASE("rotate rejects nodes without an aunt") {
  ClusterTree t(plain());
  const NodeId a = t.make_root(pt(0, {0.0}));
  const NodeId b = t.split(a, pt(1, {1.0}));
  CHECK_THROWS_AS(t.rotate(t.root()), InvalidOperation);
  CHECK_THROWS_AS(t.rotate(b), InvalidOperation);
}

TEST_CASE("property: rotations preserve point sets") {
  std::mt19937_64 rng(5);
  ClusterTree t(plain());
  for (PointId i = 0; i < 60; ++i) insert(t, pt(i, test::random_vec(rng, 2)));
  std::uniform_int_distribution<std::size_t> pick(0, 1000);
  for (int step = 0; step < 200; ++step) {
    auto nodes = t.preorder();
    const NodeId v = nodes[pick(rng) % nodes.size()];
    if (t.aunt(v) == kNoNode) continue;
    const NodeId g = t.node(t.node(v).parent).parent;
    const auto under_g = sorted(t.points_under(g));
    const std::size_t count_g = t.node(g).leaf_count;
    const BoundingBox box_g = t.node(g).box;
    t.rotate(v);
    t.audit();
    CHECK(sorted(t.points_under(g)) == under_g);
    CHECK(t.node(g).leaf_count == count_g);
    CHECK(t.node(g).box == box_g);
  }
  CHECK(t.num_points() == 60);
}

TEST_CASE("collapse") {
  SUBCASE("two singleton children") {
    ClusterTree t(collapsed(2));
    const NodeId a = t.make_root(pt(0, {0.0}));
    t.split(a, pt(1, {1.0}));
    const NodeId v = t.root();
    const BoundingBox b = t.node(v).box;
    t.collapse(v);
    t.audit();
    CHECK(t.node(v).collapsed);
    CHECK(t.node(v).is_leaf());
    CHECK(t.node(v).leaf_count == 2);
    CHECK(t.node(v).box == b);
    CHECK(sorted(t.node(v).points) == std::vector<PointId>{0, 1});
    CHECK(t.leaf_of(0) == v);
  }
  SUBCASE("collapsed child merges into a bigger collapsed leaf") {
    ClusterTree t(collapsed(2));
    const NodeId a = t.make_root(pt(0, {0.0}));
    const NodeId b = t.split(a, pt(1, {0.1}));
    t.split(b, pt(2, {5.0}));
    // (a, (b, c)): collapse (b, c), then the root.
    const NodeId inner = t.node(b).parent;
    t.update_ancestors(t.leaf_of(2), std::vector<double>{5.0});
    t.collapse(inner);
    t.audit();
    CHECK(t.node(inner).leaf_count == 2);
    t.collapse(t.root());
    t.audit();
    CHECK(sorted(t.node(t.root()).points) == std::vector<PointId>{0, 1, 2});
    CHECK(t.node(t.root()).leaf_count == 3);
    CHECK(t.num_leaves() == 1);
  }
  SUBCASE("internal child is rejected") {
    ClusterTree t(collapsed(2));
    const NodeId a = t.make_root(pt(0, {0.0}));
    const NodeId b = t.split(a, pt(1, {1.0}));
    t.split(b, pt(2, {2.0}));
    CHECK_THROWS_AS(t.collapse(t.root()), InvalidOperation);
    CHECK_THROWS_AS(t.collapse(a), InvalidOperation);
  }
}

TEST_CASE("try_collapse") {
  SUBCASE("at the bound it does nothing") {
    ClusterTree t(collapsed(2));
    const NodeId a = t.make_root(pt(0, {0.0}));
    t.split(a, pt(1, {1.0}));
    t.try_collapse();
    CHECK(t.num_leaves() == 2);
  }
  SUBCASE("collapses the pair with the smallest max distance") {
    // ((a, b), c) with |a - b| = 1 and c far away.
    ClusterTree u(collapsed(2));
    const NodeId a = u.make_root(pt(0, {0.0}));
    const NodeId c = u.split(a, pt(2, {10.0}));
    (void)c;
    const NodeId b = u.split(a, pt(1, {1.0}));
    u.update_ancestors(b, std::vector<double>{1.0});
    u.audit();
    REQUIRE(u.num_leaves() == 3);
    u.try_collapse();
    u.audit();
    CHECK(u.num_leaves() == 2);
    const NodeId ab = u.leaf_of(0);
    CHECK(u.node(ab).collapsed);
    CHECK(sorted(u.node(ab).points) == std::vector<PointId>{0, 1});
    CHECK(u.leaf_of(2) != ab);
  }
}

TEST_CASE("without rotations n points give n leaves and n-1 internal nodes") {
  std::mt19937_64 rng(3);
  ClusterTree t(plain());
  for (PointId i = 0; i < 100; ++i) insert(t, pt(i, test::random_vec(rng, 3)));
  t.audit();
  CHECK(t.num_leaves() == 100);
  CHECK(t.leaves().size() == 100);
  CHECK(t.internal_nodes().size() == 99);
}

TEST_CASE("collapsed mode keeps the leaf bound after every insert") {
  std::mt19937_64 rng(4);
  ModeConfig cfg;
  cfg.collapse_bound = 7;
  cfg.masking_check = MaskingCheck::kExact;
  ClusterTree t(cfg);
  for (PointId i = 0; i < 200; ++i) {
    insert(t, pt(i, test::random_vec(rng, 2)));
    t.audit();
    CHECK(t.num_leaves() <= 7);
  }
  CHECK(t.num_points() == 200);
  CHECK(t.node(t.root()).leaf_count == 200);
}

TEST_CASE("mode config validation") {
  ModeConfig c;
  c.beam_width = 0;
  CHECK_THROWS_AS(ClusterTree{c}, InvalidInput);
  c.beam_width = 1;
  c.collapse_bound = 1;
  CHECK_THROWS_AS(ClusterTree{c}, InvalidInput);
}

TEST_CASE("node ids are reused after collapse") {
  ClusterTree t(collapsed(2));
  const NodeId a = t.make_root(pt(0, {0.0}));
  t.split(a, pt(1, {1.0}));
  const std::size_t cap = t.id_capacity();
  t.collapse(t.root());
  t.graft_sibling(t.root(), pt(2, {3.0}));
  CHECK(t.id_capacity() == cap);
  t.audit();
}
