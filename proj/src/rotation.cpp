#include "perch/rotation.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "perch/errors.hpp"

namespace perch {

namespace {

std::vector<std::span<const double>> gather(const ClusterTree& tree, NodeId v) {
  std::vector<std::span<const double>> out;
  for (PointId id : tree.points_under(v)) out.push_back(tree.features(id));
  return out;
}

}  // namespace

bool is_masked_exact(const ClusterTree& tree, NodeId v, NodeId sib,
                     NodeId aunt) {
  const BoundingBox& bv = tree.node(v).box;
  const BoundingBox& bs = tree.node(sib).box;
  const BoundingBox& ba = tree.node(aunt).box;

  // Box bounds settle most calls. Rounding is monotone, so these shortcuts
  // agree with the brute-force comparison of squared distances below.
  if (d_minus_box_sq(bv, bs) > d_plus_box_sq(bv, ba)) return true;
  if (d_plus_box_sq(bv, bs) <= d_minus_box_sq(bv, ba)) return false;

  const auto sib_pts = gather(tree, sib);
  const auto aunt_pts = gather(tree, aunt);
  for (PointId xid : tree.points_under(v)) {
    const auto x = tree.features(xid);
    const double aunt_hi = d_plus_point_sq(x, ba);
    const double aunt_lo = d_minus_point_sq(x, ba);
    if (d_plus_point_sq(x, bs) <= aunt_lo) continue;
    if (d_minus_point_sq(x, bs) > aunt_hi) return true;

    double far = 0.0;
    for (const auto& y : sib_pts) {
      far = std::max(far, squared_distance(x, y));
      if (far > aunt_hi) return true;
    }
    for (const auto& z : aunt_pts) {
      if (squared_distance(x, z) < far) return true;
    }
  }
  return false;
}

bool is_masked_approx(const ClusterTree& tree, NodeId v, NodeId sib,
                      NodeId aunt) {
  const BoundingBox& bv = tree.node(v).box;
  return d_minus_box(bv, tree.node(sib).box) > d_plus_box(bv, tree.node(aunt).box);
}

RotationDecision check_masked(const ClusterTree& tree, NodeId v) {
  const NodeId a = tree.aunt(v);
  if (a == kNoNode) return {false, true};
  const NodeId s = tree.sibling(v);
  const bool masked = tree.config().masking_check == MaskingCheck::kExact
                          ? is_masked_exact(tree, v, s, a)
                          : is_masked_approx(tree, v, s, a);
  return {masked, !masked};
}

double local_balance(const ClusterTree& tree, NodeId v) {
  const Node& n = tree.node(v);
  if (n.is_leaf()) throw InvalidOperation("local balance of a leaf");
  const auto l = static_cast<double>(tree.node(n.children[0]).leaf_count);
  const auto r = static_cast<double>(tree.node(n.children[1]).leaf_count);
  return std::min(l, r) / std::max(l, r);
}

double tree_balance(const ClusterTree& tree) {
  const auto internal = tree.internal_nodes();
  if (internal.empty()) return 1.0;
  double sum = 0.0;
  for (NodeId v : internal) sum += local_balance(tree, v);
  return sum / static_cast<double>(internal.size());
}

namespace {

using Wide = unsigned __int128;

// Exact a/b + c/d as a fraction.
struct Fraction {
  Wide num;
  Wide den;
};

Fraction balance_sum(std::size_t a1, std::size_t a2, std::size_t b1,
                     std::size_t b2) {
  const Wide n1 = std::min(a1, a2), d1 = std::max(a1, a2);
  const Wide n2 = std::min(b1, b2), d2 = std::max(b1, b2);
  return {n1 * d2 + n2 * d1, d1 * d2};
}

}  // namespace

bool rotation_improves_balance(const ClusterTree& tree, NodeId v) {
  const NodeId s = tree.sibling(v);
  const NodeId a = tree.aunt(v);
  if (a == kNoNode) return false;
  const std::size_t nv = tree.node(v).leaf_count;
  const std::size_t ns = tree.node(s).leaf_count;
  const std::size_t na = tree.node(a).leaf_count;
  // Before: p = {v, s}, g = {p, a}. After: p = {v, a}, g = {p, s}.
  const Fraction before = balance_sum(nv, ns, nv + ns, na);
  const Fraction after = balance_sum(nv, na, nv + na, ns);
  return after.num * before.den > before.num * after.den;
}

RotationDecision check_balanced(const ClusterTree& tree, NodeId v) {
  if (tree.node(v).is_root()) return {false, true};
  const NodeId a = tree.aunt(v);
  if (a == kNoNode) return {false, false};
  if (!rotation_improves_balance(tree, v)) return {false, false};
  const NodeId s = tree.sibling(v);
  bool close_to_aunt;
  if (tree.config().masking_check == MaskingCheck::kExact) {
    close_to_aunt = is_masked_exact(tree, v, s, a);
  } else {
    // Optimistic box form: some x under v may be nearer the aunt than the
    // farthest point under the sibling.
    const BoundingBox& bv = tree.node(v).box;
    close_to_aunt =
        d_minus_box(bv, tree.node(a).box) < d_plus_box(bv, tree.node(s).box);
  }
  return {close_to_aunt, false};
}

std::size_t rotate_rec(ClusterTree& tree, NodeId v,
                       const RotationPredicate& predicate, RotationKind kind) {
  std::size_t rotations = 0;
  while (v != kNoNode) {
    const RotationDecision d = predicate(tree, v);
    if (d.should_rotate) {
      const auto& observer = tree.rotation_observer();
      if (observer) observer(tree, {kind, v, false});
      tree.rotate(v);
      ++rotations;
      if (observer) observer(tree, {kind, v, true});
    }
    if (d.should_stop) break;
    v = tree.node(v).parent;
  }
  return rotations;
}

InsertStats insert(ClusterTree& tree, const Point& x) {
  InsertStats stats;
  if (x.features.empty()) throw InvalidInput("point has no features");
  if (tree.empty()) {
    stats.leaf = tree.make_root(x);
    return stats;
  }
  if (x.features.size() != tree.dim()) {
    throw InvalidInput("point " + std::to_string(x.id) + " has dimension " +
                       std::to_string(x.features.size()) + ", expected " +
                       std::to_string(tree.dim()));
  }
  if (tree.has_point(x.id)) {
    throw InvalidInput("duplicate point id " + std::to_string(x.id));
  }

  const SearchResult nn = nearest_neighbor(tree, x.features);
  stats.search_expansions = nn.expansions;
  const NodeId leaf = tree.node(nn.leaf).collapsed
                          ? tree.graft_sibling(nn.leaf, x)
                          : tree.split(nn.leaf, x);
  stats.leaf = leaf;
  tree.update_ancestors(leaf, x.features);

  const Rotations mode = tree.config().rotations;
  if (mode != Rotations::kNone) {
    stats.masking_rotations = rotate_rec(tree, tree.sibling(leaf), check_masked,
                                         RotationKind::kMasking);
  }
  if (mode == Rotations::kMaskingAndBalance) {
    stats.balance_rotations =
        rotate_rec(tree, tree.node(leaf).parent, check_balanced,
                   RotationKind::kBalance);
  }
  tree.try_collapse();
  return stats;
}

}  // namespace perch
