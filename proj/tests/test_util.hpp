#pragma once

// Shared fixtures and brute-force oracles. Oracles here deliberately avoid the
// library's own fast paths (box pruning, contingency counts, Euler ranges).

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "perch/extraction.hpp"
#include "perch/metrics.hpp"
#include "perch/tree.hpp"

namespace perch::test {

inline Point pt(PointId id, std::vector<double> x,
                std::optional<std::string> label = std::nullopt) {
  return Point{id, std::move(x), std::move(label)};
}

inline std::vector<double> random_vec(std::mt19937_64& rng, std::size_t d,
                                      double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(d);
  for (double& x : v) x = u(rng);
  return v;
}

inline std::vector<Point> random_points(std::mt19937_64& rng, std::size_t n,
                                        std::size_t d) {
  std::vector<Point> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back(pt(i, random_vec(rng, d)));
  return pts;
}

inline double brute_nn_distance(const std::vector<Point>& pts,
                                const std::vector<double>& q) {
  double best = std::numeric_limits<double>::infinity();
  for (const Point& p : pts) {
    double s = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      s += (p.features[j] - q[j]) * (p.features[j] - q[j]);
    }
    best = std::min(best, std::sqrt(s));
  }
  return best;
}

inline double norm_between(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(s);
}

// Literal masking definition over explicit point sets.
inline bool masked_brute(const std::vector<std::vector<double>>& v,
                         const std::vector<std::vector<double>>& sib,
                         const std::vector<std::vector<double>>& aunt) {
  for (const auto& x : v) {
    double far = -1.0;
    for (const auto& y : sib) far = std::max(far, norm_between(x, y));
    double near = std::numeric_limits<double>::infinity();
    for (const auto& z : aunt) near = std::min(near, norm_between(x, z));
    if (far > near) return true;
  }
  return false;
}

// Dendrogram purity by enumerating every same-class pair and scanning the
// LCA's descendant set.
inline double dp_brute(const ClusterTree& tree, const GroundTruth& truth) {
  std::vector<PointId> ids;
  for (const auto& [id, c] : truth.assignment) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  long double sum = 0.0L;
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      const ClassId c = truth.assignment.at(ids[i]);
      if (truth.assignment.at(ids[j]) != c) continue;
      const auto under = tree.points_under(lca(tree, ids[i], ids[j]));
      std::size_t same = 0;
      for (PointId p : under) {
        auto it = truth.assignment.find(p);
        same += it != truth.assignment.end() && it->second == c;
      }
      sum += static_cast<long double>(same) / under.size();
      ++pairs;
    }
  }
  return static_cast<double>(sum / pairs);
}

// Pairwise F1 by enumerating all unordered pairs.
inline PairwiseScores f1_brute(const FlatClustering& pred,
                               const GroundTruth& truth) {
  std::vector<PointId> ids;
  for (const auto& [id, c] : pred.assignment) ids.push_back(id);
  PairwiseScores s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      const bool same_pred =
          pred.assignment.at(ids[i]) == pred.assignment.at(ids[j]);
      const bool same_true =
          truth.assignment.at(ids[i]) == truth.assignment.at(ids[j]);
      s.predicted_pairs += same_pred;
      s.true_pairs += same_true;
      s.common_pairs += same_pred && same_true;
    }
  }
  if (s.predicted_pairs) {
    s.precision = static_cast<double>(s.common_pairs) / s.predicted_pairs;
  }
  if (s.true_pairs) s.recall = static_cast<double>(s.common_pairs) / s.true_pairs;
  if (s.precision + s.recall > 0) {
    s.f1 = 2 * s.precision * s.recall / (s.precision + s.recall);
  }
  return s;
}

inline GroundTruth truth_of(std::initializer_list<std::pair<PointId, ClassId>> m) {
  GroundTruth g;
  ClassId top = 0;
  for (auto [id, c] : m) {
    g.assignment[id] = c;
    top = std::max(top, c);
  }
  for (ClassId c = 0; c <= top; ++c) g.classes.push_back("c" + std::to_string(c));
  return g;
}

// Greedy trap, 1-d: m points near -1 and m near +1 (class 0), 2m
// near +4 (class 1). Arrival: one -1 point, one +1 point, then all +4 points,
// then the rest of class 0.
inline std::vector<Point> greedy_trap_stream(std::size_t m) {
  std::vector<Point> out;
  PointId id = 0;
  auto add = [&](double x, const char* label) {
    out.push_back(pt(id++, {x}, std::string(label)));
  };
  const double jitter = 0.01;
  add(-1.0, "a");
  add(1.0, "a");
  for (std::size_t i = 0; i < 2 * m; ++i) add(4.0 + jitter * i, "b");
  for (std::size_t i = 1; i < m; ++i) {
    add(-1.0 - jitter * i, "a");
    add(1.0 + jitter * i, "a");
  }
  return out;
}

}  // namespace perch::test

namespace perch::test {

// Explicit tree shapes for predicate tests: Shape{point} is a leaf,
// Shape{left, right} an internal node.
struct Shape {
  std::optional<Point> point;
  std::vector<Shape> kids;
  Shape(Point p) : point(std::move(p)) {}
  Shape(Shape l, Shape r) : kids{std::move(l), std::move(r)} {}
};

struct BuiltShape {
  ClusterTree tree;
  // Node ids in pre-order of the shape description.
  std::vector<NodeId> ids;
};

inline BuiltShape build_shape(const Shape& root, ModeConfig cfg = {}) {
  std::vector<Node> nodes;
  std::unordered_map<PointId, std::vector<double>> features;
  std::vector<NodeId> order;
  std::size_t dim = 0;
  // Returns the node id of s.
  std::function<NodeId(const Shape&, NodeId)> make = [&](const Shape& s,
                                                          NodeId parent) {
    const auto id = static_cast<NodeId>(nodes.size());
    nodes.emplace_back();
    order.push_back(id);
    nodes[id].id = id;
    nodes[id].parent = parent;
    if (s.point) {
      dim = s.point->features.size();
      nodes[id].box = BoundingBox::from_point(s.point->features);
      nodes[id].leaf_count = 1;
      nodes[id].points = {s.point->id};
      features[s.point->id] = s.point->features;
      return id;
    }
    const NodeId l = make(s.kids[0], id);
    const NodeId r = make(s.kids[1], id);
    nodes[id].children = {l, r};
    nodes[id].box = box_union(nodes[l].box, nodes[r].box);
    nodes[id].leaf_count = nodes[l].leaf_count + nodes[r].leaf_count;
    return id;
  };
  make(root, kNoNode);
  return {ClusterTree::from_nodes(cfg, dim, std::move(nodes), 0,
                                  std::move(features)),
          std::move(order)};
}

}  // namespace perch::test
