#include "perch/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <thread>
#include <vector>

#include "perch/errors.hpp"

namespace perch {

namespace {

void check_query(const ClusterTree& tree, std::span<const double> x) {
  if (tree.empty()) throw EmptyTree();
  if (x.size() != tree.dim()) {
    throw InvalidInput("query dimension " + std::to_string(x.size()) +
                       " does not match tree dimension " +
                       std::to_string(tree.dim()));
  }
}

// Squared exact distance to a leaf. A plain leaf's box is its point, so the
// d- bound is already exact and needs no feature lookup.
double leaf_distance_sq(const ClusterTree& tree, const Node& leaf,
                        std::span<const double> x) {
  if (!leaf.collapsed) return d_minus_point_sq(x, leaf.box);
  double best = std::numeric_limits<double>::infinity();
  for (PointId id : leaf.points) {
    best = std::min(best, squared_distance(x, tree.features(id)));
  }
  return best;
}

struct FrontierEntry {
  double key;  // squared d-, or squared exact distance once resolved
  NodeId node;
  bool resolved;
  bool operator>(const FrontierEntry& o) const {
    if (key != o.key) return key > o.key;
    if (node != o.node) return node > o.node;
    // A resolved entry pops before its unresolved twin.
    return !resolved && o.resolved;
  }
};

}  // namespace

double leaf_distance(const ClusterTree& tree, NodeId leaf,
                     std::span<const double> x) {
  const Node& n = tree.node(leaf);
  if (!n.is_leaf()) throw InvalidOperation("leaf_distance on an internal node");
  return std::sqrt(leaf_distance_sq(tree, n, x));
}

SearchResult nearest_neighbor_astar(const ClusterTree& tree,
                                    std::span<const double> x) {
  check_query(tree, x);
  std::priority_queue<FrontierEntry, std::vector<FrontierEntry>,
                      std::greater<>>
      frontier;
  frontier.push({d_minus_point_sq(x, tree.node(tree.root()).box), tree.root(),
                 false});
  SearchResult result;
  while (!frontier.empty()) {
    FrontierEntry top = frontier.top();
    frontier.pop();
    ++result.expansions;
    const Node& n = tree.node(top.node);
    if (n.is_leaf()) {
      if (top.resolved || !n.collapsed) {
        // key is exact and no frontier entry has a smaller lower bound.
        result.leaf = top.node;
        result.distance = std::sqrt(top.key);
        return result;
      }
      // Collapsed leaf: pay for the exact scan, then compete again.
      frontier.push({leaf_distance_sq(tree, n, x), top.node, true});
      continue;
    }
    for (NodeId c : n.children) {
      frontier.push({d_minus_point_sq(x, tree.node(c).box), c, false});
    }
  }
  throw std::logic_error("astar search exhausted the frontier");
}

SearchResult nearest_neighbor_beam(const ClusterTree& tree,
                                   std::span<const double> x,
                                   std::size_t width, unsigned threads) {
  check_query(tree, x);
  if (width < 1) throw InvalidInput("beam width must be >= 1");
  threads = std::max(1u, threads);

  struct Scored {
    double key;
    NodeId node;
  };
  auto by_key = [](const Scored& a, const Scored& b) {
    return a.key != b.key ? a.key < b.key : a.node < b.node;
  };

  SearchResult result;
  double best = std::numeric_limits<double>::infinity();
  auto consider_leaf = [&](NodeId id) {
    const double dsq = leaf_distance_sq(tree, tree.node(id), x);
    if (dsq < best || (dsq == best && id < result.leaf)) {
      best = dsq;
      result.leaf = id;
    }
  };

  std::vector<NodeId> level{tree.root()};
  std::vector<Scored> children;
  ++result.expansions;
  if (tree.node(tree.root()).is_leaf()) consider_leaf(tree.root());

  while (!level.empty()) {
    children.clear();
    for (NodeId v : level) {
      const Node& n = tree.node(v);
      if (n.is_leaf()) continue;
      for (NodeId c : n.children) children.push_back({0.0, c});
    }
    if (children.empty()) break;

    auto score = [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        children[i].key = d_minus_point_sq(x, tree.node(children[i].node).box);
      }
    };
    constexpr std::size_t kMinPerThread = 64;
    const std::size_t workers =
        std::min<std::size_t>(threads, children.size() / kMinPerThread);
    if (workers > 1) {
      std::vector<std::jthread> pool;
      const std::size_t chunk = (children.size() + workers - 1) / workers;
      for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t b = w * chunk;
        const std::size_t e = std::min(children.size(), b + chunk);
        if (b < e) pool.emplace_back(score, b, e);
      }
    } else {
      score(0, children.size());
    }
    result.expansions += children.size();

    const std::size_t keep = std::min(width, children.size());
    std::partial_sort(children.begin(), children.begin() + keep,
                      children.end(), by_key);
    level.clear();
    for (std::size_t i = 0; i < keep; ++i) {
      const NodeId c = children[i].node;
      if (tree.node(c).is_leaf()) {
        consider_leaf(c);
      } else {
        level.push_back(c);
      }
    }
  }
  result.distance = std::sqrt(best);
  return result;
}

SearchResult nearest_neighbor(const ClusterTree& tree,
                              std::span<const double> x) {
  const ModeConfig& cfg = tree.config();
  if (cfg.search == SearchKind::kBeam) {
    return nearest_neighbor_beam(tree, x, cfg.beam_width, cfg.search_threads);
  }
  return nearest_neighbor_astar(tree, x);
}

}  // namespace perch
