#include "perch/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <unordered_set>

#include "perch/errors.hpp"

namespace perch {

GroundTruth GroundTruth::from_points(std::span<const Point> points) {
  GroundTruth g;
  std::unordered_map<std::string, ClassId> index;
  for (const Point& p : points) {
    if (!p.label) continue;
    auto [it, fresh] =
        index.emplace(*p.label, static_cast<ClassId>(g.classes.size()));
    if (fresh) g.classes.push_back(*p.label);
    g.assignment[p.id] = it->second;
  }
  return g;
}

NodeId lca(const ClusterTree& tree, PointId i, PointId j) {
  NodeId a = tree.leaf_of(i);
  NodeId b = tree.leaf_of(j);
  std::size_t da = tree.depth(a);
  std::size_t db = tree.depth(b);
  while (da > db) {
    a = tree.node(a).parent;
    --da;
  }
  while (db > da) {
    b = tree.node(b).parent;
    --db;
  }
  while (a != b) {
    a = tree.node(a).parent;
    b = tree.node(b).parent;
  }
  return a;
}

double purity(std::span<const PointId> s1, std::span<const PointId> s2) {
  if (s1.empty()) throw InvalidInput("purity of an empty set");
  const std::unordered_set<PointId> other(s2.begin(), s2.end());
  std::size_t common = 0;
  for (PointId id : s1) common += other.contains(id);
  return static_cast<double>(common) / static_cast<double>(s1.size());
}

namespace {

using ClassCounts = std::unordered_map<ClassId, std::uint64_t>;

std::uint64_t pairs_of(std::uint64_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

void require_tree_covers(const ClusterTree& tree, const GroundTruth& truth) {
  for (const auto& [id, cls] : truth.assignment) {
    if (!tree.has_point(id)) {
      throw InvalidInput("labeled point " + std::to_string(id) +
                         " is not in the tree");
    }
  }
}

}  // namespace

double dendrogram_purity_exact(const ClusterTree& tree,
                               const GroundTruth& truth) {
  if (tree.empty()) throw UndefinedMetric("dendrogram purity of an empty tree");
  require_tree_covers(tree, truth);

  // Post-order sweep carrying per-class counts upward (small-to-large merge).
  // A pair first meets at the node where its two points' class counts come
  // from different children, or inside a collapsed leaf.
  const auto order = tree.preorder();
  std::vector<ClassCounts> counts(tree.id_capacity());
  long double weighted = 0.0L;
  std::uint64_t total_pairs = 0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const NodeId v = *it;
    const Node& n = tree.node(v);
    const auto size = static_cast<long double>(n.leaf_count);
    ClassCounts& mine = counts[v];
    if (n.is_leaf()) {
      for (PointId id : n.points) {
        if (auto c = truth.assignment.find(id); c != truth.assignment.end()) {
          ++mine[c->second];
        }
      }
      for (const auto& [cls, c] : mine) {
        const std::uint64_t p = pairs_of(c);
        total_pairs += p;
        weighted += static_cast<long double>(p) * (c / size);
      }
      continue;
    }
    ClassCounts& left = counts[n.children[0]];
    ClassCounts& right = counts[n.children[1]];
    ClassCounts* big = &left;
    ClassCounts* small = &right;
    if (big->size() < small->size()) std::swap(big, small);
    for (const auto& [cls, c] : *small) {
      auto found = big->find(cls);
      if (found == big->end()) {
        big->emplace(cls, c);
        continue;
      }
      const std::uint64_t p = found->second * c;
      found->second += c;
      total_pairs += p;
      weighted += static_cast<long double>(p) * (found->second / size);
    }
    mine = std::move(*big);
    ClassCounts{}.swap(left);
    ClassCounts{}.swap(right);
  }
  if (total_pairs == 0) {
    throw UndefinedMetric("no class has two points in the tree");
  }
  return static_cast<double>(weighted / static_cast<long double>(total_pairs));
}

double dendrogram_purity_mc(const ClusterTree& tree, const GroundTruth& truth,
                            std::size_t samples, std::uint64_t seed) {
  if (samples < 1) throw InvalidInput("Monte Carlo sample count must be >= 1");
  if (tree.empty()) throw UndefinedMetric("dendrogram purity of an empty tree");
  require_tree_covers(tree, truth);

  // Leaf-order positions: every node covers a contiguous range of them.
  const auto order = tree.preorder();
  std::vector<std::size_t> first(tree.id_capacity());
  std::vector<std::size_t> depth(tree.id_capacity(), 0);
  std::unordered_map<PointId, std::size_t> position;
  std::size_t next = 0;
  for (NodeId v : order) {
    const Node& n = tree.node(v);
    if (!n.is_root()) depth[v] = depth[n.parent] + 1;
    first[v] = next;
    if (n.is_leaf()) {
      for (PointId id : n.points) position[id] = next++;
    }
  }

  std::vector<std::vector<std::size_t>> members(truth.k());
  std::vector<std::vector<PointId>> member_ids(truth.k());
  for (const auto& [id, cls] : truth.assignment) {
    member_ids[cls].push_back(id);
  }
  std::vector<std::uint64_t> cumulative;
  std::uint64_t total = 0;
  for (ClassId c = 0; c < truth.k(); ++c) {
    std::sort(member_ids[c].begin(), member_ids[c].end());
    for (PointId id : member_ids[c]) members[c].push_back(position.at(id));
    std::sort(members[c].begin(), members[c].end());
    total += pairs_of(member_ids[c].size());
    cumulative.push_back(total);
  }
  if (total == 0) throw UndefinedMetric("no class has two points in the tree");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> pick_pair(0, total - 1);
  long double sum = 0.0L;
  for (std::size_t s = 0; s < samples; ++s) {
    // Class chosen with probability proportional to its pair count.
    const std::uint64_t r = pick_pair(rng);
    const auto cls = static_cast<ClassId>(
        std::upper_bound(cumulative.begin(), cumulative.end(), r) -
        cumulative.begin());
    const auto& ids = member_ids[cls];
    std::uniform_int_distribution<std::size_t> pick_i(0, ids.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_j(0, ids.size() - 2);
    const std::size_t i = pick_i(rng);
    std::size_t j = pick_j(rng);
    if (j >= i) ++j;

    NodeId a = tree.leaf_of(ids[i]);
    NodeId b = tree.leaf_of(ids[j]);
    while (depth[a] > depth[b]) a = tree.node(a).parent;
    while (depth[b] > depth[a]) b = tree.node(b).parent;
    while (a != b) {
      a = tree.node(a).parent;
      b = tree.node(b).parent;
    }
    const Node& anc = tree.node(a);
    const std::size_t lo = first[a];
    const std::size_t hi = lo + anc.leaf_count;
    const auto& pos = members[cls];
    const auto same = std::lower_bound(pos.begin(), pos.end(), hi) -
                      std::lower_bound(pos.begin(), pos.end(), lo);
    sum += static_cast<long double>(same) /
           static_cast<long double>(anc.leaf_count);
  }
  return static_cast<double>(sum / static_cast<long double>(samples));
}

PairwiseScores pairwise_f1(const FlatClustering& predicted,
                           const GroundTruth& truth) {
  if (predicted.assignment.size() != truth.assignment.size()) {
    throw InvalidInput("predicted and true clusterings cover different points");
  }
  std::map<std::pair<ClusterId, ClassId>, std::uint64_t> table;
  std::unordered_map<ClusterId, std::uint64_t> cluster_sizes;
  std::unordered_map<ClassId, std::uint64_t> class_sizes;
  for (const auto& [id, cluster] : predicted.assignment) {
    auto t = truth.assignment.find(id);
    if (t == truth.assignment.end()) {
      throw InvalidInput("point " + std::to_string(id) +
                         " has no ground-truth class");
    }
    ++table[{cluster, t->second}];
    ++cluster_sizes[cluster];
    ++class_sizes[t->second];
  }
  PairwiseScores s;
  for (const auto& [key, c] : table) s.common_pairs += pairs_of(c);
  for (const auto& [key, c] : cluster_sizes) s.predicted_pairs += pairs_of(c);
  for (const auto& [key, c] : class_sizes) s.true_pairs += pairs_of(c);
  if (s.predicted_pairs > 0) {
    s.precision = static_cast<double>(s.common_pairs) /
                  static_cast<double>(s.predicted_pairs);
  }
  if (s.true_pairs > 0) {
    s.recall =
        static_cast<double>(s.common_pairs) / static_cast<double>(s.true_pairs);
  }
  if (s.precision + s.recall > 0.0) {
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  }
  return s;
}

LabeledData generate_separable(const SeparableOptions& o) {
  if (o.k < 1 || o.n_per_cluster < 1 || o.dim < 1) {
    throw InvalidInput("generate_separable needs k, n and d >= 1");
  }
  if (!(o.margin > 1.0)) throw InvalidInput("margin must be > 1");
  if (!(o.radius > 0.0)) throw InvalidInput("radius must be > 0");

  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double min_center_sq = std::pow(o.margin * 3.0 * o.radius, 2);

  constexpr int kAttempts = 20;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    // Cube large enough that random placement rarely collides, doubled on
    // each retry.
    const double side = std::sqrt(min_center_sq) *
                        std::pow(static_cast<double>(o.k), 1.0 / o.dim) * 2.0 *
                        std::pow(2.0, attempt);
    std::uniform_real_distribution<double> coord(0.0, side);
    std::vector<std::vector<double>> centers;
    bool placed = true;
    for (std::size_t c = 0; c < o.k && placed; ++c) {
      placed = false;
      for (int tries = 0; tries < 1000; ++tries) {
        std::vector<double> cand(o.dim);
        for (double& v : cand) v = coord(rng);
        const bool clear = std::all_of(
            centers.begin(), centers.end(), [&](const auto& other) {
              return squared_distance(cand, other) >= min_center_sq;
            });
        if (clear) {
          centers.push_back(std::move(cand));
          placed = true;
          break;
        }
      }
    }
    if (!placed) continue;

    LabeledData out;
    out.dataset.name = "separable";
    out.dataset.dim = o.dim;
    PointId next = 0;
    for (std::size_t c = 0; c < o.k; ++c) {
      for (std::size_t i = 0; i < o.n_per_cluster; ++i) {
        std::vector<double> dir(o.dim);
        double norm = 0.0;
        do {
          norm = 0.0;
          for (double& v : dir) {
            v = gauss(rng);
            norm += v * v;
          }
        } while (norm == 0.0);
        norm = std::sqrt(norm);
        const double r = o.radius * std::pow(unit(rng), 1.0 / o.dim);
        Point p;
        p.id = next++;
        p.features.resize(o.dim);
        for (std::size_t j = 0; j < o.dim; ++j) {
          p.features[j] = centers[c][j] + r * dir[j] / norm;
        }
        p.label = "c" + std::to_string(c);
        out.dataset.names.push_back(std::to_string(p.id));
        out.dataset.points.push_back(std::move(p));
      }
    }
    out.truth = GroundTruth::from_points(out.dataset.points);
    if (verify_separable(out.dataset.points, out.truth)) return out;
  }
  throw GenerationError("could not generate a separable dataset");
}

bool verify_separable(std::span<const Point> points, const GroundTruth& truth) {
  double max_within = -std::numeric_limits<double>::infinity();
  double min_between = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto ci = truth.assignment.find(points[i].id);
    if (ci == truth.assignment.end()) continue;
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      auto cj = truth.assignment.find(points[j].id);
      if (cj == truth.assignment.end()) continue;
      const double d = squared_distance(points[i].features, points[j].features);
      if (ci->second == cj->second) {
        max_within = std::max(max_within, d);
      } else {
        min_between = std::min(min_between, d);
      }
    }
  }
  return max_within < min_between;
}

}  // namespace perch
