#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "perch/dataset.hpp"
#include "perch/extraction.hpp"
#include "perch/tree.hpp"

namespace perch {

using ClassId = std::uint32_t;

struct GroundTruth {
  std::unordered_map<PointId, ClassId> assignment;
  // Class tags indexed by ClassId, in first-appearance order.
  std::vector<std::string> classes;

  std::size_t k() const { return classes.size(); }

  /// Builds from labeled points; unlabeled points are left out.
  static GroundTruth from_points(std::span<const Point> points);
};

NodeId lca(const ClusterTree& tree, PointId i, PointId j);

/// |S1 ∩ S2| / |S1|.
double purity(std::span<const PointId> s1, std::span<const PointId> s2);

// Tree points without a class in `truth` count toward subtree sizes but form
// no pairs. Throws UndefinedMetric when no class has two points in the tree.
double dendrogram_purity_exact(const ClusterTree& tree, const GroundTruth& truth);
double dendrogram_purity_mc(const ClusterTree& tree, const GroundTruth& truth,
                            std::size_t samples, std::uint64_t seed);

struct PairwiseScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t predicted_pairs = 0;
  std::uint64_t true_pairs = 0;
  std::uint64_t common_pairs = 0;
};

/// Pair-counting precision/recall/F1 from the cluster-class contingency
/// table. Precision is 0 with no predicted pairs, recall 0 with no true pairs.
PairwiseScores pairwise_f1(const FlatClustering& predicted,
                           const GroundTruth& truth);

struct EvalReport {
  double dendrogram_purity = 0.0;
  bool has_flat = false;
  PairwiseScores flat;
  double tree_balance = 1.0;
  std::size_t max_depth = 0;
  std::size_t n = 0;
  double seconds = 0.0;
};

struct SeparableOptions {
  std::size_t k = 2;
  std::size_t n_per_cluster = 10;
  std::size_t dim = 2;
  double margin = 2.0;  // gamma > 1
  double radius = 1.0;
  std::uint64_t seed = 0;
};

struct LabeledData {
  Dataset dataset;
  GroundTruth truth;
};

/// K clusters of points drawn uniformly from radius-r balls whose centers are
/// at least margin * 3r apart. Points are emitted cluster by cluster with
/// labels "c0", "c1", ... The result always passes verify_separable.
LabeledData generate_separable(const SeparableOptions& options);

/// Brute-force check: every within-class distance is strictly below every
/// between-class distance. Points missing from `truth` are ignored.
bool verify_separable(std::span<const Point> points, const GroundTruth& truth);

}  // namespace perch
