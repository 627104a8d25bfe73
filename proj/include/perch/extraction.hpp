#pragma once

#include <cstdint>
#include <unordered_map>

#include "perch/tree.hpp"

namespace perch {

using ClusterId = std::uint32_t;

struct FlatClustering {
  std::unordered_map<PointId, ClusterId> assignment;
  std::size_t k = 0;
};

/// Diagonal length of the node's box times its point count.
double node_cost(const ClusterTree& tree, NodeId v);

/// Greedy K-way flat clustering: repeatedly turns the cheapest remaining
/// internal node into a cluster until K leaves remain. The tree is not
/// modified. Clusters are numbered in left-to-right order of their nodes.
FlatClustering extract_flat(const ClusterTree& tree, std::size_t k);

/// Same as extract_flat but returns the chosen nodes, left to right.
std::vector<NodeId> extract_flat_nodes(const ClusterTree& tree, std::size_t k);

}  // namespace perch
