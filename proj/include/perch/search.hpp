#pragma once

#include <cstddef>
#include <span>

#include "perch/tree.hpp"

namespace perch {

struct SearchResult {
  NodeId leaf = kNoNode;
  // Exact distance from the query to the nearest point stored in `leaf`.
  double distance = 0.0;
  // Number of nodes popped (A*) or scored (beam).
  std::size_t expansions = 0;
};

/// Exact nearest-neighbor leaf via best-first search ordered by the d- bound.
/// Frontier ties pop the smaller node id first.
SearchResult nearest_neighbor_astar(const ClusterTree& tree,
                                    std::span<const double> x);

/// Level-synchronous beam descent keeping the `width` children with the
/// smallest d- bound at each depth. Returns the best leaf touched; may be
/// approximate. `threads` > 1 scores large levels in parallel with identical
/// results.
SearchResult nearest_neighbor_beam(const ClusterTree& tree,
                                   std::span<const double> x,
                                   std::size_t width, unsigned threads = 1);

/// Dispatches on the tree's configured search strategy.
SearchResult nearest_neighbor(const ClusterTree& tree,
                              std::span<const double> x);

/// Exact minimum distance from x to the points stored in a leaf.
double leaf_distance(const ClusterTree& tree, NodeId leaf,
                     std::span<const double> x);

}  // namespace perch
