#pragma once

#include <functional>

#include "perch/search.hpp"
#include "perch/tree.hpp"

namespace perch {

struct RotationDecision {
  bool should_rotate = false;
  bool should_stop = false;
  friend bool operator==(const RotationDecision&,
                         const RotationDecision&) = default;
};

// Masking predicates for node v with sibling `sib` and aunt `aunt`.
//
// Exact: some point x under v is farther from some point under the sibling
// than from the nearest point under the aunt. Needs stored features.
bool is_masked_exact(const ClusterTree& tree, NodeId v, NodeId sib,
                     NodeId aunt);
// Approximate: d-(v, sib) > d+(v, aunt) on bounding boxes. Implies the exact
// predicate.
bool is_masked_approx(const ClusterTree& tree, NodeId v, NodeId sib,
                      NodeId aunt);

RotationDecision check_masked(const ClusterTree& tree, NodeId v);

double local_balance(const ClusterTree& tree, NodeId v);
/// Mean local balance over internal nodes; 1.0 when there are none.
double tree_balance(const ClusterTree& tree);

/// True iff rotating v strictly increases tree_balance. Only the local
/// balance of v's parent and grandparent changes, so this is O(1) and uses
/// exact integer arithmetic.
bool rotation_improves_balance(const ClusterTree& tree, NodeId v);

RotationDecision check_balanced(const ClusterTree& tree, NodeId v);

using RotationPredicate =
    std::function<RotationDecision(const ClusterTree&, NodeId)>;

/// Walks from v toward the root applying `predicate`, rotating where asked
/// and stopping where asked. Returns the number of rotations performed.
std::size_t rotate_rec(ClusterTree& tree, NodeId v,
                       const RotationPredicate& predicate, RotationKind kind);

struct InsertStats {
  // Leaf created for the point. May have been absorbed by a collapse.
  NodeId leaf = kNoNode;
  std::size_t search_expansions = 0;
  std::size_t masking_rotations = 0;
  std::size_t balance_rotations = 0;
};

/// Online insertion: nearest-neighbor search, split, ancestor update,
/// masking pass, balance pass, then collapse, as enabled by the tree's
/// configuration.
InsertStats insert(ClusterTree& tree, const Point& x);

}  // namespace perch
