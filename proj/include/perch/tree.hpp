#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "perch/geometry.hpp"

namespace perch {

using PointId = std::uint64_t;
using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

struct Point {
  PointId id = 0;
  std::vector<double> features;
  // Ground-truth tag. Evaluation only; clustering code never reads it.
  std::optional<std::string> label;
};

enum class MaskingCheck { kExact, kApprox };
enum class Rotations { kNone, kMasking, kMaskingAndBalance };
enum class SearchKind { kAStar, kBeam };

struct ModeConfig {
  MaskingCheck masking_check = MaskingCheck::kApprox;
  Rotations rotations = Rotations::kMaskingAndBalance;
  SearchKind search = SearchKind::kAStar;
  std::size_t beam_width = 5;
  // Upper bound L on the number of leaves; unset disables collapsed mode.
  std::optional<std::size_t> collapse_bound;
  // Worker threads used to score a beam level. Results do not depend on it.
  unsigned search_threads = 1;

  /// Throws InvalidInput when beam_width < 1 or collapse_bound < 2.
  void validate() const;
};

struct Node {
  NodeId id = kNoNode;
  NodeId parent = kNoNode;
  std::array<NodeId, 2> children{kNoNode, kNoNode};
  BoundingBox box;
  // Number of descendant points (not tree leaves) so collapsed leaves weigh
  // in by their payload size.
  std::size_t leaf_count = 0;
  // Leaf payload. Empty for internal nodes.
  std::vector<PointId> points;
  bool collapsed = false;

  bool is_leaf() const { return children[0] == kNoNode; }
  bool is_root() const { return parent == kNoNode; }
};

enum class RotationKind { kMasking, kBalance };

struct RotationEvent {
  RotationKind kind;
  NodeId node;
  bool after;  // false: about to rotate; true: rotation applied
};

class ClusterTree;
using RotationObserver =
    std::function<void(const ClusterTree&, const RotationEvent&)>;

/// Binary cluster tree with bounding-box node summaries.
///
/// Nodes live in an arena indexed by NodeId; ids of deleted nodes are reused.
/// All mutations are single-writer. Const member functions may run
/// concurrently with each other.
class ClusterTree {
 public:
  explicit ClusterTree(ModeConfig config = {});

  const ModeConfig& config() const { return config_; }

  bool empty() const { return root_ == kNoNode; }
  NodeId root() const { return root_; }
  std::size_t dim() const { return dim_; }
  std::size_t num_points() const { return leaf_of_.size(); }
  std::size_t num_leaves() const { return num_leaves_; }
  std::size_t num_nodes() const { return nodes_.size() - free_.size(); }

  const Node& node(NodeId id) const;
  bool is_alive(NodeId id) const {
    return id < alive_.size() && alive_[id];
  }
  /// Upper bound (exclusive) on node ids currently in use.
  std::size_t id_capacity() const { return nodes_.size(); }

  NodeId sibling(NodeId v) const;
  /// Sibling of v's parent, or kNoNode when v is the root or a root child.
  NodeId aunt(NodeId v) const;
  std::size_t depth(NodeId v) const;
  std::size_t max_depth() const;

  bool has_point(PointId id) const { return leaf_of_.contains(id); }
  bool has_features(PointId id) const { return features_.contains(id); }
  /// Throws InvalidInput if the point is unknown or its features were not
  /// retained (trees loaded from a document carry no features).
  std::span<const double> features(PointId id) const;
  NodeId leaf_of(PointId id) const;

  /// Leaves in left-to-right order.
  std::vector<NodeId> leaves() const;
  std::vector<NodeId> internal_nodes() const;
  /// Nodes in pre-order from the root.
  std::vector<NodeId> preorder() const;
  std::vector<PointId> points_under(NodeId v) const;

  // -- primitives --------------------------------------------------------

  /// Creates the single-leaf root for the first point of an empty tree.
  NodeId make_root(const Point& x);

  /// Replaces leaf t with a new internal node whose children are t and a new
  /// leaf holding x. Returns the new leaf. Rejects collapsed and internal t.
  NodeId split(NodeId t, const Point& x);

  /// Same re-linking as split() but also accepts collapsed leaves; their
  /// payload is left untouched. Used by insertion in collapsed mode.
  NodeId graft_sibling(NodeId t, const Point& x);

  /// Extends the ancestors of a freshly split leaf with x and bumps their
  /// counts. The leaf's own parent was built by split() and already covers x.
  void update_ancestors(NodeId leaf, std::span<const double> x);

  /// Swaps v's sibling with v's aunt.
  void rotate(NodeId v);

  /// Turns an internal node with two leaf children into a collapsed leaf.
  void collapse(NodeId v);

  /// Collapses minimal-priority collapsible nodes until the leaf count is
  /// within the configured bound. No-op outside collapsed mode.
  void try_collapse();

  /// Verifies all structural invariants; throws std::logic_error on the
  /// first violation found.
  void audit() const;

  /// Order-sensitive hash of structure, boxes, counts and payloads.
  std::uint64_t structural_hash() const;

  void set_rotation_observer(RotationObserver observer) {
    observer_ = std::move(observer);
  }
  const RotationObserver& rotation_observer() const { return observer_; }

  /// Rebuilds a tree from raw nodes (deserialization). Nodes may use any ids;
  /// the graph is audited before returning. `features` may supply retained
  /// point features.
  static ClusterTree from_nodes(
      ModeConfig config, std::size_t dim, std::vector<Node> nodes, NodeId root,
      std::unordered_map<PointId, std::vector<double>> features = {});

 private:
  struct CollapseEntry {
    double priority;
    NodeId node;
    std::array<NodeId, 2> children;
    // Min-heap on (priority, node id).
    bool operator<(const CollapseEntry& o) const {
      if (priority != o.priority) return priority > o.priority;
      return node > o.node;
    }
  };

  Node& mut(NodeId id) { return nodes_[id]; }
  NodeId allocate();
  void release(NodeId id);
  void register_point(const Point& x, NodeId leaf);
  void recompute_summary(NodeId v);
  void replace_child(NodeId parent, NodeId old_child, NodeId new_child);
  bool is_collapsible(NodeId v) const;
  void maybe_enqueue_collapsible(NodeId v);
  void rebuild_collapse_queue();

  ModeConfig config_;
  std::size_t dim_ = 0;
  NodeId root_ = kNoNode;
  std::size_t num_leaves_ = 0;
  std::vector<Node> nodes_;
  std::vector<bool> alive_;
  std::vector<NodeId> free_;
  std::unordered_map<PointId, std::vector<double>> features_;
  std::unordered_map<PointId, NodeId> leaf_of_;
  std::priority_queue<CollapseEntry> collapse_queue_;
  RotationObserver observer_;
};

}  // namespace perch
