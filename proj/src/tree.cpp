#include "perch/tree.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <stdexcept>
#include <string>

#include "perch/errors.hpp"

namespace perch {

void ModeConfig::validate() const {
  if (beam_width < 1) throw InvalidInput("beam width must be >= 1");
  if (collapse_bound && *collapse_bound < 2) {
    throw InvalidInput("collapse bound L must be >= 2");
  }
  if (search_threads < 1) throw InvalidInput("search threads must be >= 1");
}

ClusterTree::ClusterTree(ModeConfig config) : config_(config) {
  config_.validate();
}

const Node& ClusterTree::node(NodeId id) const {
  if (!is_alive(id)) {
    throw InvalidInput("unknown node id " + std::to_string(id));
  }
  return nodes_[id];
}

NodeId ClusterTree::sibling(NodeId v) const {
  const Node& n = node(v);
  if (n.is_root()) return kNoNode;
  const Node& p = nodes_[n.parent];
  return p.children[0] == v ? p.children[1] : p.children[0];
}

NodeId ClusterTree::aunt(NodeId v) const {
  const Node& n = node(v);
  if (n.is_root()) return kNoNode;
  return sibling(n.parent);
}

std::size_t ClusterTree::depth(NodeId v) const {
  std::size_t d = 0;
  for (NodeId p = node(v).parent; p != kNoNode; p = nodes_[p].parent) ++d;
  return d;
}

std::size_t ClusterTree::max_depth() const {
  if (empty()) return 0;
  std::size_t best = 0;
  std::vector<std::pair<NodeId, std::size_t>> stack{{root_, 0}};
  while (!stack.empty()) {
    auto [v, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    const Node& n = nodes_[v];
    if (!n.is_leaf()) {
      stack.push_back({n.children[1], d + 1});
      stack.push_back({n.children[0], d + 1});
    }
  }
  return best;
}

std::span<const double> ClusterTree::features(PointId id) const {
  auto it = features_.find(id);
  if (it == features_.end()) {
    throw InvalidInput("no features stored for point " + std::to_string(id));
  }
  return it->second;
}

NodeId ClusterTree::leaf_of(PointId id) const {
  auto it = leaf_of_.find(id);
  if (it == leaf_of_.end()) {
    throw InvalidInput("unknown point id " + std::to_string(id));
  }
  return it->second;
}

std::vector<NodeId> ClusterTree::preorder() const {
  std::vector<NodeId> out;
  if (empty()) return out;
  out.reserve(num_nodes());
  std::vector<NodeId> stack{root_};
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    out.push_back(v);
    const Node& n = nodes_[v];
    if (!n.is_leaf()) {
      stack.push_back(n.children[1]);
      stack.push_back(n.children[0]);
    }
  }
  return out;
}

std::vector<NodeId> ClusterTree::leaves() const {
  std::vector<NodeId> out;
  for (NodeId v : preorder()) {
    if (nodes_[v].is_leaf()) out.push_back(v);
  }
  return out;
}

std::vector<NodeId> ClusterTree::internal_nodes() const {
  std::vector<NodeId> out;
  for (NodeId v : preorder()) {
    if (!nodes_[v].is_leaf()) out.push_back(v);
  }
  return out;
}

std::vector<PointId> ClusterTree::points_under(NodeId v) const {
  std::vector<PointId> out;
  out.reserve(node(v).leaf_count);
  std::vector<NodeId> stack{v};
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    const Node& n = nodes_[u];
    if (n.is_leaf()) {
      out.insert(out.end(), n.points.begin(), n.points.end());
    } else {
      stack.push_back(n.children[1]);
      stack.push_back(n.children[0]);
    }
  }
  return out;
}

NodeId ClusterTree::allocate() {
  NodeId id;
  if (!free_.empty()) {
    id = free_.back();
    free_.pop_back();
    nodes_[id] = Node{};
    alive_[id] = true;
  } else {
    id = static_cast<NodeId>(nodes_.size());
    nodes_.emplace_back();
    alive_.push_back(true);
  }
  nodes_[id].id = id;
  return id;
}

void ClusterTree::release(NodeId id) {
  alive_[id] = false;
  nodes_[id] = Node{};
  free_.push_back(id);
}

void ClusterTree::register_point(const Point& x, NodeId leaf) {
  features_.emplace(x.id, x.features);
  leaf_of_.emplace(x.id, leaf);
}

NodeId ClusterTree::make_root(const Point& x) {
  if (!empty()) throw InvalidOperation("make_root on a non-empty tree");
  if (x.features.empty()) throw InvalidInput("point has no features");
  dim_ = x.features.size();
  NodeId id = allocate();
  Node& n = mut(id);
  n.box = BoundingBox::from_point(x.features);
  n.leaf_count = 1;
  n.points = {x.id};
  root_ = id;
  num_leaves_ = 1;
  register_point(x, id);
  return id;
}

NodeId ClusterTree::split(NodeId t, const Point& x) {
  const Node& n = node(t);
  if (!n.is_leaf()) throw InvalidOperation("split on an internal node");
  if (n.collapsed) throw InvalidOperation("split on a collapsed leaf");
  return graft_sibling(t, x);
}

NodeId ClusterTree::graft_sibling(NodeId t, const Point& x) {
  if (!node(t).is_leaf()) throw InvalidOperation("split on an internal node");
  if (x.features.size() != dim_) {
    throw InvalidInput("point dimension " + std::to_string(x.features.size()) +
                       " does not match tree dimension " +
                       std::to_string(dim_));
  }
  if (has_point(x.id)) {
    throw InvalidInput("duplicate point id " + std::to_string(x.id));
  }
  const NodeId leaf = allocate();
  const NodeId parent = allocate();
  const NodeId old_parent = nodes_[t].parent;

  Node& l = mut(leaf);
  l.box = BoundingBox::from_point(x.features);
  l.leaf_count = 1;
  l.points = {x.id};
  l.parent = parent;

  Node& p = mut(parent);
  p.parent = old_parent;
  p.children = {t, leaf};
  p.box = box_union(nodes_[t].box, l.box);
  p.leaf_count = nodes_[t].leaf_count + 1;

  if (old_parent == kNoNode) {
    root_ = parent;
  } else {
    replace_child(old_parent, t, parent);
  }
  mut(t).parent = parent;
  ++num_leaves_;
  register_point(x, leaf);
  maybe_enqueue_collapsible(parent);
  return leaf;
}

void ClusterTree::update_ancestors(NodeId leaf, std::span<const double> x) {
  NodeId p = node(leaf).parent;
  if (p == kNoNode) return;
  for (NodeId a = nodes_[p].parent; a != kNoNode; a = nodes_[a].parent) {
    Node& n = mut(a);
    n.box.extend(x);
    n.leaf_count += 1;
  }
}

void ClusterTree::replace_child(NodeId parent, NodeId old_child,
                                NodeId new_child) {
  Node& p = mut(parent);
  if (p.children[0] == old_child) {
    p.children[0] = new_child;
  } else if (p.children[1] == old_child) {
    p.children[1] = new_child;
  } else {
    throw std::logic_error("replace_child: not a child");
  }
}

void ClusterTree::recompute_summary(NodeId v) {
  Node& n = mut(v);
  const Node& a = nodes_[n.children[0]];
  const Node& b = nodes_[n.children[1]];
  n.box = box_union(a.box, b.box);
  n.leaf_count = a.leaf_count + b.leaf_count;
}

void ClusterTree::rotate(NodeId v) {
  const Node& n = node(v);
  if (n.is_root() || nodes_[n.parent].is_root()) {
    throw InvalidOperation("rotate requires a node with an aunt");
  }
  const NodeId p = n.parent;
  const NodeId g = nodes_[p].parent;
  const NodeId sib = sibling(v);
  const NodeId a = sibling(p);

  replace_child(p, sib, a);
  replace_child(g, a, sib);
  mut(a).parent = p;
  mut(sib).parent = g;
  recompute_summary(p);
  maybe_enqueue_collapsible(p);
}

bool ClusterTree::is_collapsible(NodeId v) const {
  if (!is_alive(v)) return false;
  const Node& n = nodes_[v];
  return !n.is_leaf() && nodes_[n.children[0]].is_leaf() &&
         nodes_[n.children[1]].is_leaf();
}

void ClusterTree::maybe_enqueue_collapsible(NodeId v) {
  if (!config_.collapse_bound || !is_collapsible(v)) return;
  const Node& n = nodes_[v];
  collapse_queue_.push(
      {d_plus_box(nodes_[n.children[0]].box, nodes_[n.children[1]].box), v,
       n.children});
}

void ClusterTree::collapse(NodeId v) {
  if (!is_collapsible(v)) {
    throw InvalidOperation("collapse requires an internal node whose children "
                           "are both leaves");
  }
  const auto children = nodes_[v].children;
  std::vector<PointId> merged;
  merged.reserve(nodes_[v].leaf_count);
  for (NodeId c : children) {
    const auto& pts = nodes_[c].points;
    merged.insert(merged.end(), pts.begin(), pts.end());
  }
  for (PointId id : merged) leaf_of_[id] = v;
  for (NodeId c : children) release(c);

  Node& n = mut(v);
  n.children = {kNoNode, kNoNode};
  n.points = std::move(merged);
  n.collapsed = true;
  --num_leaves_;
  if (n.parent != kNoNode) maybe_enqueue_collapsible(n.parent);
}

void ClusterTree::rebuild_collapse_queue() {
  collapse_queue_ = {};
  for (NodeId v : internal_nodes()) maybe_enqueue_collapsible(v);
}

void ClusterTree::try_collapse() {
  if (!config_.collapse_bound) return;
  const std::size_t bound = *config_.collapse_bound;
  while (num_leaves_ > bound) {
    if (collapse_queue_.empty()) rebuild_collapse_queue();
    CollapseEntry top = collapse_queue_.top();
    collapse_queue_.pop();
    // Entries go stale when rotations or earlier collapses change a node's
    // children; only entries that still describe the node are acted on.
    if (!is_collapsible(top.node) || nodes_[top.node].children != top.children) {
      continue;
    }
    collapse(top.node);
  }
}

void ClusterTree::audit() const {
  auto fail = [](const std::string& msg) {
    throw std::logic_error("tree audit: " + msg);
  };
  if (empty()) {
    if (num_leaves_ != 0 || !leaf_of_.empty()) fail("empty tree with state");
    return;
  }
  if (!is_alive(root_) || nodes_[root_].parent != kNoNode) fail("bad root");

  std::size_t leaves = 0;
  std::size_t reached = 0;
  std::unordered_map<PointId, NodeId> seen;
  for (NodeId v : preorder()) {
    ++reached;
    if (!is_alive(v)) fail("dead node reachable: " + std::to_string(v));
    const Node& n = nodes_[v];
    if (n.id != v) fail("node id mismatch at " + std::to_string(v));
    if (n.box.dim() != dim_) fail("box dimension at " + std::to_string(v));
    const bool c0 = n.children[0] != kNoNode;
    const bool c1 = n.children[1] != kNoNode;
    if (c0 != c1) fail("node with one child: " + std::to_string(v));
    if (n.is_leaf()) {
      ++leaves;
      if (n.points.empty()) fail("leaf without points");
      if (!n.collapsed && n.points.size() != 1) fail("plain leaf payload size");
      if (n.leaf_count != n.points.size()) fail("leaf count at leaf");
      for (PointId id : n.points) {
        if (!seen.emplace(id, v).second) {
          fail("point placed twice: " + std::to_string(id));
        }
        if (auto f = features_.find(id); f != features_.end()) {
          if (!n.box.contains(f->second)) fail("leaf box misses a point");
        }
      }
    } else {
      if (n.collapsed) fail("collapsed internal node");
      if (!n.points.empty()) fail("internal node with payload");
      std::size_t count = 0;
      for (NodeId c : n.children) {
        if (!is_alive(c)) fail("dead child");
        const Node& cn = nodes_[c];
        if (cn.parent != v) fail("parent link mismatch at " + std::to_string(c));
        for (std::size_t j = 0; j < dim_; ++j) {
          if (cn.box.lo()[j] < n.box.lo()[j] || cn.box.hi()[j] > n.box.hi()[j]) {
            fail("child box escapes parent at " + std::to_string(v));
          }
        }
        count += cn.leaf_count;
      }
      if (n.children[0] == n.children[1]) fail("duplicate children");
      if (count != n.leaf_count) fail("leaf count at " + std::to_string(v));
    }
  }
  if (reached != num_nodes()) fail("unreachable live nodes");
  if (leaves != num_leaves_) fail("leaf counter out of sync");
  if (seen.size() != leaf_of_.size()) fail("point index out of sync");
  for (const auto& [id, leaf] : seen) {
    auto it = leaf_of_.find(id);
    if (it == leaf_of_.end() || it->second != leaf) fail("stale point index");
  }
}

namespace {

struct Fnv {
  std::uint64_t h = 1469598103934665603ull;
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  }
  template <class T>
  void add(const T& v) {
    bytes(&v, sizeof v);
  }
};

}  // namespace

std::uint64_t ClusterTree::structural_hash() const {
  Fnv f;
  f.add(dim_);
  for (NodeId v : preorder()) {
    const Node& n = nodes_[v];
    f.add(v);
    f.add(n.parent);
    f.add(n.children);
    f.add(n.leaf_count);
    f.add(n.collapsed);
    for (double x : n.box.lo()) f.add(std::bit_cast<std::uint64_t>(x));
    for (double x : n.box.hi()) f.add(std::bit_cast<std::uint64_t>(x));
    f.add(n.points.size());
    for (PointId id : n.points) f.add(id);
  }
  return f.h;
}

ClusterTree ClusterTree::from_nodes(
    ModeConfig config, std::size_t dim, std::vector<Node> nodes, NodeId root,
    std::unordered_map<PointId, std::vector<double>> features) {
  ClusterTree t(config);
  if (nodes.empty()) {
    if (root != kNoNode) throw InvalidInput("root given for an empty tree");
    return t;
  }
  t.dim_ = dim;
  NodeId max_id = 0;
  for (const Node& n : nodes) {
    if (n.id == kNoNode) throw InvalidInput("node without id");
    max_id = std::max(max_id, n.id);
  }
  t.nodes_.assign(static_cast<std::size_t>(max_id) + 1, Node{});
  t.alive_.assign(t.nodes_.size(), false);
  for (Node& n : nodes) {
    if (t.alive_[n.id]) {
      throw InvalidInput("duplicate node id " + std::to_string(n.id));
    }
    t.alive_[n.id] = true;
    const NodeId id = n.id;
    t.nodes_[id] = std::move(n);
  }
  for (NodeId id = max_id + 1; id-- > 0;) {
    if (!t.alive_[id]) t.free_.push_back(id);
  }
  if (!t.is_alive(root)) throw InvalidInput("root is not a listed node");
  for (const Node& n : t.nodes_) {
    if (n.id == kNoNode) continue;
    for (NodeId c : n.children) {
      if (c != kNoNode && !t.is_alive(c)) {
        throw InvalidInput("node " + std::to_string(n.id) +
                           " references unknown child " + std::to_string(c));
      }
    }
  }
  t.root_ = root;
  t.features_ = std::move(features);
  // Leaves are counted over reachable nodes only; unreachable ones fail the
  // audit below.
  std::size_t reached = 0;
  std::vector<NodeId> stack{root};
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    if (++reached > t.nodes_.size()) throw InvalidInput("node graph has a cycle");
    const Node& n = t.nodes_[v];
    if (n.is_leaf()) {
      ++t.num_leaves_;
      for (PointId id : n.points) t.leaf_of_.emplace(id, v);
    } else {
      for (NodeId c : n.children) {
        if (c != kNoNode) stack.push_back(c);
      }
    }
  }
  try {
    t.audit();
  } catch (const std::logic_error& e) {
    throw InvalidInput(std::string("inconsistent tree: ") + e.what());
  }
  t.rebuild_collapse_queue();
  return t;
}

}  // namespace perch
