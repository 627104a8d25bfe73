#include "perch/extraction.hpp"

#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "perch/errors.hpp"

namespace perch {

double node_cost(const ClusterTree& tree, NodeId v) {
  const Node& n = tree.node(v);
  return diagonal(n.box) * static_cast<double>(n.leaf_count);
}

std::vector<NodeId> extract_flat_nodes(const ClusterTree& tree, std::size_t k) {
  const std::size_t leaves = tree.num_leaves();
  if (k < 1 || k > leaves) {
    throw InvalidInput("K must be in [1, " + std::to_string(leaves) +
                       "], got " + std::to_string(k));
  }

  // Min-heap on (cost, point count, node id). A descendant never costs more
  // than its ancestor, and the count key orders zero-cost ties child first,
  // so every collapse removes exactly one leaf.
  using Entry = std::tuple<double, std::size_t, NodeId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (NodeId v : tree.internal_nodes()) {
    heap.emplace(node_cost(tree, v), tree.node(v).leaf_count, v);
  }

  // frontier[v]: v currently stands as a leaf of the working tree.
  std::vector<bool> frontier(tree.id_capacity(), false);
  std::vector<bool> removed(tree.id_capacity(), false);
  std::size_t remaining = leaves;
  while (remaining > k) {
    const NodeId v = std::get<2>(heap.top());
    heap.pop();
    if (removed[v]) continue;
    // Drop v's whole subtree from the working tree.
    std::size_t absorbed = 0;
    std::vector<NodeId> stack{tree.node(v).children[0],
                              tree.node(v).children[1]};
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      if (removed[u]) continue;
      removed[u] = true;
      const Node& n = tree.node(u);
      if (frontier[u] || n.is_leaf()) {
        ++absorbed;
        frontier[u] = false;
        continue;
      }
      stack.push_back(n.children[0]);
      stack.push_back(n.children[1]);
    }
    frontier[v] = true;
    remaining -= absorbed - 1;
  }

  std::vector<NodeId> chosen;
  std::vector<NodeId> stack{tree.root()};
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    const Node& n = tree.node(u);
    if (frontier[u] || n.is_leaf()) {
      chosen.push_back(u);
      continue;
    }
    stack.push_back(n.children[1]);
    stack.push_back(n.children[0]);
  }
  return chosen;
}

FlatClustering extract_flat(const ClusterTree& tree, std::size_t k) {
  FlatClustering out;
  const auto nodes = extract_flat_nodes(tree, k);
  out.k = nodes.size();
  for (std::size_t c = 0; c < nodes.size(); ++c) {
    for (PointId id : tree.points_under(nodes[c])) {
      out.assignment[id] = static_cast<ClusterId>(c);
    }
  }
  return out;
}

}  // namespace perch
