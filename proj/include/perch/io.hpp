#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "perch/dataset.hpp"
#include "perch/extraction.hpp"
#include "perch/metrics.hpp"
#include "perch/tree.hpp"

namespace perch {

// Dataset TSV: one point per line, `name<TAB>label<TAB>x1<TAB>...<TAB>xd`.
// A label of "?" marks an unlabeled point. Point ids are 0-based row indices
// over non-blank lines.
Dataset parse_dataset(std::istream& in, std::string name = "stdin");
Dataset load_dataset(const std::filesystem::path& path);
void write_dataset(std::ostream& out, const Dataset& ds);

enum class OrderKind { kGiven, kRandom, kSorted, kRoundRobin };

struct StreamOrder {
  OrderKind kind = OrderKind::kGiven;
  std::uint64_t seed = 0;
};

OrderKind parse_order_kind(std::string_view s);

/// Permutation of indices into ds.points. Class order for sorted and
/// round-robin is first appearance in the dataset.
std::vector<std::size_t> order_stream(const Dataset& ds, StreamOrder order);

// Tree document. Reals are written in shortest round-trip form, so a
// serialize/deserialize cycle is bit-exact.
//
//   perch-tree 1
//   dim <d>
//   root <id|->
//   nodes <count>
//   <id> <parent|-> <child0,child1|-> <leaf_count> <collapsed 0|1>
//        <lo1,...,lod> <hi1,...,hid> <point ids comma-separated|->
//
// Node rows are tab-separated and listed in pre-order. Features are not
// stored; a loaded tree supports search over plain leaves, metrics and
// extraction but not exact masking checks.
std::string serialize_tree(const ClusterTree& tree);
ClusterTree deserialize_tree(std::string_view text, ModeConfig config = {});
void save_tree(const std::filesystem::path& path, const ClusterTree& tree);
ClusterTree load_tree(const std::filesystem::path& path);

// Assignment TSV: `point_id<TAB>cluster_id`, sorted by point id.
void write_assignment(std::ostream& out, const FlatClustering& flat);
FlatClustering parse_assignment(std::istream& in);

/// key<TAB>value lines: dp, precision, recall, f1, balance, max_depth, n,
/// seconds. Flat-clustering keys appear only when a flat clustering was
/// scored.
void write_report(std::ostream& out, const EvalReport& report);

std::string format_real(double v);

}  // namespace perch
