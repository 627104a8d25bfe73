#include "perch/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "perch/errors.hpp"

namespace perch {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = s.find(sep, start);
    out.push_back(s.substr(start, end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

template <class Int>
bool parse_int(std::string_view s, Int& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

Dataset parse_dataset(std::istream& in, std::string name) {
  Dataset ds;
  ds.name = std::move(name);
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw ParseError(ds.name + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view row = trim_cr(line);
    if (row.empty()) continue;
    const auto cols = split(row, '\t');
    if (cols.size() < 3) fail("expected id, label and at least one feature");
    const std::size_t dim = cols.size() - 2;
    if (ds.dim == 0) {
      ds.dim = dim;
    } else if (dim != ds.dim) {
      fail("row has " + std::to_string(dim) + " features, expected " +
           std::to_string(ds.dim));
    }
    std::string pname(cols[0]);
    if (pname.empty()) fail("empty point id");
    if (!seen.insert(pname).second) fail("duplicate point id '" + pname + "'");
    Point p;
    p.id = ds.points.size();
    if (cols[1] != "?") p.label = std::string(cols[1]);
    p.features.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      if (!parse_double(cols[j + 2], p.features[j])) {
        fail("bad number '" + std::string(cols[j + 2]) + "' in column " +
             std::to_string(j + 3));
      }
    }
    ds.names.push_back(std::move(pname));
    ds.points.push_back(std::move(p));
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  return parse_dataset(in, path.string());
}

void write_dataset(std::ostream& out, const Dataset& ds) {
  for (std::size_t i = 0; i < ds.points.size(); ++i) {
    const Point& p = ds.points[i];
    out << (i < ds.names.size() ? ds.names[i] : std::to_string(p.id)) << '\t'
        << p.label.value_or("?");
    for (double v : p.features) out << '\t' << format_real(v);
    out << '\n';
  }
}

OrderKind parse_order_kind(std::string_view s) {
  if (s == "given") return OrderKind::kGiven;
  if (s == "random") return OrderKind::kRandom;
  if (s == "sorted") return OrderKind::kSorted;
  if (s == "roundrobin" || s == "round_robin") return OrderKind::kRoundRobin;
  throw InvalidInput("unknown order '" + std::string(s) + "'");
}

std::vector<std::size_t> order_stream(const Dataset& ds, StreamOrder order) {
  std::vector<std::size_t> idx(ds.points.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  switch (order.kind) {
    case OrderKind::kGiven:
      return idx;
    case OrderKind::kRandom: {
      std::mt19937_64 rng(order.seed);
      std::shuffle(idx.begin(), idx.end(), rng);
      return idx;
    }
    case OrderKind::kSorted:
    case OrderKind::kRoundRobin:
      break;
  }

  std::unordered_map<std::string, std::size_t> class_index;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < ds.points.size(); ++i) {
    const auto& label = ds.points[i].label;
    if (!label) {
      throw InvalidInput("sorted and round-robin orders need labels; point '" +
                         (i < ds.names.size() ? ds.names[i] : std::to_string(i)) +
                         "' is unlabeled");
    }
    auto [it, fresh] = class_index.emplace(*label, groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(i);
  }

  std::vector<std::size_t> out;
  out.reserve(idx.size());
  if (order.kind == OrderKind::kSorted) {
    for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
    return out;
  }
  std::vector<std::size_t> cursor(groups.size(), 0);
  while (out.size() < idx.size()) {
    for (std::size_t c = 0; c < groups.size(); ++c) {
      if (cursor[c] < groups[c].size()) out.push_back(groups[c][cursor[c]++]);
    }
  }
  return out;
}

std::string serialize_tree(const ClusterTree& tree) {
  std::ostringstream out;
  out << "perch-tree 1\n";
  out << "dim " << tree.dim() << '\n';
  out << "root ";
  if (tree.empty()) {
    out << "-\n";
  } else {
    out << tree.root() << '\n';
  }
  const auto order = tree.preorder();
  out << "nodes " << order.size() << '\n';
  auto join_reals = [&](const std::vector<double>& v) {
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (j) out << ',';
      out << format_real(v[j]);
    }
  };
  for (NodeId v : order) {
    const Node& n = tree.node(v);
    out << v << '\t';
    if (n.is_root()) {
      out << '-';
    } else {
      out << n.parent;
    }
    out << '\t';
    if (n.is_leaf()) {
      out << '-';
    } else {
      out << n.children[0] << ',' << n.children[1];
    }
    out << '\t' << n.leaf_count << '\t' << (n.collapsed ? 1 : 0) << '\t';
    join_reals(n.box.lo());
    out << '\t';
    join_reals(n.box.hi());
    out << '\t';
    if (n.points.empty()) {
      out << '-';
    } else {
      for (std::size_t i = 0; i < n.points.size(); ++i) {
        if (i) out << ',';
        out << n.points[i];
      }
    }
    out << '\n';
  }
  return out.str();
}

ClusterTree deserialize_tree(std::string_view text, ModeConfig config) {
  std::vector<std::string_view> lines;
  for (auto l : split(text, '\n')) {
    l = trim_cr(l);
    if (!l.empty()) lines.push_back(l);
  }
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw ParseError("tree document line " + std::to_string(lineno) + ": " +
                     msg);
  };
  auto header = [&](std::string_view key) -> std::string_view {
    if (lineno >= lines.size()) fail("missing '" + std::string(key) + "'");
    const auto line = lines[lineno++];
    const auto sp = line.find(' ');
    if (sp == std::string_view::npos || line.substr(0, sp) != key) {
      fail("expected '" + std::string(key) + "'");
    }
    return line.substr(sp + 1);
  };

  if (header("perch-tree") != "1") fail("unsupported tree document version");
  std::size_t dim = 0;
  if (!parse_int(header("dim"), dim)) fail("bad dim");
  NodeId root = kNoNode;
  if (const auto r = header("root"); r != "-" && !parse_int(r, root)) {
    fail("bad root");
  }
  std::size_t count = 0;
  if (!parse_int(header("nodes"), count)) fail("bad node count");
  if (lines.size() - lineno != count) {
    fail("expected " + std::to_string(count) + " node rows, found " +
         std::to_string(lines.size() - lineno));
  }

  auto parse_reals = [&](std::string_view s) {
    std::vector<double> v;
    for (auto part : split(s, ',')) {
      double x;
      if (!parse_double(part, x)) fail("bad real '" + std::string(part) + "'");
      v.push_back(x);
    }
    if (v.size() != dim) fail("box has wrong dimension");
    return v;
  };

  std::vector<Node> nodes;
  nodes.reserve(count);
  while (lineno < lines.size()) {
    const auto cols = split(lines[lineno++], '\t');
    if (cols.size() != 8) fail("node row needs 8 tab-separated fields");
    Node n;
    if (!parse_int(cols[0], n.id)) fail("bad node id");
    if (cols[1] != "-" && !parse_int(cols[1], n.parent)) fail("bad parent id");
    if (cols[2] != "-") {
      const auto ch = split(cols[2], ',');
      if (ch.size() != 2 || !parse_int(ch[0], n.children[0]) ||
          !parse_int(ch[1], n.children[1])) {
        fail("bad children");
      }
    }
    if (!parse_int(cols[3], n.leaf_count)) fail("bad leaf count");
    if (cols[4] != "0" && cols[4] != "1") fail("bad collapsed flag");
    n.collapsed = cols[4] == "1";
    try {
      n.box = BoundingBox(parse_reals(cols[5]), parse_reals(cols[6]));
    } catch (const InvalidInput& e) {
      fail(e.what());
    }
    if (cols[7] != "-") {
      for (auto part : split(cols[7], ',')) {
        PointId id;
        if (!parse_int(part, id)) fail("bad point id");
        n.points.push_back(id);
      }
    }
    nodes.push_back(std::move(n));
  }
  try {
    return ClusterTree::from_nodes(config, dim, std::move(nodes), root);
  } catch (const InvalidInput& e) {
    throw ParseError(std::string("tree document: ") + e.what());
  }
}

void save_tree(const std::filesystem::path& path, const ClusterTree& tree) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path.string() + ": cannot open for writing");
  out << serialize_tree(tree);
}

ClusterTree load_tree(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return deserialize_tree(buf.str());
}

void write_assignment(std::ostream& out, const FlatClustering& flat) {
  std::map<PointId, ClusterId> sorted(flat.assignment.begin(),
                                      flat.assignment.end());
  for (const auto& [id, c] : sorted) out << id << '\t' << c << '\n';
}

FlatClustering parse_assignment(std::istream& in) {
  FlatClustering flat;
  std::unordered_set<ClusterId> clusters;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto row = trim_cr(line);
    if (row.empty()) continue;
    const auto cols = split(row, '\t');
    PointId id;
    ClusterId c;
    if (cols.size() != 2 || !parse_int(cols[0], id) || !parse_int(cols[1], c)) {
      throw ParseError("assignment line " + std::to_string(lineno) +
                       ": expected point_id<TAB>cluster_id");
    }
    if (!flat.assignment.emplace(id, c).second) {
      throw ParseError("assignment line " + std::to_string(lineno) +
                       ": duplicate point id");
    }
    clusters.insert(c);
  }
  flat.k = clusters.size();
  return flat;
}

void write_report(std::ostream& out, const EvalReport& r) {
  out << "dp\t" << format_real(r.dendrogram_purity) << '\n';
  if (r.has_flat) {
    out << "precision\t" << format_real(r.flat.precision) << '\n';
    out << "recall\t" << format_real(r.flat.recall) << '\n';
    out << "f1\t" << format_real(r.flat.f1) << '\n';
  }
  out << "balance\t" << format_real(r.tree_balance) << '\n';
  out << "max_depth\t" << r.max_depth << '\n';
  out << "n\t" << r.n << '\n';
  out << "seconds\t" << format_real(r.seconds) << '\n';
}

}  // namespace perch
