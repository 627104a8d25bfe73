#pragma once

#include <string>
#include <vector>

#include "perch/tree.hpp"

namespace perch {

struct Dataset {
  std::string name;
  std::size_t dim = 0;
  std::vector<Point> points;
  // Per-point external identifier as written in the input file. Parallel to
  // `points`; point ids are the 0-based row index.
  std::vector<std::string> names;
};

}  // namespace perch
