#include "perch/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "perch/errors.hpp"

namespace perch {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw InvalidInput(std::string(what) + ": dimension mismatch (" +
                       std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

BoundingBox::BoundingBox(std::vector<double> lo, std::vector<double> hi)
    : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.empty()) throw InvalidInput("bounding box must have dimension >= 1");
  require_same_dim(lo_.size(), hi_.size(), "BoundingBox");
  for (std::size_t j = 0; j < lo_.size(); ++j) {
    if (!(lo_[j] <= hi_[j])) {
      throw InvalidInput("bounding box has lo > hi in dimension " +
                         std::to_string(j));
    }
  }
}

BoundingBox BoundingBox::from_point(std::span<const double> x) {
  if (x.empty()) throw InvalidInput("box_from_point: empty vector");
  BoundingBox b;
  b.lo_.assign(x.begin(), x.end());
  b.hi_ = b.lo_;
  return b;
}

void BoundingBox::extend(std::span<const double> x) {
  require_same_dim(dim(), x.size(), "box_extend");
  for (std::size_t j = 0; j < x.size(); ++j) {
    lo_[j] = std::min(lo_[j], x[j]);
    hi_[j] = std::max(hi_[j], x[j]);
  }
}

bool BoundingBox::contains(std::span<const double> x) const {
  if (x.size() != dim()) return false;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] < lo_[j] || x[j] > hi_[j]) return false;
  }
  return true;
}

BoundingBox box_from_point(std::span<const double> x) {
  return BoundingBox::from_point(x);
}

BoundingBox box_extend(const BoundingBox& b, std::span<const double> x) {
  BoundingBox out = b;
  out.extend(x);
  return out;
}

BoundingBox box_union(const BoundingBox& a, const BoundingBox& b) {
  require_same_dim(a.dim(), b.dim(), "box_union");
  std::vector<double> lo(a.dim()), hi(a.dim());
  for (std::size_t j = 0; j < a.dim(); ++j) {
    lo[j] = std::min(a.lo()[j], b.lo()[j]);
    hi[j] = std::max(a.hi()[j], b.hi()[j]);
  }
  return BoundingBox(std::move(lo), std::move(hi));
}

double d_minus_point_sq(std::span<const double> x, const BoundingBox& b) {
  require_same_dim(x.size(), b.dim(), "d_minus_point");
  const auto& lo = b.lo();
  const auto& hi = b.hi();
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] <= lo[j]) {
      const double t = x[j] - lo[j];
      s += t * t;
    } else if (x[j] >= hi[j]) {
      const double t = x[j] - hi[j];
      s += t * t;
    }
  }
  return s;
}

double d_plus_point_sq(std::span<const double> x, const BoundingBox& b) {
  require_same_dim(x.size(), b.dim(), "d_plus_point");
  const auto& lo = b.lo();
  const auto& hi = b.hi();
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double u = x[j] - lo[j];
    const double v = x[j] - hi[j];
    s += std::max(u * u, v * v);
  }
  return s;
}

double d_minus_box_sq(const BoundingBox& a, const BoundingBox& b) {
  require_same_dim(a.dim(), b.dim(), "d_minus_box");
  double s = 0.0;
  for (std::size_t j = 0; j < a.dim(); ++j) {
    const double gap =
        std::max({0.0, b.lo()[j] - a.hi()[j], a.lo()[j] - b.hi()[j]});
    s += gap * gap;
  }
  return s;
}

double d_plus_box_sq(const BoundingBox& a, const BoundingBox& b) {
  require_same_dim(a.dim(), b.dim(), "d_plus_box");
  double s = 0.0;
  for (std::size_t j = 0; j < a.dim(); ++j) {
    const double u = a.hi()[j] - b.lo()[j];
    const double v = b.hi()[j] - a.lo()[j];
    s += std::max(u * u, v * v);
  }
  return s;
}

double d_minus_point(std::span<const double> x, const BoundingBox& b) {
  return std::sqrt(d_minus_point_sq(x, b));
}

double d_plus_point(std::span<const double> x, const BoundingBox& b) {
  return std::sqrt(d_plus_point_sq(x, b));
}

double d_minus_box(const BoundingBox& a, const BoundingBox& b) {
  return std::sqrt(d_minus_box_sq(a, b));
}

double d_plus_box(const BoundingBox& a, const BoundingBox& b) {
  return std::sqrt(d_plus_box_sq(a, b));
}

double squared_distance(std::span<const double> x, std::span<const double> y) {
  require_same_dim(x.size(), y.size(), "distance");
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double t = x[j] - y[j];
    s += t * t;
  }
  return s;
}

double distance(std::span<const double> x, std::span<const double> y) {
  return std::sqrt(squared_distance(x, y));
}

double diagonal(const BoundingBox& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < b.dim(); ++j) {
    const double t = b.hi()[j] - b.lo()[j];
    s += t * t;
  }
  return std::sqrt(s);
}

}  // namespace perch
