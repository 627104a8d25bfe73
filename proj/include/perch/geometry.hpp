#pragma once

#include <span>
#include <vector>

namespace perch {

/// Axis-aligned box: per-dimension [lo, hi] interval over a set of points.
class BoundingBox {
 public:
  BoundingBox() = default;
  /// Throws InvalidInput unless lo/hi are non-empty, equal length and lo <= hi.
  BoundingBox(std::vector<double> lo, std::vector<double> hi);

  static BoundingBox from_point(std::span<const double> x);

  std::size_t dim() const { return lo_.size(); }
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }

  /// Grows the box in place to cover x.
  void extend(std::span<const double> x);
  bool contains(std::span<const double> x) const;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;

 private:
  std::vector<double> lo_;
  std::vector<double> hi_;
};

BoundingBox box_from_point(std::span<const double> x);
BoundingBox box_extend(const BoundingBox& b, std::span<const double> x);
BoundingBox box_union(const BoundingBox& a, const BoundingBox& b);

// Distance bounds. All return Euclidean norms (not squared).
//
// d_minus_* lower-bounds and d_plus_* upper-bounds the distance between any
// point of the first argument and any point of the second.
double d_minus_point(std::span<const double> x, const BoundingBox& b);
double d_plus_point(std::span<const double> x, const BoundingBox& b);
double d_minus_box(const BoundingBox& a, const BoundingBox& b);
double d_plus_box(const BoundingBox& a, const BoundingBox& b);

// Squared variants used on hot paths where only comparisons are needed.
double d_minus_point_sq(std::span<const double> x, const BoundingBox& b);
double d_plus_point_sq(std::span<const double> x, const BoundingBox& b);
double d_minus_box_sq(const BoundingBox& a, const BoundingBox& b);
double d_plus_box_sq(const BoundingBox& a, const BoundingBox& b);

double squared_distance(std::span<const double> x, std::span<const double> y);
double distance(std::span<const double> x, std::span<const double> y);

/// Length of the box diagonal, ||hi - lo||.
double diagonal(const BoundingBox& b);

}  // namespace perch
