#pragma once

#include <array>
#include <string>

namespace pift {

/// A point in a 1D or 2D physical domain. For 1D problems only `x` is used.
struct Point {
  double x = 0.0;
  double y = 0.0;

  double operator[](int d) const { return d == 0 ? x : y; }
};

/// Axis-aligned closed box [lo, hi] in one or two dimensions.
class Domain {
 public:
  static Domain interval(double a, double b);
  static Domain box(double ax, double bx, double ay, double by);

  int dim() const { return dim_; }
  double lo(int d) const { return lo_[d]; }
  double hi(int d) const { return hi_[d]; }
  double length(int d) const { return hi_[d] - lo_[d]; }
  double volume() const;

  /// Closed containment with absolute slack `tol`.
  bool contains(const Point& p, double tol = 1e-12) const;

  std::string describe() const;

 private:
  Domain(int dim, std::array<double, 2> lo, std::array<double, 2> hi);

  int dim_;
  std::array<double, 2> lo_;
  std::array<double, 2> hi_;
};

}  // namespace pift
