#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "pift/geometry.hpp"

namespace pift {

/// Point measurements d_j = phi(x_j) + sigma * noise.
struct Dataset {
  std::vector<Point> locations;
  Eigen::VectorXd values;
  double sigma = 1.0;

  Eigen::Index size() const { return values.size(); }
  bool empty() const { return values.size() == 0; }

  /// Throws std::invalid_argument on sigma <= 0, size mismatch, or a
  /// location outside `domain`.
  void validate(const Domain& domain) const;

  /// CSV with header "x,value" (1D) or "x,y,value" (2D).
  void write_csv(const std::string& path, int dim) const;
  static Dataset read_csv(const std::string& path, double sigma);
};

}  // namespace pift
