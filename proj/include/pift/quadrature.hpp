#pragma once

#include <Eigen/Dense>

#include <random>
#include <vector>

#include "pift/geometry.hpp"

namespace pift {

using Rng = std::mt19937_64;

/// Nodes and weights approximating an integral over a domain.
struct Quadrature {
  std::vector<Point> nodes;
  Eigen::VectorXd weights;

  std::size_t size() const { return nodes.size(); }
  bool empty() const { return nodes.empty(); }
};

/// Composite trapezoid on an interval (n nodes) or tensor trapezoid on a
/// box (nx by ny nodes; ny defaults to nx).
Quadrature trapezoid(const Domain& domain, int nx, int ny = 0);

/// Equal weights volume / n at the given points (a sampling average).
Quadrature collocation(const Domain& domain, std::vector<Point> points);

/// Importance-sampling density q over a domain.
class SpatialDistribution {
 public:
  virtual ~SpatialDistribution() = default;
  virtual Point sample(Rng& rng) const = 0;
  virtual double density(const Point& x) const = 0;
};

/// q(x) = 1 / |Omega|.
class UniformDistribution final : public SpatialDistribution {
 public:
  explicit UniformDistribution(Domain domain) : domain_(std::move(domain)) {}

  Point sample(Rng& rng) const override;
  double density(const Point&) const override { return 1.0 / domain_.volume(); }
  const Domain& domain() const { return domain_; }

 private:
  Domain domain_;
};

/// Draws a uniform double in [0, 1) from the engine with a fixed, portable
/// recipe (53 random bits), so chains are reproducible across library
/// implementations.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal draw via the Marsaglia polar method with a portable
/// uniform source.
double standard_normal(Rng& rng);

}  // namespace pift
