#include "pift/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace pift {

namespace {

Eigen::VectorXd trapezoid_weights(int n, double length) {
  const double h = length / static_cast<double>(n - 1);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, h);
  w[0] = w[n - 1] = 0.5 * h;
  return w;
}

}  // namespace

Quadrature trapezoid(const Domain& domain, int nx, int ny) {
  if (ny == 0) ny = nx;
  if (nx < 2 || (domain.dim() == 2 && ny < 2)) {
    throw std::invalid_argument("trapezoid: need at least two nodes per axis");
  }
  Quadrature q;
  const Eigen::VectorXd xs =
      Eigen::VectorXd::LinSpaced(nx, domain.lo(0), domain.hi(0));
  const Eigen::VectorXd wx = trapezoid_weights(nx, domain.length(0));
  if (domain.dim() == 1) {
    q.nodes.reserve(nx);
    for (int i = 0; i < nx; ++i) q.nodes.push_back({xs[i], 0.0});
    q.weights = wx;
    return q;
  }
  const Eigen::VectorXd ys =
      Eigen::VectorXd::LinSpaced(ny, domain.lo(1), domain.hi(1));
  const Eigen::VectorXd wy = trapezoid_weights(ny, domain.length(1));
  q.nodes.reserve(static_cast<std::size_t>(nx) * ny);
  q.weights.resize(static_cast<Eigen::Index>(nx) * ny);
  Eigen::Index k = 0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      q.nodes.push_back({xs[i], ys[j]});
      q.weights[k++] = wx[i] * wy[j];
    }
  }
  return q;
}

Quadrature collocation(const Domain& domain, std::vector<Point> points) {
  Quadrature q;
  const auto n = static_cast<Eigen::Index>(points.size());
  q.nodes = std::move(points);
  q.weights = Eigen::VectorXd::Constant(
      n, n > 0 ? domain.volume() / static_cast<double>(n) : 0.0);
  return q;
}

Point UniformDistribution::sample(Rng& rng) const {
  Point p;
  p.x = domain_.lo(0) + domain_.length(0) * uniform01(rng);
  if (domain_.dim() == 2) {
    p.y = domain_.lo(1) + domain_.length(1) * uniform01(rng);
  }
  return p;
}

double standard_normal(Rng& rng) {
  // Polar method; the second variate is discarded.
  while (true) {
    const double u = 2.0 * uniform01(rng) - 1.0;
    const double v = 2.0 * uniform01(rng) - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
}

}  // namespace pift
