#include "pift/ground_truth.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pift {

GridFunction::GridFunction(double a, double b, Eigen::VectorXd values)
    : a_(a), b_(b), values_(std::move(values)) {
  if (!(b_ > a_) || values_.size() < 2) {
    throw std::invalid_argument("grid function: need b > a and at least two nodes");
  }
}

double GridFunction::operator()(double x) const {
  const Eigen::Index n = values_.size();
  const double h = (b_ - a_) / static_cast<double>(n - 1);
  const double s = std::clamp((x - a_) / h, 0.0, static_cast<double>(n - 1));
  const auto i = std::min<Eigen::Index>(static_cast<Eigen::Index>(s), n - 2);
  const double w = s - static_cast<double>(i);
  return (1.0 - w) * values_[i] + w * values_[i + 1];
}

Eigen::VectorXd GridFunction::nodes() const {
  return Eigen::VectorXd::LinSpaced(values_.size(), a_, b_);
}

GridFunction solve_semilinear_bvp(double D, double kappa, double c,
                                  const std::function<double(double)>& f, double a,
                                  double b, double phi_a, double phi_b,
                                  const BvpOptions& options) {
  if (!(D > 0.0)) throw std::invalid_argument("bvp: D must be positive");
  if (options.nodes < 3) throw std::invalid_argument("bvp: need at least three nodes");
  const Eigen::Index n = options.nodes;
  const Eigen::Index m = n - 2;  // interior unknowns
  const double h = (b - a) / static_cast<double>(n - 1);
  const double dh2 = D / (h * h);

  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(n, a, b);
  Eigen::VectorXd phi = Eigen::VectorXd::LinSpaced(n, phi_a, phi_b);
  Eigen::VectorXd fx(n);
  for (Eigen::Index i = 0; i < n; ++i) fx[i] = f(x[i]);

  Eigen::VectorXd residual(m);
  Eigen::SparseMatrix<double> jac(m, m);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  for (int it = 0; it < options.max_iter; ++it) {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(3 * m));
    for (Eigen::Index k = 0; k < m; ++k) {
      const Eigen::Index i = k + 1;
      const double p = phi[i];
      residual[k] = dh2 * (phi[i - 1] - 2.0 * p + phi[i + 1]) - kappa * p * p * p - c * p -
                    fx[i];
      // Negated Jacobian, symmetric positive definite for kappa, c >= 0.
      triplets.emplace_back(k, k, 2.0 * dh2 + 3.0 * kappa * p * p + c);
      if (k > 0) triplets.emplace_back(k, k - 1, -dh2);
      if (k + 1 < m) triplets.emplace_back(k, k + 1, -dh2);
    }
    jac.setFromTriplets(triplets.begin(), triplets.end());
    solver.compute(jac);
    if (solver.info() != Eigen::Success) throw std::runtime_error("bvp: factorization failed");
    const Eigen::VectorXd delta = solver.solve(residual);
    phi.segment(1, m) += delta;
    if (delta.lpNorm<Eigen::Infinity>() < options.tol) return GridFunction(a, b, phi);
  }
  throw std::runtime_error("bvp: Newton iteration did not converge");
}

double heat_exact(double D, double phi0, double phi1, double x) {
  const double c0 = phi0 + 1.0 / D;
  const double c1 = phi1 - c0 + std::exp(-1.0) / D;
  return -std::exp(-x) / D + c1 * x + c0;
}

double AllenCahnTruth::value(double x, double y) const {
  return amplitude * std::exp(-(x * x + y * y)) * std::sin(std::numbers::pi * x) *
         std::sin(std::numbers::pi * y);
}

double AllenCahnTruth::laplacian(double x, double y) const {
  constexpr double pi = std::numbers::pi;
  const double sx = std::sin(pi * x), cx = std::cos(pi * x);
  const double sy = std::sin(pi * y), cy = std::cos(pi * y);
  // d^2/dx^2 [exp(-x^2) sin(pi x)] = exp(-x^2) [(4x^2 - 2 - pi^2) sin - 4 pi x cos].
  const double xx = ((4.0 * x * x - 2.0 - pi * pi) * sx - 4.0 * pi * x * cx) * sy;
  const double yy = ((4.0 * y * y - 2.0 - pi * pi) * sy - 4.0 * pi * y * cy) * sx;
  return amplitude * std::exp(-(x * x + y * y)) * (xx + yy);
}

double AllenCahnTruth::source(double x, double y) const {
  const double phi = value(x, y);
  return -eps * laplacian(x, y) + phi * (phi * phi - 1.0);
}

}  // namespace pift
