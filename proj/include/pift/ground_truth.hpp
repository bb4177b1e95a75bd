#pragma once

#include <Eigen/Dense>

#include <functional>

namespace pift {

/// Values on a uniform 1D grid with linear interpolation between nodes.
class GridFunction {
 public:
  GridFunction(double a, double b, Eigen::VectorXd values);

  double operator()(double x) const;
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd nodes() const;
  double a() const { return a_; }
  double b() const { return b_; }

 private:
  double a_;
  double b_;
  Eigen::VectorXd values_;
};

struct BvpOptions {
  int nodes = 4097;
  double tol = 1e-10;
  int max_iter = 50;
};

/// Solves D phi'' - kappa phi^3 - c phi = f on [a, b] with Dirichlet data by
/// second-order finite differences and Newton iteration. Throws
/// std::runtime_error if Newton does not reach `tol` in max-norm update.
GridFunction solve_semilinear_bvp(double D, double kappa, double c,
                                  const std::function<double(double)>& f, double a,
                                  double b, double phi_a, double phi_b,
                                  const BvpOptions& options = {});

/// Closed-form solution of D phi'' + exp(-x) = 0 on [0, 1] with
/// phi(0) = phi0, phi(1) = phi1.
double heat_exact(double D, double phi0, double phi1, double x);

/// phi(x, y) = A exp(-(x^2 + y^2)) sin(pi x) sin(pi y) on [-1, 1]^2 and the
/// source f = -eps lap(phi) + phi (phi^2 - 1) that makes it solve
/// eps lap(phi) - phi (phi^2 - 1) + f = 0.
struct AllenCahnTruth {
  double eps = 0.01;
  double amplitude = 2.0;

  double value(double x, double y) const;
  double laplacian(double x, double y) const;
  double source(double x, double y) const;
};

}  // namespace pift
