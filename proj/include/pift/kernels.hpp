#pragma once

#include <functional>
#include <map>
#include <string>

namespace pift {

/// A 1D covariance function S^{-1}(x, x') with optional derivatives in the
/// first argument (needed when the kernel is used to build a differentiable
/// KLE basis). Missing derivatives are treated as zero.
struct CovarianceKernel {
  std::function<double(double, double)> value;
  std::function<double(double, double)> d_dx;
  std::function<double(double, double)> d2_dx2;
  std::map<std::string, double> metadata;

  double operator()(double x, double xp) const { return value(x, xp); }
};

/// variance * exp(-(x - x')^2 / (2 ell^2)).
CovarianceKernel squared_exponential(double lengthscale, double variance = 1.0);

/// c on the diagonal (x == x'), zero elsewhere.
CovarianceKernel white_noise(double c);

/// Green's function of (-d^2/dx^2 + alpha^2) on the real line:
/// exp(-alpha |x - x'|) / (2 alpha). Throws std::invalid_argument for
/// alpha <= 0.
double kg_green_1d(double alpha, double x, double x_prime);

/// kg_green_1d wrapped as a kernel.
CovarianceKernel klein_gordon_kernel(double alpha);

}  // namespace pift
