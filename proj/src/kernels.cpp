#include "pift/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace pift {

CovarianceKernel squared_exponential(double lengthscale, double variance) {
  if (!(lengthscale > 0.0) || !(variance > 0.0)) {
    throw std::invalid_argument(
        "squared_exponential: lengthscale and variance must be positive");
  }
  const double inv_l2 = 1.0 / (lengthscale * lengthscale);
  CovarianceKernel k;
  k.value = [=](double x, double xp) {
    const double r = x - xp;
    return variance * std::exp(-0.5 * r * r * inv_l2);
  };
  k.d_dx = [=](double x, double xp) {
    const double r = x - xp;
    return -variance * r * inv_l2 * std::exp(-0.5 * r * r * inv_l2);
  };
  k.d2_dx2 = [=](double x, double xp) {
    const double r = x - xp;
    return variance * (r * r * inv_l2 - 1.0) * inv_l2 *
           std::exp(-0.5 * r * r * inv_l2);
  };
  k.metadata = {{"lengthscale", lengthscale}, {"variance", variance}};
  return k;
}

CovarianceKernel white_noise(double c) {
  CovarianceKernel k;
  k.value = [c](double x, double xp) { return x == xp ? c : 0.0; };
  k.metadata = {{"variance", c}};
  return k;
}

double kg_green_1d(double alpha, double x, double x_prime) {
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("kg_green_1d: alpha must be positive");
  }
  return std::exp(-alpha * std::abs(x - x_prime)) / (2.0 * alpha);
}

CovarianceKernel klein_gordon_kernel(double alpha) {
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("klein_gordon_kernel: alpha must be positive");
  }
  CovarianceKernel k;
  k.value = [alpha](double x, double xp) { return kg_green_1d(alpha, x, xp); };
  k.metadata = {{"alpha", alpha}};
  return k;
}

}  // namespace pift
