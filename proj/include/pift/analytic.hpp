#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "pift/dataset.hpp"
#include "pift/kernels.hpp"
#include "pift/quadrature.hpp"

namespace pift {

/// Cholesky factor of a symmetric matrix with an escalating diagonal jitter.
struct JitteredCholesky {
  Eigen::LLT<Eigen::MatrixXd> llt;
  /// Absolute jitter added to the diagonal (0 when none was needed).
  double jitter = 0.0;
};

/// Tries the plain factorization, then relative jitters 1e-12, 1e-10, 1e-8
/// (scaled by the mean diagonal). Throws std::runtime_error if all fail.
JitteredCholesky cholesky_with_jitter(const Eigen::MatrixXd& matrix);

using MeanFunction = std::function<double(double)>;

/// Gaussian field posterior of the free theory conditioned on Dirac point
/// measurements with noise covariance N = sigma^2 I:
///
///   K      = N + k(X, X) / beta
///   mean   = m(x) + k(x, X) K^{-1} (d - m(X)) / beta
///   cov    = k(x, x') / beta - k(x, X) K^{-1} k(X, x') / beta^2
///
/// Immutable after construction.
class GaussianFieldPosterior {
 public:
  double mean(double x) const;
  double covariance(double x, double xp) const;
  double variance(double x) const { return covariance(x, x); }
  double stddev(double x) const;

  double beta() const { return beta_; }
  const Eigen::MatrixXd& k_matrix() const { return k_; }
  /// K^{-1} (d - m(X)).
  const Eigen::VectorXd& weights() const { return weights_; }
  double jitter() const { return chol_.jitter; }
  const std::vector<double>& locations() const { return xs_; }

  friend GaussianFieldPosterior free_posterior(CovarianceKernel kernel,
                                               MeanFunction prior_mean,
                                               const Dataset& data, double beta);

 private:
  GaussianFieldPosterior() = default;
  Eigen::VectorXd cross(double x) const;

  CovarianceKernel kernel_;
  MeanFunction prior_mean_;
  double beta_ = 1.0;
  std::vector<double> xs_;
  Eigen::MatrixXd k_;
  JitteredCholesky chol_;
  Eigen::VectorXd weights_;
};

/// Conditions the prior N(m, k / beta) on 1D point data.
GaussianFieldPosterior free_posterior(CovarianceKernel kernel,
                                      MeanFunction prior_mean,
                                      const Dataset& data, double beta);

/// Quadrature over [a - radius, b + radius] for Klein-Gordon convolutions;
/// radius defaults to 10 / alpha.
Quadrature kg_truncated_quadrature(double alpha, double a, double b, int num_nodes,
                                   double radius = -1.0);

/// m(x) = int G(x, x') q(x') dx' with the 1D Klein-Gordon Green's function,
/// so that (-d^2/dx^2 + alpha^2) m = q. Throws on empty quadrature.
MeanFunction kg_prior_mean(double alpha, std::function<double(double)> source,
                           const Quadrature& quadrature);

/// Samples from N(0, C) given a covariance matrix on a grid; one sample per
/// row.
Eigen::MatrixXd sample_discrete_prior(const Eigen::MatrixXd& covariance, Rng& rng,
                                      int num_samples);

/// k(x_i, x_j) over a set of 1D points.
Eigen::MatrixXd kernel_matrix(const CovarianceKernel& kernel,
                              const std::vector<double>& xs);

}  // namespace pift
