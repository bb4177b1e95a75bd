#include "pift/analytic.hpp"

#include <cmath>
#include <stdexcept>

namespace pift {

JitteredCholesky cholesky_with_jitter(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols()) {
    throw std::invalid_argument("cholesky: matrix is not square");
  }
  JitteredCholesky out;
  const Eigen::Index n = matrix.rows();
  if (n == 0) return out;
  const double scale = std::max(matrix.diagonal().cwiseAbs().mean(), 1e-300);
  for (const double rel : {0.0, 1e-12, 1e-10, 1e-8}) {
    const double jitter = rel * scale;
    Eigen::MatrixXd a = matrix;
    a.diagonal().array() += jitter;
    out.llt.compute(a);
    if (out.llt.info() == Eigen::Success) {
      out.jitter = jitter;
      return out;
    }
  }
  throw std::runtime_error("cholesky: matrix not positive definite after jitter 1e-8");
}

Eigen::MatrixXd kernel_matrix(const CovarianceKernel& kernel,
                              const std::vector<double>& xs) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k(i, j) = kernel(xs[static_cast<std::size_t>(i)], xs[static_cast<std::size_t>(j)]);
    }
  }
  return k;
}

GaussianFieldPosterior free_posterior(CovarianceKernel kernel, MeanFunction prior_mean,
                                      const Dataset& data, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("free_posterior: beta must be positive");
  if (!(data.sigma > 0.0)) throw std::invalid_argument("free_posterior: sigma must be positive");
  if (!kernel.value) throw std::invalid_argument("free_posterior: kernel has no value");
  if (!prior_mean) prior_mean = [](double) { return 0.0; };

  GaussianFieldPosterior post;
  post.kernel_ = std::move(kernel);
  post.prior_mean_ = std::move(prior_mean);
  post.beta_ = beta;
  for (const Point& p : data.locations) post.xs_.push_back(p.x);

  const Eigen::Index s = data.size();
  post.k_ = kernel_matrix(post.kernel_, post.xs_) / beta;
  post.k_.diagonal().array() += data.sigma * data.sigma;
  post.chol_ = cholesky_with_jitter(post.k_);

  Eigen::VectorXd residual(s);
  for (Eigen::Index j = 0; j < s; ++j) {
    residual[j] = data.values[j] - post.prior_mean_(post.xs_[static_cast<std::size_t>(j)]);
  }
  post.weights_ = s > 0 ? Eigen::VectorXd(post.chol_.llt.solve(residual)) : residual;
  return post;
}

Eigen::VectorXd GaussianFieldPosterior::cross(double x) const {
  Eigen::VectorXd k(static_cast<Eigen::Index>(xs_.size()));
  for (std::size_t j = 0; j < xs_.size(); ++j) {
    k[static_cast<Eigen::Index>(j)] = kernel_(x, xs_[j]);
  }
  return k;
}

double GaussianFieldPosterior::mean(double x) const {
  const double m = prior_mean_(x);
  if (xs_.empty()) return m;
  return m + cross(x).dot(weights_) / beta_;
}

double GaussianFieldPosterior::covariance(double x, double xp) const {
  const double prior = kernel_(x, xp) / beta_;
  if (xs_.empty()) return prior;
  const Eigen::VectorXd kx = cross(x);
  const Eigen::VectorXd kxp = cross(xp);
  return prior - kx.dot(chol_.llt.solve(kxp)) / (beta_ * beta_);
}

double GaussianFieldPosterior::stddev(double x) const {
  return std::sqrt(std::max(variance(x), 0.0));
}

Quadrature kg_truncated_quadrature(double alpha, double a, double b, int num_nodes,
                                   double radius) {
  if (!(alpha > 0.0)) throw std::invalid_argument("kg quadrature: alpha must be positive");
  if (radius < 0.0) radius = 10.0 / alpha;
  return trapezoid(Domain::interval(a - radius, b + radius), num_nodes);
}

MeanFunction kg_prior_mean(double alpha, std::function<double(double)> source,
                           const Quadrature& quadrature) {
  if (!(alpha > 0.0)) throw std::invalid_argument("kg_prior_mean: alpha must be positive");
  if (quadrature.empty()) throw std::invalid_argument("kg_prior_mean: empty quadrature");
  const auto n = static_cast<Eigen::Index>(quadrature.size());
  Eigen::VectorXd nodes(n), wq(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    nodes[i] = quadrature.nodes[static_cast<std::size_t>(i)].x;
    wq[i] = quadrature.weights[i] * source(nodes[i]);
  }
  return [alpha, nodes = std::move(nodes), wq = std::move(wq)](double x) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < nodes.size(); ++i) {
      acc += kg_green_1d(alpha, x, nodes[i]) * wq[i];
    }
    return acc;
  };
}

Eigen::MatrixXd sample_discrete_prior(const Eigen::MatrixXd& covariance, Rng& rng,
                                      int num_samples) {
  if (num_samples < 0) throw std::invalid_argument("sample_discrete_prior: negative count");
  const JitteredCholesky chol = cholesky_with_jitter(covariance);
  const Eigen::MatrixXd l = chol.llt.matrixL();
  const Eigen::Index n = covariance.rows();
  Eigen::MatrixXd out(num_samples, n);
  Eigen::VectorXd z(n);
  for (int s = 0; s < num_samples; ++s) {
    for (Eigen::Index i = 0; i < n; ++i) z[i] = standard_normal(rng);
    out.row(s) = (l * z).transpose();
  }
  return out;
}

}  // namespace pift
