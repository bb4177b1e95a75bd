#include "pift/inference.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pift {

namespace {

void check_sigma(const Dataset& data) {
  if (!(data.sigma > 0.0)) throw std::invalid_argument("likelihood: sigma must be positive");
}

double squared_residual_sum(const SquaredResidual& residual, const FieldBasis& basis,
                            const Eigen::Ref<const Eigen::VectorXd>& theta,
                            const std::vector<Point>& points,
                            const Eigen::Ref<const Eigen::VectorXd>& lambda) {
  BasisFrame frame;
  double acc = 0.0;
  for (const Point& x : points) {
    basis.evaluate(x, frame);
    const double r = residual.residual(x, frame.jet(theta), lambda);
    acc += r * r;
  }
  return acc;
}

}  // namespace

double neg_log_likelihood(const Dataset& data, const FieldBasis& basis,
                          const Eigen::Ref<const Eigen::VectorXd>& theta) {
  check_sigma(data);
  basis.check_size(theta);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < data.size(); ++j) {
    const double r = basis.eval(theta, data.locations[static_cast<std::size_t>(j)]) -
                     data.values[j];
    acc += r * r;
  }
  return acc / (2.0 * data.sigma * data.sigma);
}

Eigen::VectorXd grad_theta_nll(const Dataset& data, const FieldBasis& basis,
                               const Eigen::Ref<const Eigen::VectorXd>& theta) {
  std::vector<Eigen::Index> all(static_cast<std::size_t>(data.size()));
  for (Eigen::Index j = 0; j < data.size(); ++j) all[static_cast<std::size_t>(j)] = j;
  if (all.empty()) {
    basis.check_size(theta);
    return Eigen::VectorXd::Zero(basis.size());
  }
  return grad_theta_nll(data, basis, theta, all);
}

Eigen::VectorXd grad_theta_nll(const Dataset& data, const FieldBasis& basis,
                               const Eigen::Ref<const Eigen::VectorXd>& theta,
                               std::span<const Eigen::Index> subset) {
  check_sigma(data);
  basis.check_size(theta);
  if (subset.empty() && data.size() > 0) {
    throw std::invalid_argument("grad_theta_nll: empty subset of a non-empty dataset");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(basis.size());
  if (subset.empty()) return out;
  BasisFrame frame;
  const double inv_var = 1.0 / (data.sigma * data.sigma);
  for (const Eigen::Index j : subset) {
    if (j < 0 || j >= data.size()) throw std::out_of_range("grad_theta_nll: bad index");
    basis.evaluate(data.locations[static_cast<std::size_t>(j)], frame);
    const double r = frame.jet(theta).value - data.values[j];
    out.noalias() += (r * inv_var) * frame.psi;
  }
  out *= static_cast<double>(data.size()) / static_cast<double>(subset.size());
  return out;
}

// ---------------------------------------------------------------------------

ParameterPrior::ParameterPrior(std::vector<Entry> entries) : entries_(std::move(entries)) {
  for (const Entry& e : entries_) {
    if (e.kind == Kind::kGaussian && !(e.stddev > 0.0)) {
      throw std::invalid_argument("parameter prior: Gaussian stddev must be positive");
    }
  }
}

ParameterPrior ParameterPrior::jeffreys(Eigen::Index size) {
  return ParameterPrior(std::vector<Entry>(static_cast<std::size_t>(size)));
}

double ParameterPrior::value(const Eigen::Ref<const Eigen::VectorXd>& lambda) const {
  if (lambda.size() != size()) throw std::invalid_argument("parameter prior: size mismatch");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < size(); ++i) {
    const Entry& e = entries_[static_cast<std::size_t>(i)];
    if (e.kind == Kind::kGaussian) {
      const double z = (lambda[i] - e.mean) / e.stddev;
      acc += 0.5 * z * z;
    }
  }
  return acc;
}

Eigen::VectorXd ParameterPrior::grad(const Eigen::Ref<const Eigen::VectorXd>& lambda) const {
  if (lambda.size() != size()) throw std::invalid_argument("parameter prior: size mismatch");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(size());
  for (Eigen::Index i = 0; i < size(); ++i) {
    const Entry& e = entries_[static_cast<std::size_t>(i)];
    if (e.kind == Kind::kGaussian) g[i] = (lambda[i] - e.mean) / (e.stddev * e.stddev);
  }
  return g;
}

// ---------------------------------------------------------------------------

InfoHamiltonian::InfoHamiltonian(PhysicsPrior prior, BasisPtr basis, Dataset data,
                                 Quadrature quadrature)
    : prior_(std::move(prior)),
      basis_(basis),
      data_(std::move(data)),
      energy_(prior_.model_ptr(), std::move(basis), std::move(quadrature)) {
  data_.validate(basis_->domain());
}

double InfoHamiltonian::value(const Eigen::Ref<const Eigen::VectorXd>& theta,
                              const Eigen::Ref<const Eigen::VectorXd>& lambda) const {
  const double beta = prior_.beta(lambda);
  return neg_log_likelihood(data_, *basis_, theta) +
         beta * energy_.energy(theta, prior_.model_params(lambda));
}

double InfoHamiltonian::value_and_grad(const Eigen::Ref<const Eigen::VectorXd>& theta,
                                       const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                       Eigen::Ref<Eigen::VectorXd> grad) const {
  const double beta = prior_.beta(lambda);
  const double u = energy_.energy_and_grad(theta, prior_.model_params(lambda), grad);
  grad *= beta;
  grad += grad_theta_nll(data_, *basis_, theta);
  return neg_log_likelihood(data_, *basis_, theta) + beta * u;
}

double pinn_loss(const Dataset& data, const FieldBasis& basis,
                 const Eigen::Ref<const Eigen::VectorXd>& theta, double r_d, double r_p,
                 const SquaredResidual& residual, const Quadrature& quadrature,
                 const Eigen::Ref<const Eigen::VectorXd>& lambda) {
  if (r_d < 0.0 || r_p < 0.0) throw std::invalid_argument("pinn_loss: negative weight");
  if (data.empty() && r_d > 0.0) {
    throw std::invalid_argument("pinn_loss: data weight without data");
  }
  basis.check_size(theta);
  double loss = 0.0;
  if (r_d > 0.0) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      const double r = data.values[i] -
                       basis.eval(theta, data.locations[static_cast<std::size_t>(i)]);
      acc += r * r;
    }
    loss += r_d / static_cast<double>(data.size()) * acc;
  }
  if (r_p > 0.0) loss += r_p * total_energy(residual, basis, theta, quadrature, lambda);
  return loss;
}

double bpinn_neg_log_posterior(const Dataset& data, const FieldBasis& basis,
                               const Eigen::Ref<const Eigen::VectorXd>& theta,
                               const Eigen::Ref<const Eigen::VectorXd>& lambda,
                               const SquaredResidual& residual,
                               const std::vector<Point>& collocation_points,
                               double sigma_r, double sigma_theta,
                               const ParameterPrior& lambda_prior) {
  if (!(sigma_r > 0.0) || !(sigma_theta > 0.0)) {
    throw std::invalid_argument("bpinn: sigma_r and sigma_theta must be positive");
  }
  double value = neg_log_likelihood(data, basis, theta);
  value += squared_residual_sum(residual, basis, theta, collocation_points, lambda) /
           (2.0 * sigma_r * sigma_r);
  if (std::isfinite(sigma_theta)) {
    value += theta.squaredNorm() / (2.0 * sigma_theta * sigma_theta);
  }
  if (lambda_prior.size() > 0) value += lambda_prior.value(lambda);
  return value;
}

JointPosterior::JointPosterior(InfoHamiltonian hamiltonian, ParameterPrior lambda_prior)
    : hamiltonian_(std::move(hamiltonian)), lambda_prior_(std::move(lambda_prior)) {
  if (lambda_prior_.size() != hamiltonian_.prior().num_params()) {
    throw std::invalid_argument("joint posterior: prior size does not match parameters");
  }
}

JointPosterior::Result JointPosterior::evaluate(
    const Eigen::Ref<const Eigen::VectorXd>& theta,
    const Eigen::Ref<const Eigen::VectorXd>& lambda) {
  Result r;
  r.value = hamiltonian_.value(theta, lambda) + lambda_prior_.value(lambda);
  r.lambda_changed = last_lambda_.has_value() && *last_lambda_ != lambda;
  last_lambda_ = lambda;
  return r;
}

}  // namespace pift
