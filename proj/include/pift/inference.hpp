#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pift/basis.hpp"
#include "pift/dataset.hpp"
#include "pift/energy.hpp"
#include "pift/quadrature.hpp"

namespace pift {

// ---------------------------------------------------------------------------
// Likelihood

/// sum_j (phi(x_j; theta) - d_j)^2 / (2 sigma^2).
double neg_log_likelihood(const Dataset& data, const FieldBasis& basis,
                          const Eigen::Ref<const Eigen::VectorXd>& theta);

/// Full-data gradient of neg_log_likelihood in theta.
Eigen::VectorXd grad_theta_nll(const Dataset& data, const FieldBasis& basis,
                               const Eigen::Ref<const Eigen::VectorXd>& theta);

/// Subsampled gradient (s / |subset|) sum_{j in subset} grad ell_j. Indices may
/// repeat. Throws when the subset is empty but the dataset is not.
Eigen::VectorXd grad_theta_nll(const Dataset& data, const FieldBasis& basis,
                               const Eigen::Ref<const Eigen::VectorXd>& theta,
                               std::span<const Eigen::Index> subset);

// ---------------------------------------------------------------------------
// Priors over physics parameters

/// H(lambda) = -log p(lambda) on the unconstrained parameter vector, one
/// independent entry per coordinate. Jeffreys priors on positive quantities
/// are flat in log-space and contribute nothing.
class ParameterPrior {
 public:
  enum class Kind { kJeffreys, kFlat, kGaussian };
  struct Entry {
    Kind kind = Kind::kJeffreys;
    double mean = 0.0;
    double stddev = 1.0;
  };

  ParameterPrior() = default;
  explicit ParameterPrior(std::vector<Entry> entries);
  /// Jeffreys on every coordinate.
  static ParameterPrior jeffreys(Eigen::Index size);

  Eigen::Index size() const { return static_cast<Eigen::Index>(entries_.size()); }
  const std::vector<Entry>& entries() const { return entries_; }

  double value(const Eigen::Ref<const Eigen::VectorXd>& lambda) const;
  Eigen::VectorXd grad(const Eigen::Ref<const Eigen::VectorXd>& lambda) const;

 private:
  std::vector<Entry> entries_;
};

// ---------------------------------------------------------------------------
// Hamiltonians

/// H(theta | d) = ell(d, theta) + beta U(theta), with U by deterministic
/// quadrature.
class InfoHamiltonian {
 public:
  InfoHamiltonian(PhysicsPrior prior, BasisPtr basis, Dataset data,
                  Quadrature quadrature);

  double value(const Eigen::Ref<const Eigen::VectorXd>& theta,
               const Eigen::Ref<const Eigen::VectorXd>& lambda) const;
  double value_and_grad(const Eigen::Ref<const Eigen::VectorXd>& theta,
                        const Eigen::Ref<const Eigen::VectorXd>& lambda,
                        Eigen::Ref<Eigen::VectorXd> grad) const;

  const PhysicsPrior& prior() const { return prior_; }
  const FieldBasis& basis() const { return *basis_; }
  const Dataset& data() const { return data_; }
  const QuadratureEnergy& energy() const { return energy_; }

 private:
  PhysicsPrior prior_;
  BasisPtr basis_;
  Dataset data_;
  QuadratureEnergy energy_;
};

/// (r_d / s) sum_i (d_i - phi(x_i))^2 + r_p * quadrature of r^2, with r the
/// strong-form residual of `residual`.
double pinn_loss(const Dataset& data, const FieldBasis& basis,
                 const Eigen::Ref<const Eigen::VectorXd>& theta, double r_d,
                 double r_p, const SquaredResidual& residual,
                 const Quadrature& quadrature,
                 const Eigen::Ref<const Eigen::VectorXd>& lambda);

/// B-PINN negative log posterior without its additive constant:
///   ell(d, theta) + sum_i r(x_i^c)^2 / (2 sigma_r^2)
///   + |theta|^2 / (2 sigma_theta^2) + H(lambda).
/// sigma_theta = +inf drops the parameter prior term.
double bpinn_neg_log_posterior(const Dataset& data, const FieldBasis& basis,
                               const Eigen::Ref<const Eigen::VectorXd>& theta,
                               const Eigen::Ref<const Eigen::VectorXd>& lambda,
                               const SquaredResidual& residual,
                               const std::vector<Point>& collocation_points,
                               double sigma_r, double sigma_theta,
                               const ParameterPrior& lambda_prior);

/// Joint -log p(theta, lambda | d) without log Z(lambda).
///
/// Values are only comparable across theta at a fixed lambda. Each result
/// carries a flag that is raised when lambda differs from the previous call.
class JointPosterior {
 public:
  struct Result {
    double value = 0.0;
    /// Always true: log Z(lambda) is not included.
    bool partition_function_omitted = true;
    /// lambda differs from the lambda of the previous evaluation.
    bool lambda_changed = false;
  };

  JointPosterior(InfoHamiltonian hamiltonian, ParameterPrior lambda_prior);

  Result evaluate(const Eigen::Ref<const Eigen::VectorXd>& theta,
                  const Eigen::Ref<const Eigen::VectorXd>& lambda);

 private:
  InfoHamiltonian hamiltonian_;
  ParameterPrior lambda_prior_;
  std::optional<Eigen::VectorXd> last_lambda_;
};

}  // namespace pift
