#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pift/basis.hpp"
#include "pift/dataset.hpp"
#include "pift/energy.hpp"
#include "pift/inference.hpp"
#include "pift/quadrature.hpp"

namespace pift {

/// eps_t = alpha0 / t^alpha1. Throws std::invalid_argument for t < 1.
double learning_rate(long t, double alpha0, double alpha1);

/// Variance of the injected noise eta_t as a function of eps_t.
///   kTwoEps:  2 eps (samples exp(-H) exactly in the small-step limit)
///   kEps:     eps
///   kSqrtEps: sqrt(eps)
enum class NoiseConvention { kTwoEps, kEps, kSqrtEps };

NoiseConvention parse_noise_convention(const std::string& name);
std::string to_string(NoiseConvention noise);
double noise_variance(NoiseConvention noise, double eps);

/// Retention schedule shared by all samplers: keep the state after step t
/// when t > burn_in and (t - burn_in) % thin == 0.
struct Retention {
  long steps = 0;
  long burn_in = -1;  // < 0: 10% of steps
  long thin = 0;      // <= 0: smallest thin keeping at most 1e5 rows

  /// Fills defaults and validates. Throws std::invalid_argument.
  Retention resolved() const;
  long rows() const;
  bool keep(long t) const { return t > burn_in && (t - burn_in) % thin == 0; }
};

struct SgldConfig {
  double alpha0 = 0.0;
  double alpha1 = 0.51;
  int n = 1;  // spatial points per step
  int b = 1;  // data points per step
  Retention retention;
  std::uint64_t seed = 0;
  NoiseConvention noise = NoiseConvention::kTwoEps;

  /// Throws std::invalid_argument; alpha1 must lie in (0.5, 1].
  void validate() const;
};

/// alpha0 = 0.1 / beta style prior scaling: scale / beta.
double prior_alpha0(double scale, double beta);
/// alpha0 = alpha_hat / max(beta, sigma^-2).
double posterior_alpha0(double alpha_hat, double beta, double sigma);

/// Retained samples with metadata.
struct Chain {
  std::vector<std::string> names;
  Eigen::MatrixXd samples;  // rows = retained states
  std::uint64_t seed = 0;
  nlohmann::json info = nlohmann::json::object();

  Eigen::Index rows() const { return samples.rows(); }
  Eigen::Index dim() const { return samples.cols(); }

  /// Comma-separated, header row, 17 significant digits, LF endings.
  void write_csv(const std::string& path) const;
  static Chain read_csv(const std::string& path);
};

/// Raised when a chain produces a non-finite state. Carries the rows
/// retained before the failure.
class SamplerAbort : public std::runtime_error {
 public:
  SamplerAbort(const std::string& what, long step, Chain partial)
      : std::runtime_error(what), step_(step), partial_(std::move(partial)) {}
  long step() const { return step_; }
  const Chain& partial() const { return partial_; }

 private:
  long step_;
  Chain partial_;
};

/// The field target of a forward problem: exp(-beta U(theta; lambda)),
/// optionally times the likelihood.
struct FieldTarget {
  EnergyPtr model;
  BasisPtr basis;
  double beta = 1.0;
  /// Model parameters; empty means the model defaults.
  Eigen::VectorXd lambda;
};

/// Stateful SGLD chain over field coefficients. Each step draws the noise,
/// then n spatial points, then b data indices (skipped for empty data).
class FieldSgld {
 public:
  FieldSgld(const EnergyModel& model, const FieldBasis& basis,
            const SpatialDistribution& q, const Dataset* data, double alpha1,
            int n, int b, NoiseConvention noise);

  /// One update at step size alpha0 / t^alpha1 with t the internal counter.
  void step(double alpha0, double beta,
            const Eigen::Ref<const Eigen::VectorXd>& model_lambda, Rng& rng);

  const Eigen::VectorXd& theta() const { return theta_; }
  void set_theta(const Eigen::VectorXd& theta);
  long steps_taken() const { return t_; }
  /// Resets the step counter so the next step uses alpha0 / 1^alpha1.
  void restart_schedule() { t_ = 0; }

 private:
  const EnergyModel& model_;
  const FieldBasis& basis_;
  const SpatialDistribution& q_;
  const Dataset* data_;
  double alpha1_;
  int n_;
  int b_;
  NoiseConvention noise_;
  long t_ = 0;
  Eigen::VectorXd theta_;
  Eigen::VectorXd grad_;
  std::vector<Eigen::Index> subset_;
  BasisFrame frame_;
};

/// Samples exp(-beta U) over theta (data-free SGLD).
Chain sgld_prior(const FieldTarget& target, const SgldConfig& config, Rng& rng,
                 const Eigen::VectorXd& theta0 = {});

/// Samples exp(-ell - beta U) with (s/b) data subsampling.
Chain sgld_posterior(const FieldTarget& target, const Dataset& data,
                     const SgldConfig& config, Rng& rng,
                     const Eigen::VectorXd& theta0 = {});

// ---------------------------------------------------------------------------
// Nested SGLD for physics parameters

struct InverseConfig {
  double alpha0 = 1e-3;  // outer step scale for lambda
  double alpha1 = 0.51;
  /// Field chains: prior alpha0 = prior_scale / beta, posterior alpha0 =
  /// posterior_alpha_hat / max(beta, sigma^-2), both re-evaluated each step.
  double prior_scale = 0.1;
  double posterior_alpha_hat = 1.0;
  double field_alpha1 = 0.51;
  int T = 10;
  int T_tilde = 1;
  int k = 1;
  int k_tilde = 1;
  int n = 1;
  int n_tilde = 1;
  int b = 1;
  long warmup = 1'000'000;
  /// Each outer iteration runs the field samplers as fresh calls, so their
  /// step-size schedules restart at t = 1 (theta persists). When false the
  /// field schedules keep decaying from the end of warmup.
  bool restart_inner_schedule = true;
  Retention retention;  // over outer iterations; steps = maxiter
  /// Keep field-chain snapshots alongside each retained lambda row.
  bool record_fields = true;
  std::uint64_t seed = 0;
  NoiseConvention noise = NoiseConvention::kTwoEps;

  void validate() const;
};

struct InverseResult {
  Chain parameters;        // lambda samples
  Chain prior_fields;      // prior chain theta at retained rows
  Chain posterior_fields;  // posterior chain theta at retained rows
};

/// Integral of grad_lambda h over the domain by quadrature, for one field.
Eigen::VectorXd grad_lambda_energy(const PhysicsPrior& prior, const FieldBasis& basis,
                                   const Eigen::Ref<const Eigen::VectorXd>& theta,
                                   const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                   const Quadrature& quadrature);

/// Stochastic estimate of grad_lambda H(lambda | d):
///   mean over posterior fields and n_tilde points of grad h / q
///   - mean over prior fields and n points of grad h / q
///   + grad H(lambda).
Eigen::VectorXd lambda_gradient_estimate(
    const PhysicsPrior& prior, const FieldBasis& basis,
    const Eigen::Ref<const Eigen::VectorXd>& lambda,
    const std::vector<Eigen::VectorXd>& posterior_fields,
    const std::vector<Eigen::VectorXd>& prior_fields, int n_tilde, int n,
    const SpatialDistribution& q, const ParameterPrior& lambda_prior, Rng& rng);

/// Nested SGLD over lambda with persistent inner prior/posterior chains.
InverseResult sgld_inverse(const PhysicsPrior& prior, BasisPtr basis,
                           const Dataset& data, const Eigen::VectorXd& lambda0,
                           const ParameterPrior& lambda_prior,
                           const InverseConfig& config, Rng& rng,
                           const Eigen::VectorXd& theta0 = {});

// ---------------------------------------------------------------------------
// Hamiltonian Monte Carlo

struct HmcConfig {
  double step_size = 0.01;
  int leapfrog_steps = 10;
  /// Symmetric positive-definite mass matrix; empty means identity.
  Eigen::MatrixXd mass;
  Retention retention;
  std::uint64_t seed = 0;
  /// Trajectories whose energy error exceeds this are divergent.
  double divergence_threshold = 1000.0;

  void validate() const;
};

/// Returns -log density and writes its gradient.
using NegLogDensity =
    std::function<double(const Eigen::VectorXd& theta, Eigen::VectorXd& grad)>;

/// Leapfrog HMC with a Metropolis correction. info holds acceptance_rate and
/// divergences.
Chain hmc_sample(const NegLogDensity& target, const Eigen::VectorXd& theta0,
                 const HmcConfig& config, Rng& rng,
                 std::vector<std::string> names = {});

/// Central-difference Hessian of `target` built from its gradient,
/// symmetrised.
Eigen::MatrixXd fd_hessian(const NegLogDensity& target, const Eigen::VectorXd& theta,
                           double h = 1e-5);

/// Damped Newton descent to a local minimum of `target`, using |eigenvalues|
/// of the finite-difference Hessian (floored at 1e-3) and backtracking.
Eigen::VectorXd find_mode(const NegLogDensity& target, const Eigen::VectorXd& theta0,
                          int max_iter = 200, double grad_tol = 1e-8);

/// Replaces each eigenvalue of a symmetric matrix by max(|value|, floor).
Eigen::MatrixXd spd_projection(const Eigen::MatrixXd& m, double floor);

/// theta_0, theta_1, ... names.
std::vector<std::string> indexed_names(const std::string& stem, Eigen::Index count);

}  // namespace pift
