#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pift/basis.hpp"
#include "pift/quadrature.hpp"

namespace pift {

// ---------------------------------------------------------------------------
// Source terms

/// A source term f(x), either a closed form, a gamma-blend of two closed
/// forms, or a KLE field whose coefficients live in the physics-parameter
/// vector.
class SourceTerm {
 public:
  using Fn = std::function<double(const Point&)>;

  /// f(x) = 0.
  SourceTerm();
  static SourceTerm closed_form(Fn f, std::string label);
  /// gamma * f1(x) + (1 - gamma) * f2(x).
  static SourceTerm blend(double gamma, Fn f1, Fn f2, std::string label);
  /// sum_m sqrt(mu_m) xi_m(x) c_m with c taken from the parameter vector.
  static SourceTerm kle(std::shared_ptr<const KleBasis> basis);

  /// Number of coefficients this source reads from the parameter vector.
  Eigen::Index num_coeffs() const;
  bool is_kle() const { return kle_ != nullptr; }
  const std::string& label() const { return label_; }

  /// Value at x. `coeffs` must have num_coeffs() entries.
  double value(const Point& x, const Eigen::Ref<const Eigen::VectorXd>& coeffs) const;
  /// d f / d coeffs at x (KLE features; empty for closed forms).
  void grad_coeffs(const Point& x, Eigen::Ref<Eigen::VectorXd> out) const;

 private:
  Fn fn_;
  std::shared_ptr<const KleBasis> kle_;
  std::string label_;
};

// ---------------------------------------------------------------------------
// Physics parameters

/// A strictly positive physics coefficient. When `inferred` it is exposed to
/// samplers as log(value) in the unconstrained parameter vector.
struct PositiveParam {
  double value = 1.0;
  bool inferred = false;
};

/// Partial derivatives of an energy density with respect to the field jet.
struct DensityPartials {
  double u = 0.0;
  double du_dphi = 0.0;
  Eigen::Vector2d du_dgrad = Eigen::Vector2d::Zero();
  double du_dlap = 0.0;
};

/// An energy density u(x, phi, grad phi; lambda).
///
/// lambda is the unconstrained physics-parameter vector: log-coefficients for
/// inferred positive parameters, followed by KLE source coefficients when the
/// source is a KLE field. Models are immutable and thread-safe.
class EnergyModel {
 public:
  virtual ~EnergyModel() = default;

  virtual std::string name() const = 0;

  Eigen::Index num_params() const {
    return static_cast<Eigen::Index>(param_names_.size());
  }
  const std::vector<std::string>& param_names() const { return param_names_; }
  /// lambda at construction time.
  const Eigen::VectorXd& default_params() const { return defaults_; }

  /// Partials with the source value f(x) supplied by the caller, so fixed
  /// sources can be tabulated once per quadrature node.
  virtual DensityPartials partials_given_source(
      const Point& x, const FieldJet& phi,
      const Eigen::Ref<const Eigen::VectorXd>& lambda, double f) const = 0;

  DensityPartials partials(const Point& x, const FieldJet& phi,
                           const Eigen::Ref<const Eigen::VectorXd>& lambda) const {
    return partials_given_source(x, phi, lambda, source_at(x, lambda));
  }

  const SourceTerm& source() const { return source_; }
  /// True when the source reads coefficients from lambda.
  bool source_has_params() const { return source_offset_ >= 0; }
  double source_at(const Point& x, const Eigen::Ref<const Eigen::VectorXd>& lambda) const;

  double density(const Point& x, const FieldJet& phi,
                 const Eigen::Ref<const Eigen::VectorXd>& lambda) const {
    return partials(x, phi, lambda).u;
  }
  double density(const Point& x, const FieldJet& phi) const {
    return partials(x, phi, defaults_).u;
  }

  /// d u / d lambda, including log-space chain factors.
  virtual void grad_params(const Point& x, const FieldJet& phi,
                           const Eigen::Ref<const Eigen::VectorXd>& lambda,
                           Eigen::Ref<Eigen::VectorXd> out) const = 0;

  void check_params(const Eigen::Ref<const Eigen::VectorXd>& lambda) const;

 protected:
  /// Registers a positive coefficient; returns its lambda index or -1.
  Eigen::Index add_positive(const std::string& name, const PositiveParam& p);
  /// Installs the model's source and registers its KLE block, if any.
  void set_source(SourceTerm source);
  /// d f / d lambda block scaled by `factor`, added into `out`.
  void add_source_grad(const Point& x, double factor, Eigen::Ref<Eigen::VectorXd> out) const;

  static double positive_value(const PositiveParam& p, Eigen::Index index,
                               const Eigen::Ref<const Eigen::VectorXd>& lambda);

 private:
  std::vector<std::string> param_names_;
  Eigen::VectorXd defaults_;
  SourceTerm source_;
  Eigen::Index source_offset_ = -1;
};

using EnergyPtr = std::shared_ptr<const EnergyModel>;

/// u = 1/2 D |grad phi|^2 - phi q   (steady heat equation D phi'' + q = 0).
class DirichletHeat final : public EnergyModel {
 public:
  DirichletHeat(PositiveParam conductivity, SourceTerm source);
  std::string name() const override { return "dirichlet_heat"; }

  DensityPartials partials_given_source(const Point& x, const FieldJet& phi,
                                        const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                        double f) const override;
  void grad_params(const Point& x, const FieldJet& phi,
                   const Eigen::Ref<const Eigen::VectorXd>& lambda,
                   Eigen::Ref<Eigen::VectorXd> out) const override;

 private:
  PositiveParam d_;
  Eigen::Index d_index_;
};

/// u = 1/2 D phi'^2 + gamma 1/4 kappa phi^4 + 1/2 (1 - gamma) phi^2 + phi f
/// (D phi'' - kappa phi^3 = f when gamma = 1).
class CubicNonlinear final : public EnergyModel {
 public:
  CubicNonlinear(PositiveParam conductivity, PositiveParam kappa,
                 SourceTerm source, double gamma = 1.0);
  std::string name() const override { return "cubic_nonlinear"; }

  DensityPartials partials_given_source(const Point& x, const FieldJet& phi,
                                        const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                        double f) const override;
  void grad_params(const Point& x, const FieldJet& phi,
                   const Eigen::Ref<const Eigen::VectorXd>& lambda,
                   Eigen::Ref<Eigen::VectorXd> out) const override;

 private:
  PositiveParam d_;
  PositiveParam kappa_;
  double gamma_;
  Eigen::Index d_index_;
  Eigen::Index kappa_index_;
};

/// u = 1/2 eps |grad phi|^2 + 1/4 (1 - phi^2)^2 - f phi.
class AllenCahn final : public EnergyModel {
 public:
  AllenCahn(PositiveParam mobility, SourceTerm source);
  std::string name() const override { return "allen_cahn"; }

  DensityPartials partials_given_source(const Point& x, const FieldJet& phi,
                                        const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                        double f) const override;
  void grad_params(const Point& x, const FieldJet& phi,
                   const Eigen::Ref<const Eigen::VectorXd>& lambda,
                   Eigen::Ref<Eigen::VectorXd> out) const override;

 private:
  PositiveParam eps_;
  Eigen::Index eps_index_;
};

/// u = r^2 for the strong-form residual r of one of the supported PDEs:
///   heat:        r = D lap(phi) + q
///   cubic:       r = D lap(phi) - kappa phi^3 - f
///   allen_cahn:  r = eps lap(phi) - phi (phi^2 - 1) + f
class SquaredResidual final : public EnergyModel {
 public:
  enum class Pde { kHeat, kCubic, kAllenCahn };

  /// `coefficient` is D (heat, cubic) or eps (Allen-Cahn); `kappa` is only
  /// used by the cubic PDE.
  SquaredResidual(Pde pde, PositiveParam coefficient, SourceTerm source,
                  PositiveParam kappa = {});
  std::string name() const override { return "squared_residual"; }

  /// The residual r itself.
  double residual(const Point& x, const FieldJet& phi,
                  const Eigen::Ref<const Eigen::VectorXd>& lambda) const {
    return residual_given_source(phi, lambda, source_at(x, lambda));
  }
  double residual_given_source(const FieldJet& phi,
                               const Eigen::Ref<const Eigen::VectorXd>& lambda,
                               double f) const;

  DensityPartials partials_given_source(const Point& x, const FieldJet& phi,
                                        const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                        double f) const override;
  void grad_params(const Point& x, const FieldJet& phi,
                   const Eigen::Ref<const Eigen::VectorXd>& lambda,
                   Eigen::Ref<Eigen::VectorXd> out) const override;

 private:
  Pde pde_;
  PositiveParam coef_;
  PositiveParam kappa_;
  Eigen::Index coef_index_;
  Eigen::Index kappa_index_ = -1;
};

// ---------------------------------------------------------------------------
// Hamiltonian density h = beta u

/// The field prior Hamiltonian H[phi|lambda] = beta U[phi|lambda].
///
/// When beta is inferred, the full parameter vector is the model's lambda
/// followed by log(beta).
class PhysicsPrior {
 public:
  PhysicsPrior(EnergyPtr model, double beta, bool infer_beta = false);

  const EnergyModel& model() const { return *model_; }
  const EnergyPtr& model_ptr() const { return model_; }
  bool infers_beta() const { return infer_beta_; }

  Eigen::Index num_params() const {
    return model_->num_params() + (infer_beta_ ? 1 : 0);
  }
  std::vector<std::string> param_names() const;
  Eigen::VectorXd default_params() const;

  double beta(const Eigen::Ref<const Eigen::VectorXd>& lambda) const;
  /// Model parameters (the leading block of lambda).
  Eigen::VectorXd model_params(const Eigen::Ref<const Eigen::VectorXd>& lambda) const {
    return lambda.head(model_->num_params());
  }

 private:
  EnergyPtr model_;
  double beta_;
  bool infer_beta_;
};

// ---------------------------------------------------------------------------
// Operations

/// d u / d theta at x via the chain rule through the basis.
Eigen::VectorXd grad_theta_density(const EnergyModel& model,
                                   const FieldBasis& basis,
                                   const Eigen::Ref<const Eigen::VectorXd>& theta,
                                   const Point& x,
                                   const Eigen::Ref<const Eigen::VectorXd>& lambda);
Eigen::VectorXd grad_theta_density(const EnergyModel& model,
                                   const FieldBasis& basis,
                                   const Eigen::Ref<const Eigen::VectorXd>& theta,
                                   const Point& x);

/// d h / d lambda at x for h = beta u, over the prior's full parameter vector.
Eigen::VectorXd grad_lambda_density(const PhysicsPrior& prior,
                                    const FieldBasis& basis,
                                    const Eigen::Ref<const Eigen::VectorXd>& theta,
                                    const Point& x,
                                    const Eigen::Ref<const Eigen::VectorXd>& lambda);

/// Deterministic quadrature approximation of U(theta).
double total_energy(const EnergyModel& model, const FieldBasis& basis,
                    const Eigen::Ref<const Eigen::VectorXd>& theta,
                    const Quadrature& quadrature,
                    const Eigen::Ref<const Eigen::VectorXd>& lambda);
double total_energy(const EnergyModel& model, const FieldBasis& basis,
                    const Eigen::Ref<const Eigen::VectorXd>& theta,
                    const Quadrature& quadrature);

/// Quadrature approximation of grad_theta U(theta).
Eigen::VectorXd grad_total_energy(const EnergyModel& model,
                                  const FieldBasis& basis,
                                  const Eigen::Ref<const Eigen::VectorXd>& theta,
                                  const Quadrature& quadrature,
                                  const Eigen::Ref<const Eigen::VectorXd>& lambda);

/// (1/n) sum_i grad_theta u(X_i) / q(X_i) with X_i iid from q.
Eigen::VectorXd stochastic_grad_energy(const EnergyModel& model,
                                       const FieldBasis& basis,
                                       const Eigen::Ref<const Eigen::VectorXd>& theta,
                                       const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                       Rng& rng, int n,
                                       const SpatialDistribution& q);

/// Accumulates scale * d u / d theta at x into `out`, reusing `frame`.
void accumulate_grad_theta(const EnergyModel& model, const FieldBasis& basis,
                           const Eigen::Ref<const Eigen::VectorXd>& theta,
                           const Point& x,
                           const Eigen::Ref<const Eigen::VectorXd>& lambda,
                           double scale, BasisFrame& frame,
                           Eigen::Ref<Eigen::VectorXd> out);

/// Precomputed basis features on a fixed quadrature grid, for repeated
/// energy and gradient evaluations (HMC, validation).
class QuadratureEnergy {
 public:
  QuadratureEnergy(EnergyPtr model, BasisPtr basis, Quadrature quadrature);

  double energy(const Eigen::Ref<const Eigen::VectorXd>& theta,
                const Eigen::Ref<const Eigen::VectorXd>& lambda) const;
  /// Energy and its theta-gradient in one pass.
  double energy_and_grad(const Eigen::Ref<const Eigen::VectorXd>& theta,
                         const Eigen::Ref<const Eigen::VectorXd>& lambda,
                         Eigen::Ref<Eigen::VectorXd> grad) const;

  const Quadrature& quadrature() const { return quad_; }
  const FieldBasis& basis() const { return *basis_; }
  const EnergyModel& model() const { return *model_; }

 private:
  EnergyPtr model_;
  BasisPtr basis_;
  Quadrature quad_;
  Eigen::MatrixXd psi_;  // params x nodes
  Eigen::MatrixXd dpsi_x_;
  Eigen::MatrixXd dpsi_y_;
  Eigen::MatrixXd lap_psi_;
  Eigen::VectorXd off_v_, off_x_, off_y_, off_lap_;
  Eigen::VectorXd source_;  // tabulated at the nodes; empty if lambda-dependent

  double source_at(Eigen::Index i, const Eigen::Ref<const Eigen::VectorXd>& lambda) const;
  FieldJet jet_at(Eigen::Index i, const Eigen::Ref<const Eigen::VectorXd>& theta) const;
};

}  // namespace pift
