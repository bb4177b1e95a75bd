#include "pift/energy.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pift {

// ---------------------------------------------------------------------------
// SourceTerm

SourceTerm::SourceTerm() : fn_([](const Point&) { return 0.0; }), label_("zero") {}

SourceTerm SourceTerm::closed_form(Fn f, std::string label) {
  if (!f) throw std::invalid_argument("source: empty function");
  SourceTerm s;
  s.fn_ = std::move(f);
  s.label_ = std::move(label);
  return s;
}

SourceTerm SourceTerm::blend(double gamma, Fn f1, Fn f2, std::string label) {
  if (!f1 || !f2) throw std::invalid_argument("source: empty blend component");
  SourceTerm s;
  s.fn_ = [gamma, f1 = std::move(f1), f2 = std::move(f2)](const Point& x) {
    return gamma * f1(x) + (1.0 - gamma) * f2(x);
  };
  s.label_ = std::move(label);
  return s;
}

SourceTerm SourceTerm::kle(std::shared_ptr<const KleBasis> basis) {
  if (!basis) throw std::invalid_argument("source: null KLE basis");
  SourceTerm s;
  s.fn_ = nullptr;
  s.kle_ = std::move(basis);
  s.label_ = "kle";
  return s;
}

Eigen::Index SourceTerm::num_coeffs() const { return kle_ ? kle_->size() : 0; }

double SourceTerm::value(const Point& x,
                         const Eigen::Ref<const Eigen::VectorXd>& coeffs) const {
  if (kle_) return kle_->eval(coeffs, x);
  return fn_(x);
}

void SourceTerm::grad_coeffs(const Point& x, Eigen::Ref<Eigen::VectorXd> out) const {
  if (kle_) out = kle_->grad_theta(x);
}

// ---------------------------------------------------------------------------
// EnergyModel

void EnergyModel::check_params(const Eigen::Ref<const Eigen::VectorXd>& lambda) const {
  if (lambda.size() != num_params()) {
    std::ostringstream os;
    os << name() << ": expected " << num_params()
       << " physics parameters, got " << lambda.size();
    throw std::invalid_argument(os.str());
  }
}

Eigen::Index EnergyModel::add_positive(const std::string& name,
                                       const PositiveParam& p) {
  if (!(p.value > 0.0)) {
    throw std::invalid_argument(name + " must be positive");
  }
  if (!p.inferred) return -1;
  const Eigen::Index index = num_params();
  param_names_.push_back("log_" + name);
  defaults_.conservativeResize(index + 1);
  defaults_[index] = std::log(p.value);
  return index;
}

void EnergyModel::set_source(SourceTerm source) {
  source_ = std::move(source);
  const Eigen::Index m = source_.num_coeffs();
  if (m == 0) return;
  source_offset_ = num_params();
  defaults_.conservativeResize(source_offset_ + m);
  for (Eigen::Index i = 0; i < m; ++i) {
    param_names_.push_back("kle_" + std::to_string(i));
    defaults_[source_offset_ + i] = 0.0;
  }
}

double EnergyModel::source_at(const Point& x,
                              const Eigen::Ref<const Eigen::VectorXd>& lambda) const {
  if (source_offset_ < 0) return source_.value(x, Eigen::VectorXd());
  return source_.value(x, lambda.segment(source_offset_, source_.num_coeffs()));
}

void EnergyModel::add_source_grad(const Point& x, double factor,
                                  Eigen::Ref<Eigen::VectorXd> out) const {
  if (source_offset_ < 0) return;
  Eigen::VectorXd g(source_.num_coeffs());
  source_.grad_coeffs(x, g);
  out.segment(source_offset_, g.size()) += factor * g;
}

double EnergyModel::positive_value(const PositiveParam& p, Eigen::Index index,
                                   const Eigen::Ref<const Eigen::VectorXd>& lambda) {
  return index >= 0 ? std::exp(lambda[index]) : p.value;
}


// ---------------------------------------------------------------------------
// DirichletHeat

DirichletHeat::DirichletHeat(PositiveParam conductivity, SourceTerm source)
    : d_(conductivity) {
  d_index_ = add_positive("D", d_);
  set_source(std::move(source));
}

DensityPartials DirichletHeat::partials_given_source(
    const Point&, const FieldJet& phi, const Eigen::Ref<const Eigen::VectorXd>& lambda,
    double q) const {
  const double D = positive_value(d_, d_index_, lambda);
  DensityPartials p;
  p.u = 0.5 * D * phi.grad.squaredNorm() - phi.value * q;
  p.du_dphi = -q;
  p.du_dgrad = D * phi.grad;
  return p;
}

void DirichletHeat::grad_params(const Point& x, const FieldJet& phi,
                                const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                Eigen::Ref<Eigen::VectorXd> out) const {
  out.setZero();
  if (d_index_ >= 0) {
    const double D = std::exp(lambda[d_index_]);
    out[d_index_] = 0.5 * D * phi.grad.squaredNorm();
  }
  add_source_grad(x, -phi.value, out);
}

// ---------------------------------------------------------------------------
// CubicNonlinear

CubicNonlinear::CubicNonlinear(PositiveParam conductivity, PositiveParam kappa,
                               SourceTerm source, double gamma)
    : d_(conductivity), kappa_(kappa), gamma_(gamma) {
  d_index_ = add_positive("D", d_);
  kappa_index_ = add_positive("kappa", kappa_);
  set_source(std::move(source));
}

DensityPartials CubicNonlinear::partials_given_source(
    const Point&, const FieldJet& phi, const Eigen::Ref<const Eigen::VectorXd>& lambda,
    double f) const {
  const double D = positive_value(d_, d_index_, lambda);
  const double k = positive_value(kappa_, kappa_index_, lambda);
  const double v = phi.value;
  const double v2 = v * v;
  DensityPartials p;
  p.u = 0.5 * D * phi.grad.squaredNorm() + 0.25 * gamma_ * k * v2 * v2 +
        0.5 * (1.0 - gamma_) * v2 + v * f;
  p.du_dphi = gamma_ * k * v2 * v + (1.0 - gamma_) * v + f;
  p.du_dgrad = D * phi.grad;
  return p;
}

void CubicNonlinear::grad_params(const Point& x, const FieldJet& phi,
                                 const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                 Eigen::Ref<Eigen::VectorXd> out) const {
  out.setZero();
  if (d_index_ >= 0) {
    out[d_index_] = 0.5 * std::exp(lambda[d_index_]) * phi.grad.squaredNorm();
  }
  if (kappa_index_ >= 0) {
    const double v2 = phi.value * phi.value;
    out[kappa_index_] = 0.25 * gamma_ * std::exp(lambda[kappa_index_]) * v2 * v2;
  }
  add_source_grad(x, phi.value, out);
}

// ---------------------------------------------------------------------------
// AllenCahn

AllenCahn::AllenCahn(PositiveParam mobility, SourceTerm source)
    : eps_(mobility) {
  eps_index_ = add_positive("eps", eps_);
  set_source(std::move(source));
}

DensityPartials AllenCahn::partials_given_source(
    const Point&, const FieldJet& phi, const Eigen::Ref<const Eigen::VectorXd>& lambda,
    double f) const {
  const double eps = positive_value(eps_, eps_index_, lambda);
  const double v = phi.value;
  const double w = 1.0 - v * v;
  DensityPartials p;
  p.u = 0.5 * eps * phi.grad.squaredNorm() + 0.25 * w * w - f * v;
  p.du_dphi = -v * w - f;
  p.du_dgrad = eps * phi.grad;
  return p;
}

void AllenCahn::grad_params(const Point& x, const FieldJet& phi,
                            const Eigen::Ref<const Eigen::VectorXd>& lambda,
                            Eigen::Ref<Eigen::VectorXd> out) const {
  out.setZero();
  if (eps_index_ >= 0) {
    out[eps_index_] = 0.5 * std::exp(lambda[eps_index_]) * phi.grad.squaredNorm();
  }
  add_source_grad(x, -phi.value, out);
}

// ---------------------------------------------------------------------------
// SquaredResidual

SquaredResidual::SquaredResidual(Pde pde, PositiveParam coefficient,
                                 SourceTerm source, PositiveParam kappa)
    : pde_(pde), coef_(coefficient), kappa_(kappa) {
  coef_index_ = add_positive(pde_ == Pde::kAllenCahn ? "eps" : "D", coef_);
  if (pde_ == Pde::kCubic) kappa_index_ = add_positive("kappa", kappa_);
  set_source(std::move(source));
}

double SquaredResidual::residual_given_source(
    const FieldJet& phi, const Eigen::Ref<const Eigen::VectorXd>& lambda, double f) const {
  const double c = positive_value(coef_, coef_index_, lambda);
  const double v = phi.value;
  switch (pde_) {
    case Pde::kHeat:
      return c * phi.laplacian + f;
    case Pde::kCubic:
      return c * phi.laplacian -
             positive_value(kappa_, kappa_index_, lambda) * v * v * v - f;
    case Pde::kAllenCahn:
      return c * phi.laplacian - v * (v * v - 1.0) + f;
  }
  return 0.0;
}

DensityPartials SquaredResidual::partials_given_source(
    const Point&, const FieldJet& phi, const Eigen::Ref<const Eigen::VectorXd>& lambda,
    double f) const {
  const double r = residual_given_source(phi, lambda, f);
  const double c = positive_value(coef_, coef_index_, lambda);
  const double v = phi.value;
  double dr_dphi = 0.0;
  switch (pde_) {
    case Pde::kHeat:
      dr_dphi = 0.0;
      break;
    case Pde::kCubic:
      dr_dphi = -3.0 * positive_value(kappa_, kappa_index_, lambda) * v * v;
      break;
    case Pde::kAllenCahn:
      dr_dphi = 1.0 - 3.0 * v * v;
      break;
  }
  DensityPartials p;
  p.u = r * r;
  p.du_dphi = 2.0 * r * dr_dphi;
  p.du_dlap = 2.0 * r * c;
  return p;
}

void SquaredResidual::grad_params(const Point& x, const FieldJet& phi,
                                  const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                  Eigen::Ref<Eigen::VectorXd> out) const {
  out.setZero();
  const double r = residual(x, phi, lambda);
  if (coef_index_ >= 0) {
    out[coef_index_] = 2.0 * r * std::exp(lambda[coef_index_]) * phi.laplacian;
  }
  if (kappa_index_ >= 0) {
    const double v = phi.value;
    out[kappa_index_] = -2.0 * r * std::exp(lambda[kappa_index_]) * v * v * v;
  }
  // dr/df is +1 for heat and Allen-Cahn, -1 for the cubic residual.
  const double df = pde_ == Pde::kCubic ? -1.0 : 1.0;
  add_source_grad(x, 2.0 * r * df, out);
}

// ---------------------------------------------------------------------------
// PhysicsPrior

PhysicsPrior::PhysicsPrior(EnergyPtr model, double beta, bool infer_beta)
    : model_(std::move(model)), beta_(beta), infer_beta_(infer_beta) {
  if (!model_) throw std::invalid_argument("physics prior: null energy model");
  if (!(beta_ > 0.0)) throw std::invalid_argument("physics prior: beta must be positive");
}

std::vector<std::string> PhysicsPrior::param_names() const {
  auto names = model_->param_names();
  if (infer_beta_) names.push_back("log_beta");
  return names;
}

Eigen::VectorXd PhysicsPrior::default_params() const {
  Eigen::VectorXd lambda(num_params());
  lambda.head(model_->num_params()) = model_->default_params();
  if (infer_beta_) lambda[num_params() - 1] = std::log(beta_);
  return lambda;
}

double PhysicsPrior::beta(const Eigen::Ref<const Eigen::VectorXd>& lambda) const {
  if (lambda.size() != num_params()) {
    throw std::invalid_argument("physics prior: parameter vector size mismatch");
  }
  return infer_beta_ ? std::exp(lambda[num_params() - 1]) : beta_;
}

// ---------------------------------------------------------------------------
// Operations

void accumulate_grad_theta(const EnergyModel& model, const FieldBasis& basis,
                           const Eigen::Ref<const Eigen::VectorXd>& theta,
                           const Point& x,
                           const Eigen::Ref<const Eigen::VectorXd>& lambda,
                           double scale, BasisFrame& frame,
                           Eigen::Ref<Eigen::VectorXd> out) {
  basis.evaluate(x, frame);
  const FieldJet jet = frame.jet(theta);
  const DensityPartials p = model.partials(x, jet, lambda);
  out.noalias() += (scale * p.du_dphi) * frame.psi;
  for (Eigen::Index d = 0; d < frame.dpsi.cols(); ++d) {
    out.noalias() += (scale * p.du_dgrad[d]) * frame.dpsi.col(d);
  }
  if (p.du_dlap != 0.0) out.noalias() += (scale * p.du_dlap) * frame.lap;
}

Eigen::VectorXd grad_theta_density(const EnergyModel& model,
                                   const FieldBasis& basis,
                                   const Eigen::Ref<const Eigen::VectorXd>& theta,
                                   const Point& x,
                                   const Eigen::Ref<const Eigen::VectorXd>& lambda) {
  basis.check_size(theta);
  model.check_params(lambda);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(basis.size());
  BasisFrame frame;
  accumulate_grad_theta(model, basis, theta, x, lambda, 1.0, frame, out);
  return out;
}

Eigen::VectorXd grad_theta_density(const EnergyModel& model,
                                   const FieldBasis& basis,
                                   const Eigen::Ref<const Eigen::VectorXd>& theta,
                                   const Point& x) {
  return grad_theta_density(model, basis, theta, x, model.default_params());
}

Eigen::VectorXd grad_lambda_density(const PhysicsPrior& prior,
                                    const FieldBasis& basis,
                                    const Eigen::Ref<const Eigen::VectorXd>& theta,
                                    const Point& x,
                                    const Eigen::Ref<const Eigen::VectorXd>& lambda) {
  basis.check_size(theta);
  const double beta = prior.beta(lambda);
  const Eigen::Index m = prior.model().num_params();
  const FieldJet jet = basis.jet(theta, x);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(prior.num_params());
  const Eigen::VectorXd model_lambda = lambda.head(m);
  prior.model().grad_params(x, jet, model_lambda, out.head(m));
  out.head(m) *= beta;
  if (prior.infers_beta()) {
    out[m] = beta * prior.model().density(x, jet, model_lambda);
  }
  return out;
}

double total_energy(const EnergyModel& model, const FieldBasis& basis,
                    const Eigen::Ref<const Eigen::VectorXd>& theta,
                    const Quadrature& quadrature,
                    const Eigen::Ref<const Eigen::VectorXd>& lambda) {
  if (quadrature.empty()) throw std::invalid_argument("total_energy: empty quadrature");
  basis.check_size(theta);
  model.check_params(lambda);
  BasisFrame frame;
  double acc = 0.0;
  for (std::size_t i = 0; i < quadrature.size(); ++i) {
    const Point& x = quadrature.nodes[i];
    basis.evaluate(x, frame);
    acc += quadrature.weights[static_cast<Eigen::Index>(i)] *
           model.density(x, frame.jet(theta), lambda);
  }
  return acc;
}

double total_energy(const EnergyModel& model, const FieldBasis& basis,
                    const Eigen::Ref<const Eigen::VectorXd>& theta,
                    const Quadrature& quadrature) {
  return total_energy(model, basis, theta, quadrature, model.default_params());
}

Eigen::VectorXd grad_total_energy(const EnergyModel& model,
                                  const FieldBasis& basis,
                                  const Eigen::Ref<const Eigen::VectorXd>& theta,
                                  const Quadrature& quadrature,
                                  const Eigen::Ref<const Eigen::VectorXd>& lambda) {
  if (quadrature.empty()) throw std::invalid_argument("grad_total_energy: empty quadrature");
  basis.check_size(theta);
  model.check_params(lambda);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(basis.size());
  BasisFrame frame;
  for (std::size_t i = 0; i < quadrature.size(); ++i) {
    accumulate_grad_theta(model, basis, theta, quadrature.nodes[i], lambda,
                          quadrature.weights[static_cast<Eigen::Index>(i)],
                          frame, out);
  }
  return out;
}

Eigen::VectorXd stochastic_grad_energy(const EnergyModel& model,
                                       const FieldBasis& basis,
                                       const Eigen::Ref<const Eigen::VectorXd>& theta,
                                       const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                       Rng& rng, int n,
                                       const SpatialDistribution& q) {
  if (n < 1) throw std::invalid_argument("stochastic_grad_energy: n must be >= 1");
  basis.check_size(theta);
  model.check_params(lambda);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(basis.size());
  BasisFrame frame;
  for (int i = 0; i < n; ++i) {
    const Point x = q.sample(rng);
    accumulate_grad_theta(model, basis, theta, x, lambda,
                          1.0 / (n * q.density(x)), frame, out);
  }
  return out;
}

// ---------------------------------------------------------------------------
// QuadratureEnergy

QuadratureEnergy::QuadratureEnergy(EnergyPtr model, BasisPtr basis,
                                   Quadrature quadrature)
    : model_(std::move(model)), basis_(std::move(basis)), quad_(std::move(quadrature)) {
  if (quad_.empty()) throw std::invalid_argument("quadrature energy: empty quadrature");
  const auto n = static_cast<Eigen::Index>(quad_.size());
  const Eigen::Index p = basis_->size();
  psi_.resize(p, n);
  dpsi_x_.resize(p, n);
  dpsi_y_ = Eigen::MatrixXd::Zero(p, n);
  lap_psi_.resize(p, n);
  off_v_.resize(n);
  off_x_.resize(n);
  off_y_.resize(n);
  off_lap_.resize(n);
  BasisFrame frame;
  for (Eigen::Index i = 0; i < n; ++i) {
    basis_->evaluate(quad_.nodes[static_cast<std::size_t>(i)], frame);
    psi_.col(i) = frame.psi;
    dpsi_x_.col(i) = frame.dpsi.col(0);
    if (frame.dpsi.cols() > 1) dpsi_y_.col(i) = frame.dpsi.col(1);
    lap_psi_.col(i) = frame.lap;
    off_v_[i] = frame.offset.value;
    off_x_[i] = frame.offset.grad[0];
    off_y_[i] = frame.offset.grad[1];
    off_lap_[i] = frame.offset.laplacian;
  }
  if (!model_->source_has_params()) {
    source_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      source_[i] = model_->source_at(quad_.nodes[static_cast<std::size_t>(i)],
                                     model_->default_params());
    }
  }
}

double QuadratureEnergy::source_at(Eigen::Index i,
                                   const Eigen::Ref<const Eigen::VectorXd>& lambda) const {
  if (source_.size() > 0) return source_[i];
  return model_->source_at(quad_.nodes[static_cast<std::size_t>(i)], lambda);
}

FieldJet QuadratureEnergy::jet_at(Eigen::Index i,
                                  const Eigen::Ref<const Eigen::VectorXd>& theta) const {
  return FieldJet{off_v_[i] + psi_.col(i).dot(theta),
                  Eigen::Vector2d(off_x_[i] + dpsi_x_.col(i).dot(theta),
                                  off_y_[i] + dpsi_y_.col(i).dot(theta)),
                  off_lap_[i] + lap_psi_.col(i).dot(theta)};
}

double QuadratureEnergy::energy(const Eigen::Ref<const Eigen::VectorXd>& theta,
                                const Eigen::Ref<const Eigen::VectorXd>& lambda) const {
  basis_->check_size(theta);
  model_->check_params(lambda);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < off_v_.size(); ++i) {
    acc += quad_.weights[i] *
           model_->partials_given_source(quad_.nodes[static_cast<std::size_t>(i)],
                                         jet_at(i, theta), lambda, source_at(i, lambda))
               .u;
  }
  return acc;
}

double QuadratureEnergy::energy_and_grad(const Eigen::Ref<const Eigen::VectorXd>& theta,
                                         const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                         Eigen::Ref<Eigen::VectorXd> grad) const {
  basis_->check_size(theta);
  model_->check_params(lambda);
  grad.setZero();
  const bool two_d = basis_->dim() == 2;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < off_v_.size(); ++i) {
    const DensityPartials p = model_->partials_given_source(
        quad_.nodes[static_cast<std::size_t>(i)], jet_at(i, theta), lambda,
        source_at(i, lambda));
    const double w = quad_.weights[i];
    acc += w * p.u;
    grad.noalias() += (w * p.du_dphi) * psi_.col(i);
    grad.noalias() += (w * p.du_dgrad[0]) * dpsi_x_.col(i);
    if (two_d) grad.noalias() += (w * p.du_dgrad[1]) * dpsi_y_.col(i);
    if (p.du_dlap != 0.0) grad.noalias() += (w * p.du_dlap) * lap_psi_.col(i);
  }
  return acc;
}

}  // namespace pift
