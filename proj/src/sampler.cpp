#include "pift/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace pift {

double learning_rate(long t, double alpha0, double alpha1) {
  if (t < 1) throw std::invalid_argument("learning_rate: t must be >= 1");
  return alpha0 / std::pow(static_cast<double>(t), alpha1);
}

NoiseConvention parse_noise_convention(const std::string& name) {
  if (name == "two_eps") return NoiseConvention::kTwoEps;
  if (name == "eps") return NoiseConvention::kEps;
  if (name == "sqrt_eps") return NoiseConvention::kSqrtEps;
  throw std::invalid_argument("unknown noise convention '" + name +
                              "' (expected two_eps, eps or sqrt_eps)");
}

std::string to_string(NoiseConvention noise) {
  switch (noise) {
    case NoiseConvention::kTwoEps: return "two_eps";
    case NoiseConvention::kEps: return "eps";
    case NoiseConvention::kSqrtEps: return "sqrt_eps";
  }
  return "two_eps";
}

double noise_variance(NoiseConvention noise, double eps) {
  switch (noise) {
    case NoiseConvention::kTwoEps: return 2.0 * eps;
    case NoiseConvention::kEps: return eps;
    case NoiseConvention::kSqrtEps: return std::sqrt(eps);
  }
  return 2.0 * eps;
}

Retention Retention::resolved() const {
  Retention r = *this;
  if (r.steps < 1) throw std::invalid_argument("retention: steps must be >= 1");
  if (r.burn_in < 0) r.burn_in = r.steps / 10;
  if (r.burn_in >= r.steps) throw std::invalid_argument("retention: burn_in must be < steps");
  if (r.thin <= 0) {
    const long kept = r.steps - r.burn_in;
    r.thin = std::max(1L, (kept + 99'999) / 100'000);
  }
  return r;
}

long Retention::rows() const { return (steps - burn_in) / thin; }

void SgldConfig::validate() const {
  if (!(alpha0 > 0.0)) throw std::invalid_argument("sgld: alpha0 must be positive");
  if (!(alpha1 > 0.5 && alpha1 <= 1.0)) {
    throw std::invalid_argument("sgld: alpha1 must lie in (0.5, 1] (Robbins-Monro)");
  }
  if (n < 1 || b < 1) throw std::invalid_argument("sgld: batch sizes must be >= 1");
  (void)retention.resolved();
}

double prior_alpha0(double scale, double beta) { return scale / beta; }

double posterior_alpha0(double alpha_hat, double beta, double sigma) {
  return alpha_hat / std::max(beta, 1.0 / (sigma * sigma));
}

std::vector<std::string> indexed_names(const std::string& stem, Eigen::Index count) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) names.push_back(stem + "_" + std::to_string(i));
  return names;
}

// ---------------------------------------------------------------------------
// Chain I/O

void Chain::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
  out << '\n';
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    for (Eigen::Index j = 0; j < samples.cols(); ++j) {
      out << (j ? "," : "") << samples(i, j);
    }
    out << '\n';
  }
}

Chain Chain::read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  Chain chain;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) chain.names.push_back(cell);
  }
  std::vector<double> values;
  long rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t cols = 0;
    while (std::getline(ss, cell, ',')) {
      values.push_back(std::stod(cell));
      ++cols;
    }
    if (cols != chain.names.size()) {
      throw std::runtime_error(path + ": row " + std::to_string(rows + 2) +
                               " has the wrong number of columns");
    }
    ++rows;
  }
  const auto cols = static_cast<Eigen::Index>(chain.names.size());
  chain.samples = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                           Eigen::RowMajor>>(values.data(), rows, cols);
  return chain;
}

// ---------------------------------------------------------------------------
// Field SGLD

FieldSgld::FieldSgld(const EnergyModel& model, const FieldBasis& basis,
                     const SpatialDistribution& q, const Dataset* data, double alpha1,
                     int n, int b, NoiseConvention noise)
    : model_(model),
      basis_(basis),
      q_(q),
      data_(data),
      alpha1_(alpha1),
      n_(n),
      b_(b),
      noise_(noise),
      theta_(Eigen::VectorXd::Zero(basis.size())),
      grad_(basis.size()) {
  if (n_ < 1 || b_ < 1) throw std::invalid_argument("sgld: batch sizes must be >= 1");
  if (data_ && data_->size() > 0 && b_ > data_->size()) {
    throw std::invalid_argument("sgld: data batch exceeds dataset size");
  }
}

void FieldSgld::set_theta(const Eigen::VectorXd& theta) {
  basis_.check_size(theta);
  theta_ = theta;
}

void FieldSgld::step(double alpha0, double beta,
                     const Eigen::Ref<const Eigen::VectorXd>& model_lambda, Rng& rng) {
  ++t_;
  const double eps = learning_rate(t_, alpha0, alpha1_);
  const double sd = std::sqrt(noise_variance(noise_, eps));
  const Eigen::Index p = theta_.size();

  Eigen::VectorXd eta(p);
  for (Eigen::Index i = 0; i < p; ++i) eta[i] = sd * standard_normal(rng);

  grad_.setZero();
  for (int i = 0; i < n_; ++i) {
    const Point x = q_.sample(rng);
    accumulate_grad_theta(model_, basis_, theta_, x, model_lambda,
                          beta / (n_ * q_.density(x)), frame_, grad_);
  }
  if (data_ && data_->size() > 0) {
    const Eigen::Index s = data_->size();
    const double scale =
        static_cast<double>(s) / (b_ * data_->sigma * data_->sigma);
    for (int i = 0; i < b_; ++i) {
      const auto j = std::min<Eigen::Index>(
          static_cast<Eigen::Index>(uniform01(rng) * static_cast<double>(s)), s - 1);
      basis_.evaluate(data_->locations[static_cast<std::size_t>(j)], frame_);
      const double r = frame_.jet(theta_).value - data_->values[j];
      grad_.noalias() += (scale * r) * frame_.psi;
    }
  }
  theta_.noalias() -= eps * grad_;
  theta_ += eta;
}

namespace {

Eigen::VectorXd model_lambda_of(const FieldTarget& target) {
  if (!target.model || !target.basis) {
    throw std::invalid_argument("sgld: target needs a model and a basis");
  }
  if (!(target.beta > 0.0)) throw std::invalid_argument("sgld: beta must be positive");
  Eigen::VectorXd lambda =
      target.lambda.size() > 0 ? target.lambda : target.model->default_params();
  target.model->check_params(lambda);
  return lambda;
}

Chain run_field_chain(const FieldTarget& target, const Dataset* data,
                      const SgldConfig& config, Rng& rng, const Eigen::VectorXd& theta0,
                      const char* kind) {
  config.validate();
  const Retention ret = config.retention.resolved();
  const Eigen::VectorXd lambda = model_lambda_of(target);
  const FieldBasis& basis = *target.basis;
  if (data) data->validate(basis.domain());
  const UniformDistribution q(basis.domain());

  FieldSgld chain(*target.model, basis, q, data, config.alpha1, config.n, config.b,
                  config.noise);
  if (theta0.size() > 0) chain.set_theta(theta0);

  Chain out;
  out.names = indexed_names("theta", basis.size());
  out.seed = config.seed;
  out.samples.resize(ret.rows(), basis.size());
  out.info = {{"sampler", kind},
              {"alpha0", config.alpha0},
              {"alpha1", config.alpha1},
              {"n", config.n},
              {"b", config.b},
              {"beta", target.beta},
              {"steps", ret.steps},
              {"burn_in", ret.burn_in},
              {"thin", ret.thin},
              {"noise_variance", to_string(config.noise)}};

  Eigen::Index row = 0;
  for (long t = 1; t <= ret.steps; ++t) {
    chain.step(config.alpha0, target.beta, lambda, rng);
    if (!chain.theta().allFinite()) {
      out.samples.conservativeResize(row, basis.size());
      out.info["aborted_at_step"] = t;
      throw SamplerAbort(std::string(kind) + ": non-finite state at step " +
                             std::to_string(t),
                         t, std::move(out));
    }
    if (ret.keep(t)) out.samples.row(row++) = chain.theta().transpose();
  }
  return out;
}

}  // namespace

Chain sgld_prior(const FieldTarget& target, const SgldConfig& config, Rng& rng,
                 const Eigen::VectorXd& theta0) {
  return run_field_chain(target, nullptr, config, rng, theta0, "sgld_prior");
}

Chain sgld_posterior(const FieldTarget& target, const Dataset& data,
                     const SgldConfig& config, Rng& rng, const Eigen::VectorXd& theta0) {
  return run_field_chain(target, &data, config, rng, theta0, "sgld_posterior");
}

// ---------------------------------------------------------------------------
// Nested SGLD

void InverseConfig::validate() const {
  if (!(alpha0 > 0.0)) throw std::invalid_argument("inverse: alpha0 must be positive");
  if (!(alpha1 > 0.5 && alpha1 <= 1.0) || !(field_alpha1 > 0.5 && field_alpha1 <= 1.0)) {
    throw std::invalid_argument("inverse: alpha1 must lie in (0.5, 1] (Robbins-Monro)");
  }
  if (!(prior_scale > 0.0) || !(posterior_alpha_hat > 0.0)) {
    throw std::invalid_argument("inverse: field step scales must be positive");
  }
  if (T < 1 || T_tilde < 1) throw std::invalid_argument("inverse: T and T_tilde must be >= 1");
  if (k < 1 || k > T || k_tilde < 1 || k_tilde > T_tilde) {
    throw std::invalid_argument("inverse: need 1 <= k <= T and 1 <= k_tilde <= T_tilde");
  }
  if (n < 1 || n_tilde < 1 || b < 1) {
    throw std::invalid_argument("inverse: batch sizes must be >= 1");
  }
  if (warmup < 0) throw std::invalid_argument("inverse: warmup must be >= 0");
  (void)retention.resolved();
}

Eigen::VectorXd grad_lambda_energy(const PhysicsPrior& prior, const FieldBasis& basis,
                                   const Eigen::Ref<const Eigen::VectorXd>& theta,
                                   const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                   const Quadrature& quadrature) {
  if (quadrature.empty()) throw std::invalid_argument("grad_lambda_energy: empty quadrature");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(prior.num_params());
  for (std::size_t i = 0; i < quadrature.size(); ++i) {
    g += quadrature.weights[static_cast<Eigen::Index>(i)] *
         grad_lambda_density(prior, basis, theta, quadrature.nodes[i], lambda);
  }
  return g;
}

Eigen::VectorXd lambda_gradient_estimate(
    const PhysicsPrior& prior, const FieldBasis& basis,
    const Eigen::Ref<const Eigen::VectorXd>& lambda,
    const std::vector<Eigen::VectorXd>& posterior_fields,
    const std::vector<Eigen::VectorXd>& prior_fields, int n_tilde, int n,
    const SpatialDistribution& q, const ParameterPrior& lambda_prior, Rng& rng) {
  if (posterior_fields.empty() || prior_fields.empty()) {
    throw std::invalid_argument("lambda_gradient_estimate: need field samples");
  }
  if (n < 1 || n_tilde < 1) {
    throw std::invalid_argument("lambda_gradient_estimate: batch sizes must be >= 1");
  }
  Eigen::VectorXd g = Eigen::VectorXd::Zero(prior.num_params());
  const double wp = 1.0 / (static_cast<double>(posterior_fields.size()) * n_tilde);
  for (const Eigen::VectorXd& theta : posterior_fields) {
    for (int j = 0; j < n_tilde; ++j) {
      const Point x = q.sample(rng);
      g += (wp / q.density(x)) * grad_lambda_density(prior, basis, theta, x, lambda);
    }
  }
  const double w = 1.0 / (static_cast<double>(prior_fields.size()) * n);
  for (const Eigen::VectorXd& theta : prior_fields) {
    for (int j = 0; j < n; ++j) {
      const Point x = q.sample(rng);
      g -= (w / q.density(x)) * grad_lambda_density(prior, basis, theta, x, lambda);
    }
  }
  if (lambda_prior.size() > 0) g += lambda_prior.grad(lambda);
  return g;
}

InverseResult sgld_inverse(const PhysicsPrior& prior, BasisPtr basis, const Dataset& data,
                           const Eigen::VectorXd& lambda0,
                           const ParameterPrior& lambda_prior,
                           const InverseConfig& config, Rng& rng,
                           const Eigen::VectorXd& theta0) {
  config.validate();
  const Retention r = config.retention.resolved();
  if (!basis) throw std::invalid_argument("inverse: null basis");
  if (lambda0.size() != prior.num_params() || !lambda0.allFinite()) {
    throw std::invalid_argument("inverse: lambda0 must be finite with one entry per parameter");
  }
  if (lambda_prior.size() != 0 && lambda_prior.size() != prior.num_params()) {
    throw std::invalid_argument("inverse: parameter prior size mismatch");
  }
  if (prior.num_params() == 0) throw std::invalid_argument("inverse: nothing to infer");
  data.validate(basis->domain());

  const UniformDistribution q(basis->domain());
  const EnergyModel& model = prior.model();
  FieldSgld prior_chain(model, *basis, q, nullptr, config.field_alpha1, config.n, 1,
                        config.noise);
  FieldSgld post_chain(model, *basis, q, &data, config.field_alpha1, config.n_tilde,
                       config.b, config.noise);
  if (theta0.size() > 0) {
    prior_chain.set_theta(theta0);
    post_chain.set_theta(theta0);
  }

  Eigen::VectorXd lambda = lambda0;
  const Eigen::Index p = basis->size();

  InverseResult out;
  out.parameters.names = prior.param_names();
  out.parameters.seed = config.seed;
  out.parameters.samples.resize(r.rows(), prior.num_params());
  if (config.record_fields) {
    out.prior_fields.names = indexed_names("theta", p);
    out.posterior_fields.names = out.prior_fields.names;
    out.prior_fields.samples.resize(r.rows(), p);
    out.posterior_fields.samples.resize(r.rows(), p);
  }
  out.parameters.info = {{"sampler", "sgld_inverse"},
                         {"alpha0", config.alpha0},
                         {"alpha1", config.alpha1},
                         {"prior_scale", config.prior_scale},
                         {"posterior_alpha_hat", config.posterior_alpha_hat},
                         {"field_alpha1", config.field_alpha1},
                         {"T", config.T},
                         {"T_tilde", config.T_tilde},
                         {"k", config.k},
                         {"k_tilde", config.k_tilde},
                         {"n", config.n},
                         {"n_tilde", config.n_tilde},
                         {"b", config.b},
                         {"warmup", config.warmup},
                         {"restart_inner_schedule", config.restart_inner_schedule},
                         {"maxiter", r.steps},
                         {"burn_in", r.burn_in},
                         {"thin", r.thin},
                         {"noise_variance", to_string(config.noise)}};

  Eigen::Index row = 0;
  auto abort = [&](const std::string& what, long t) {
    out.parameters.samples.conservativeResize(row, prior.num_params());
    out.parameters.info["aborted_at_iteration"] = t;
    out.parameters.info["last_lambda"] = std::vector<double>(lambda.data(),
                                                             lambda.data() + lambda.size());
    throw SamplerAbort("sgld_inverse: " + what + " at iteration " + std::to_string(t), t,
                       std::move(out.parameters));
  };

  auto advance = [&](FieldSgld& chain, bool posterior) {
    const double beta = prior.beta(lambda);
    const double a0 = posterior
                          ? posterior_alpha0(config.posterior_alpha_hat, beta, data.sigma)
                          : prior_alpha0(config.prior_scale, beta);
    chain.step(a0, beta, lambda.head(model.num_params()), rng);
    return chain.theta().allFinite();
  };

  for (long w = 0; w < config.warmup; ++w) {
    if (!advance(prior_chain, false)) abort("prior field chain diverged in warmup", 0);
    if (!advance(post_chain, true)) abort("posterior field chain diverged in warmup", 0);
  }

  std::vector<Eigen::VectorXd> prior_states;
  std::vector<Eigen::VectorXd> post_states;
  const Eigen::Index m = prior.num_params();
  for (long t = 1; t <= r.steps; ++t) {
    prior_states.clear();
    post_states.clear();
    if (config.restart_inner_schedule) {
      prior_chain.restart_schedule();
      post_chain.restart_schedule();
    }
    for (int i = 0; i < config.T; ++i) {
      if (!advance(prior_chain, false)) abort("prior field chain diverged", t);
      if (i >= config.T - config.k) prior_states.push_back(prior_chain.theta());
    }
    for (int i = 0; i < config.T_tilde; ++i) {
      if (!advance(post_chain, true)) abort("posterior field chain diverged", t);
      if (i >= config.T_tilde - config.k_tilde) post_states.push_back(post_chain.theta());
    }
    const Eigen::VectorXd g =
        lambda_gradient_estimate(prior, *basis, lambda, post_states, prior_states,
                                 config.n_tilde, config.n, q, lambda_prior, rng);
    const double eps = learning_rate(t, config.alpha0, config.alpha1);
    const double sd = std::sqrt(noise_variance(config.noise, eps));
    for (Eigen::Index i = 0; i < m; ++i) {
      lambda[i] += -eps * g[i] + sd * standard_normal(rng);
    }
    if (!lambda.allFinite() || !std::isfinite(prior.beta(lambda))) {
      abort("non-finite physics parameters", t);
    }
    if (r.keep(t)) {
      out.parameters.samples.row(row) = lambda.transpose();
      if (config.record_fields) {
        out.prior_fields.samples.row(row) = prior_chain.theta().transpose();
        out.posterior_fields.samples.row(row) = post_chain.theta().transpose();
      }
      ++row;
    }
  }
  out.prior_fields.seed = out.posterior_fields.seed = config.seed;
  return out;
}

// ---------------------------------------------------------------------------
// HMC

void HmcConfig::validate() const {
  if (!(step_size > 0.0)) throw std::invalid_argument("hmc: step size must be positive");
  if (leapfrog_steps < 1) throw std::invalid_argument("hmc: leapfrog steps must be >= 1");
  if (mass.size() > 0) {
    if (mass.rows() != mass.cols()) throw std::invalid_argument("hmc: mass must be square");
    if (!mass.isApprox(mass.transpose(), 1e-12)) {
      throw std::invalid_argument("hmc: mass must be symmetric");
    }
  }
  (void)retention.resolved();
}

Chain hmc_sample(const NegLogDensity& target, const Eigen::VectorXd& theta0,
                 const HmcConfig& config, Rng& rng, std::vector<std::string> names) {
  config.validate();
  const Retention ret = config.retention.resolved();
  const Eigen::Index d = theta0.size();
  if (d == 0) throw std::invalid_argument("hmc: empty initial state");
  const Eigen::MatrixXd mass =
      config.mass.size() > 0 ? config.mass : Eigen::MatrixXd::Identity(d, d);
  if (mass.rows() != d) throw std::invalid_argument("hmc: mass size mismatch");
  const Eigen::LLT<Eigen::MatrixXd> mass_llt(mass);
  if (mass_llt.info() != Eigen::Success) {
    throw std::invalid_argument("hmc: mass must be positive definite");
  }
  const Eigen::MatrixXd mass_l = mass_llt.matrixL();
  const Eigen::MatrixXd inv_mass = mass_llt.solve(Eigen::MatrixXd::Identity(d, d));
  const double h = config.step_size;

  Chain out;
  out.names = names.empty() ? indexed_names("theta", d) : std::move(names);
  out.seed = config.seed;
  out.samples.resize(ret.rows(), d);

  Eigen::VectorXd theta = theta0;
  Eigen::VectorXd grad(d);
  double u = target(theta, grad);
  if (!std::isfinite(u)) throw std::invalid_argument("hmc: initial state has non-finite energy");
  Eigen::VectorXd g = grad;

  long accepted = 0;
  long divergences = 0;
  Eigen::Index row = 0;
  Eigen::VectorXd q(d), p(d), gq(d), z(d);
  for (long t = 1; t <= ret.steps; ++t) {
    for (Eigen::Index i = 0; i < d; ++i) z[i] = standard_normal(rng);
    p.noalias() = mass_l * z;
    const double h0 = u + 0.5 * p.dot(inv_mass * p);

    q = theta;
    gq = g;
    double uq = u;
    p -= 0.5 * h * gq;
    for (int l = 0; l < config.leapfrog_steps; ++l) {
      q.noalias() += h * (inv_mass * p);
      uq = target(q, gq);
      if (!std::isfinite(uq)) break;
      if (l + 1 < config.leapfrog_steps) p -= h * gq;
    }
    bool accept = false;
    if (std::isfinite(uq)) {
      p -= 0.5 * h * gq;
      const double h1 = uq + 0.5 * p.dot(inv_mass * p);
      if (!std::isfinite(h1) || h1 - h0 > config.divergence_threshold) {
        ++divergences;
      } else {
        accept = std::log(uniform01(rng)) < h0 - h1;
      }
    } else {
      ++divergences;
    }
    if (accept) {
      theta = q;
      u = uq;
      g = gq;
      ++accepted;
    }
    if (ret.keep(t)) out.samples.row(row++) = theta.transpose();
  }
  out.info = {{"sampler", "hmc"},
              {"step_size", h},
              {"leapfrog_steps", config.leapfrog_steps},
              {"steps", ret.steps},
              {"burn_in", ret.burn_in},
              {"thin", ret.thin},
              {"acceptance_rate", static_cast<double>(accepted) / ret.steps},
              {"divergences", divergences}};
  return out;
}

Eigen::MatrixXd fd_hessian(const NegLogDensity& target, const Eigen::VectorXd& theta,
                           double h) {
  const Eigen::Index d = theta.size();
  Eigen::MatrixXd hess(d, d);
  Eigen::VectorXd gp(d), gm(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    Eigen::VectorXd tp = theta, tm = theta;
    tp[k] += h;
    tm[k] -= h;
    target(tp, gp);
    target(tm, gm);
    hess.col(k) = (gp - gm) / (2.0 * h);
  }
  return 0.5 * (hess + hess.transpose());
}

Eigen::MatrixXd spd_projection(const Eigen::MatrixXd& m, double floor) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw std::runtime_error("spd projection: eigensolver failed");
  const Eigen::VectorXd ev = es.eigenvalues().cwiseAbs().cwiseMax(floor);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::VectorXd find_mode(const NegLogDensity& target, const Eigen::VectorXd& theta0,
                          int max_iter, double grad_tol) {
  Eigen::VectorXd theta = theta0;
  Eigen::VectorXd g(theta.size()), g_new(theta.size());
  double f = target(theta, g);
  if (!std::isfinite(f)) throw std::invalid_argument("find_mode: non-finite start");
  for (int it = 0; it < max_iter && g.norm() > grad_tol; ++it) {
    const Eigen::MatrixXd hess = spd_projection(fd_hessian(target, theta), 1e-3);
    const Eigen::VectorXd step = hess.llt().solve(g);
    bool improved = false;
    for (double t = 1.0; t > 1e-9; t *= 0.5) {
      const Eigen::VectorXd trial = theta - t * step;
      const double f_new = target(trial, g_new);
      if (std::isfinite(f_new) && f_new < f) {
        theta = trial;
        f = f_new;
        g = g_new;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return theta;
}

}  // namespace pift
