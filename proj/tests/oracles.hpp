#pragma once
// Independent reference computations shared by the unit tests and the
// acceptance runner. Nothing here calls the library routine it checks.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "pift/analytic.hpp"
#include "pift/basis.hpp"
#include "pift/energy.hpp"
#include "pift/ground_truth.hpp"
#include "pift/inference.hpp"
#include "pift/kernels.hpp"
#include "pift/quadrature.hpp"
#include "pift/sampler.hpp"

namespace oracle {

using pift::Point;

/// Five-point central difference of f at x.
inline double fd5(const std::function<double(double)>& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

/// Five-point gradient of f at v.
inline Eigen::VectorXd fd5_grad(const std::function<double(const Eigen::VectorXd&)>& f,
                                const Eigen::VectorXd& v, double h) {
  Eigen::VectorXd g(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    g[j] = fd5(
        [&](double t) {
          Eigen::VectorXd w = v;
          w[j] = t;
          return f(w);
        },
        v[j], h);
  }
  return g;
}

/// |a - b| / max(|b|, floor); the floor turns tiny references into an
/// absolute check.
inline double rel_err(double a, double b, double floor = 1e-3) {
  return std::abs(a - b) / std::max(std::abs(b), floor);
}

inline double rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double floor = 1e-3) {
  double e = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) e = std::max(e, rel_err(a[i], b[i], floor));
  return e;
}

// ---------------------------------------------------------------------------
// Textbook GP regression (zero prior mean, noise sigma^2 I), solved with a
// full-pivot LU rather than the Cholesky used by the library.

struct GpPrediction {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

inline GpPrediction gp_regression(const std::function<double(double, double)>& k,
                                  const std::vector<double>& xs, const Eigen::VectorXd& ys,
                                  double sigma, const std::vector<double>& test) {
  const auto s = static_cast<Eigen::Index>(xs.size());
  const auto t = static_cast<Eigen::Index>(test.size());
  Eigen::MatrixXd kxx(s, s), ktx(t, s), ktt(t, t);
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = 0; j < s; ++j) kxx(i, j) = k(xs[i], xs[j]) + (i == j ? sigma * sigma : 0.0);
  for (Eigen::Index i = 0; i < t; ++i)
    for (Eigen::Index j = 0; j < s; ++j) ktx(i, j) = k(test[i], xs[j]);
  for (Eigen::Index i = 0; i < t; ++i)
    for (Eigen::Index j = 0; j < t; ++j) ktt(i, j) = k(test[i], test[j]);
  const auto lu = kxx.fullPivLu();
  GpPrediction p;
  p.mean = ktx * lu.solve(ys);
  p.cov = ktt - ktx * lu.solve(ktx.transpose());
  return p;
}

/// Max deviation of free_posterior from gp_regression on `num_test` points,
/// squared-exponential kernel, `num_data` random data, beta = 1.
inline double gp_equivalence_error(std::uint64_t seed, int num_data = 5, int num_test = 20) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double ell = 0.2 + 0.3 * u(rng), var = 0.5 + u(rng), sigma = 0.05 + 0.1 * u(rng);
  pift::Dataset data;
  data.sigma = sigma;
  std::vector<double> xs;
  data.values.resize(num_data);
  for (int j = 0; j < num_data; ++j) {
    xs.push_back(u(rng));
    data.locations.push_back({xs.back(), 0.0});
    data.values[j] = std::sin(6.0 * xs.back()) + sigma * (u(rng) - 0.5);
  }
  std::vector<double> test;
  for (int i = 0; i < num_test; ++i) test.push_back(-0.1 + 1.2 * u(rng));
  auto kernel = pift::squared_exponential(ell, var);
  const auto post = pift::free_posterior(kernel, nullptr, data, 1.0);
  const auto ref = gp_regression(
      [&](double a, double b) { return var * std::exp(-(a - b) * (a - b) / (2 * ell * ell)); }, xs,
      data.values, sigma, test);
  double err = 0.0;
  for (int i = 0; i < num_test; ++i) {
    err = std::max(err, std::abs(post.mean(test[i]) - ref.mean[i]));
    for (int j = 0; j < num_test; ++j) {
      err = std::max(err, std::abs(post.covariance(test[i], test[j]) - ref.cov(i, j)));
    }
  }
  return err;
}

// ---------------------------------------------------------------------------
// Klein-Gordon checks with the discrete operator -D2 + alpha^2.

struct KgResiduals {
  double green_off_spike = 0.0;    // max |(-D2 + a^2) G| away from the spike
  double green_spike_mass = 0.0;   // |sum (-D2 + a^2) G h - 1|
  double mean_residual = 0.0;      // max |(-D2 + a^2) m - q| on [a, b]
};

inline KgResiduals kg_residuals(double alpha, int intervals = 4096) {
  KgResiduals r;
  // Green's function on a symmetric grid with the source point 0 as a node.
  const int grid = intervals + 1;
  const double half = 10.0 / alpha;
  const double h = 2 * half / intervals;
  std::vector<double> g(grid), x(grid);
  for (int i = 0; i < grid; ++i) {
    x[i] = -half + i * h;
    g[i] = pift::kg_green_1d(alpha, x[i], 0.0);
  }
  double mass = 0.0;
  for (int i = 1; i + 1 < grid; ++i) {
    const double op = -(g[i + 1] - 2 * g[i] + g[i - 1]) / (h * h) + alpha * alpha * g[i];
    mass += op * h;
    if (i != intervals / 2) r.green_off_spike = std::max(r.green_off_spike, std::abs(op));
  }
  r.green_spike_mass = std::abs(mass - 1.0);

  // Prior mean of a smooth source on the quadrature nodes inside [0, 1].
  auto q = [](double s) { return 1.0 + std::cos(3.0 * s); };
  const auto quad = pift::kg_truncated_quadrature(alpha, 0.0, 1.0, intervals);
  const auto m = pift::kg_prior_mean(alpha, q, quad);
  const double hq = quad.nodes[1].x - quad.nodes[0].x;
  for (std::size_t i = 1; i + 1 < quad.size(); ++i) {
    const double xi = quad.nodes[i].x;
    if (xi < 0.0 || xi > 1.0) continue;
    const double op = -(m(quad.nodes[i + 1].x) - 2 * m(xi) + m(quad.nodes[i - 1].x)) / (hq * hq) +
                      alpha * alpha * m(xi);
    r.mean_residual = std::max(r.mean_residual, std::abs(op - q(xi)));
  }
  return r;
}

/// max |beta * cov_beta(x, x') - cov_1(x, x')| over a few points, no data.
inline double kg_beta_scaling_error(double alpha) {
  pift::Dataset none;
  none.sigma = 1.0;
  auto kernel = pift::klein_gordon_kernel(alpha);
  const auto base = pift::free_posterior(kernel, nullptr, none, 1.0);
  double err = 0.0;
  for (double beta : {0.1, 3.0, 1e3, 1e5}) {
    const auto post = pift::free_posterior(kernel, nullptr, none, beta);
    for (double x : {0.0, 0.3, 0.9}) {
      for (double xp : {0.0, 0.5}) {
        err = std::max(err, std::abs(beta * post.covariance(x, xp) - base.covariance(x, xp)));
      }
    }
  }
  return err;
}

// ---------------------------------------------------------------------------
// Gradient suite: every analytic gradient against a five-point difference.

struct GradientReport {
  double basis = 0.0;
  double energy_theta = 0.0;
  double energy_lambda = 0.0;
  double likelihood = 0.0;
  double hamiltonian = 0.0;
  int configurations = 0;
  double worst() const {
    return std::max({basis, energy_theta, energy_lambda, likelihood, hamiltonian});
  }
};

struct RandomProblem {
  pift::BasisPtr basis;
  pift::EnergyPtr model;
  std::string label;
};

inline double uniform(std::mt19937_64& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

inline Point random_point(std::mt19937_64& rng, const pift::Domain& d) {
  Point p{uniform(rng, d.lo(0), d.hi(0)), 0.0};
  if (d.dim() == 2) p.y = uniform(rng, d.lo(1), d.hi(1));
  return p;
}

/// Problem `i` cycles through every basis and energy variant with random
/// coefficients; every positive parameter is inferred.
inline RandomProblem random_problem(int i, std::mt19937_64& rng) {
  using namespace pift;
  auto pos = [&](double lo, double hi) { return PositiveParam{uniform(rng, lo, hi), true}; };
  const double a = uniform(rng, -1.0, 0.0), b = a + uniform(rng, 0.5, 2.0);
  auto f1 = std::make_shared<Fourier1D>(3, a, b);
  auto wrapped = std::make_shared<BoundaryWrapped1D>(f1, uniform(rng, -1, 1), uniform(rng, -1, 1));
  auto cos4 = SourceTerm::closed_form([](const Point& p) { return std::cos(4 * p.x); }, "cos4");
  auto src2 = SourceTerm::closed_form(
      [](const Point& p) { return std::sin(p.x) * std::cos(2 * p.y); }, "src2");
  auto blend = SourceTerm::blend(
      uniform(rng, 0, 1), [](const Point& p) { return std::cos(4 * p.x); },
      [](const Point& p) { return std::exp(-p.x); }, "blend");
  switch (i % 9) {
    case 0:
      return {f1, std::make_shared<DirichletHeat>(pos(0.1, 2), cos4), "heat/fourier1d"};
    case 1:
      return {wrapped, std::make_shared<CubicNonlinear>(pos(0.05, 1), pos(0.5, 2), blend, uniform(rng, 0, 1)),
              "cubic-blend/wrapped"};
    case 2:
      return {Fourier2D::nine_term(), std::make_shared<AllenCahn>(pos(0.005, 0.1), src2),
              "allen-cahn/fourier2d"};
    case 3:
      return {std::make_shared<WellInformed2D>(), std::make_shared<AllenCahn>(pos(0.005, 0.1), src2),
              "allen-cahn/well-informed"};
    case 4:
      return {wrapped, std::make_shared<SquaredResidual>(SquaredResidual::Pde::kHeat, pos(0.1, 2), cos4),
              "residual-heat/wrapped"};
    case 5:
      return {f1, std::make_shared<SquaredResidual>(SquaredResidual::Pde::kCubic, pos(0.05, 1), cos4, pos(0.5, 2)),
              "residual-cubic/fourier1d"};
    case 6:
      return {Fourier2D::nine_term(),
              std::make_shared<SquaredResidual>(SquaredResidual::Pde::kAllenCahn, pos(0.005, 0.1), src2),
              "residual-allen-cahn/fourier2d"};
    case 7: {
      auto kle = nystrom_kle(squared_exponential(uniform(rng, 0.2, 0.5), 1.0), a, b, 64, 4);
      return {wrapped, std::make_shared<CubicNonlinear>(pos(0.05, 1), pos(0.5, 2), SourceTerm::kle(kle)),
              "cubic-kle/wrapped"};
    }
    default: {
      auto kle = nystrom_kle(squared_exponential(uniform(rng, 0.2, 0.5), 1.0), a, b, 64, 4);
      return {kle, std::make_shared<DirichletHeat>(pos(0.1, 2), SourceTerm::kle(kle)), "heat-kle/kle"};
    }
  }
}

inline GradientReport gradient_suite(int configurations, std::uint64_t seed) {
  using namespace pift;
  std::mt19937_64 rng(seed);
  GradientReport rep;
  rep.configurations = configurations;
  const double h = 1e-4;
  for (int c = 0; c < configurations; ++c) {
    const RandomProblem prob = random_problem(c, rng);
    const FieldBasis& basis = *prob.basis;
    const Domain& dom = basis.domain();
    const Eigen::Index d = basis.size();
    Eigen::VectorXd theta(d);
    for (Eigen::Index j = 0; j < d; ++j) theta[j] = uniform(rng, -0.8, 0.8);
    // Keep the FD stencil inside the domain.
    Point x = random_point(rng, dom);
    x.x = std::clamp(x.x, dom.lo(0) + 3 * h, dom.hi(0) - 3 * h);
    if (dom.dim() == 2) x.y = std::clamp(x.y, dom.lo(1) + 3 * h, dom.hi(1) - 3 * h);

    // Basis: spatial derivatives, Laplacian, parameter gradients.
    for (int k = 0; k < dom.dim(); ++k) {
      auto along = [&](double t) {
        Point p = x;
        (k == 0 ? p.x : p.y) = t;
        return p;
      };
      const double fd = fd5([&](double t) { return basis.eval(theta, along(t)); }, x[k], h);
      rep.basis = std::max(rep.basis, rel_err(basis.eval_dx(theta, x)[k], fd));
    }
    double lap_fd = 0.0;
    for (int k = 0; k < dom.dim(); ++k) {
      lap_fd += fd5(
          [&](double t) {
            Point p = x;
            (k == 0 ? p.x : p.y) = t;
            return basis.eval_dx(theta, p)[k];
          },
          x[k], h);
    }
    rep.basis = std::max(rep.basis, rel_err(basis.eval_laplacian(theta, x), lap_fd));
    const Eigen::VectorXd gt_fd =
        fd5_grad([&](const Eigen::VectorXd& t) { return basis.eval(t, x); }, theta, 1e-3);
    rep.basis = std::max(rep.basis, rel_err(basis.grad_theta(x), gt_fd));
    const Eigen::MatrixXd gdx = basis.grad_theta_dx(x);
    for (int k = 0; k < dom.dim(); ++k) {
      const Eigen::VectorXd fd =
          fd5_grad([&](const Eigen::VectorXd& t) { return basis.eval_dx(t, x)[k]; }, theta, 1e-3);
      rep.basis = std::max(rep.basis, rel_err(Eigen::VectorXd(gdx.col(k)), fd));
    }

    // Energy density: theta and lambda gradients.
    PhysicsPrior prior(prob.model, uniform(rng, 0.5, 50.0), true);
    Eigen::VectorXd lambda = prior.default_params();
    for (Eigen::Index j = 0; j < lambda.size(); ++j) lambda[j] += uniform(rng, -0.3, 0.3);
    const Eigen::VectorXd model_lambda = prior.model_params(lambda);
    const EnergyModel& model = *prob.model;
    auto u_theta = [&](const Eigen::VectorXd& t) { return model.density(x, basis.jet(t, x), model_lambda); };
    rep.energy_theta = std::max(
        rep.energy_theta,
        rel_err(grad_theta_density(model, basis, theta, x, model_lambda), fd5_grad(u_theta, theta, 1e-3)));
    auto h_lambda = [&](const Eigen::VectorXd& l) {
      return prior.beta(l) * model.density(x, basis.jet(theta, x), prior.model_params(l));
    };
    rep.energy_lambda = std::max(
        rep.energy_lambda,
        rel_err(grad_lambda_density(prior, basis, theta, x, lambda), fd5_grad(h_lambda, lambda, 1e-4)));

    // Quadrature energy and the information Hamiltonian.
    const Quadrature quad = dom.dim() == 1 ? trapezoid(dom, 64) : trapezoid(dom, 16);
    Dataset data;
    data.sigma = uniform(rng, 0.05, 0.5);
    data.values.resize(4);
    for (int j = 0; j < 4; ++j) {
      data.locations.push_back(random_point(rng, dom));
      data.values[j] = uniform(rng, -1, 1);
    }
    auto total = [&](const Eigen::VectorXd& t) { return total_energy(model, basis, t, quad, model_lambda); };
    rep.energy_theta = std::max(
        rep.energy_theta,
        rel_err(grad_total_energy(model, basis, theta, quad, model_lambda), fd5_grad(total, theta, 1e-3)));
    rep.energy_lambda = std::max(
        rep.energy_lambda,
        rel_err(grad_lambda_energy(prior, basis, theta, lambda, quad),
                fd5_grad([&](const Eigen::VectorXd& l) {
                  return prior.beta(l) * total_energy(model, basis, theta, quad, prior.model_params(l));
                }, lambda, 1e-4)));
    rep.likelihood = std::max(
        rep.likelihood,
        rel_err(grad_theta_nll(data, basis, theta),
                fd5_grad([&](const Eigen::VectorXd& t) { return neg_log_likelihood(data, basis, t); }, theta, 1e-3)));
    InfoHamiltonian ham(PhysicsPrior(prob.model, prior.beta(lambda)), prob.basis, data, quad);
    Eigen::VectorXd g(d);
    ham.value_and_grad(theta, model_lambda, g);
    rep.hamiltonian = std::max(
        rep.hamiltonian,
        rel_err(g, fd5_grad([&](const Eigen::VectorXd& t) { return ham.value(t, model_lambda); }, theta, 1e-3)));
    Eigen::VectorXd ge(d);
    QuadratureEnergy qe(prob.model, prob.basis, quad);
    qe.energy_and_grad(theta, model_lambda, ge);
    rep.hamiltonian = std::max(rep.hamiltonian, rel_err(ge, fd5_grad(total, theta, 1e-3)));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Brute-force marginal Hamiltonian on a one-parameter problem.
//
// Field: constant phi = theta on [0, 1]. Energy: cubic with D, f = cos(4x),
// kappa inferred, so U(theta) = kappa theta^4 / 4 + theta sin(4) / 4.
// lambda = log kappa; Jeffreys prior (flat in lambda). Three measurements.
// Everything below is computed on a theta grid from these closed forms.

struct MarginalProblem {
  double beta = 2.0;
  double sigma = 0.3;
  std::vector<double> data = {0.4, 0.55, 0.3};
  double lo = -6.0, hi = 6.0;
  int nodes = 40001;

  double energy(double theta, double lambda) const {
    return 0.25 * std::exp(lambda) * std::pow(theta, 4) + theta * std::sin(4.0) / 4.0;
  }
  double d_energy_d_lambda(double theta, double lambda) const {
    return 0.25 * std::exp(lambda) * std::pow(theta, 4);
  }
  double nll(double theta) const {
    double acc = 0.0;
    for (double d : data) acc += (theta - d) * (theta - d);
    return acc / (2 * sigma * sigma);
  }
  double node(int i) const { return lo + (hi - lo) * i / (nodes - 1); }
  /// Normalized grid weights (Simpson) of exp(-H).
  Eigen::VectorXd weights(double lambda, bool posterior) const {
    Eigen::VectorXd w(nodes);
    double shift = std::numeric_limits<double>::infinity();
    for (int i = 0; i < nodes; ++i) {
      w[i] = (posterior ? nll(node(i)) : 0.0) + beta * energy(node(i), lambda);
      shift = std::min(shift, w[i]);
    }
    for (int i = 0; i < nodes; ++i) {
      const double simpson = (i == 0 || i == nodes - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      w[i] = simpson * std::exp(-(w[i] - shift));
    }
    return w / w.sum();
  }
  /// -log int exp(-H(theta|d)) + log int exp(-beta U), up to a constant.
  double marginal(double lambda) const {
    auto log_integral = [&](bool posterior) {
      double shift = std::numeric_limits<double>::infinity();
      std::vector<double> e(nodes);
      for (int i = 0; i < nodes; ++i) {
        e[i] = (posterior ? nll(node(i)) : 0.0) + beta * energy(node(i), lambda);
        shift = std::min(shift, e[i]);
      }
      double acc = 0.0;
      for (int i = 0; i < nodes; ++i) {
        const double simpson = (i == 0 || i == nodes - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += simpson * std::exp(-(e[i] - shift));
      }
      return std::log(acc) - shift;
    };
    return -log_integral(true) + log_integral(false);
  }
  double marginal_gradient_fd(double lambda, double h = 1e-4) const {
    return fd5([&](double l) { return marginal(l); }, lambda, h);
  }
  /// Inverse-CDF draw of theta from the grid density, given its cumulative
  /// sums.
  double draw(const std::vector<double>& cdf, std::mt19937_64& rng) const {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * cdf.back();
    const auto i = std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
    return node(static_cast<int>(std::min<std::ptrdiff_t>(i, nodes - 1)));
  }
};

inline std::vector<double> cumulative(const Eigen::VectorXd& w) {
  std::vector<double> c(static_cast<std::size_t>(w.size()));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) c[static_cast<std::size_t>(i)] = acc += w[i];
  return c;
}

struct MarginalGradientReport {
  double lambda = 0.0;
  double oracle_gradient = 0.0;       // FD of the brute-force marginal
  double exact_inner_gradient = 0.0;  // identity with grid expectations
  double mc_mean = 0.0;               // estimator mean over draws
  double mc_stderr = 0.0;
  int draws = 0;
};

inline MarginalGradientReport marginal_gradient_check(double lambda, int draws, std::uint64_t seed) {
  using namespace pift;
  const MarginalProblem mp;
  MarginalGradientReport rep;
  rep.lambda = lambda;
  rep.draws = draws;
  rep.oracle_gradient = mp.marginal_gradient_fd(lambda);

  // Library pieces: the same problem through the energy/sampler modules.
  auto basis = std::make_shared<Fourier1D>(0, 0.0, 1.0);
  auto model = std::make_shared<CubicNonlinear>(
      PositiveParam{0.1}, PositiveParam{std::exp(lambda), true},
      SourceTerm::closed_form([](const Point& p) { return std::cos(4 * p.x); }, "cos4"));
  PhysicsPrior prior(model, mp.beta);
  const Quadrature quad = trapezoid(Domain::interval(0, 1), 33);
  Eigen::VectorXd lam(1);
  lam << lambda;

  const Eigen::VectorXd wpost = mp.weights(lambda, true), wprior = mp.weights(lambda, false);
  double post = 0.0, pri = 0.0;
  for (int i = 0; i < mp.nodes; ++i) {
    Eigen::VectorXd th(1);
    th << mp.node(i);
    const double g = grad_lambda_energy(prior, *basis, th, lam, quad)[0];
    post += wpost[i] * g;
    pri += wprior[i] * g;
  }
  const ParameterPrior jeffreys = ParameterPrior::jeffreys(1);
  rep.exact_inner_gradient = post - pri + jeffreys.grad(lam)[0];

  const auto cdf_post = cumulative(wpost), cdf_prior = cumulative(wprior);
  std::mt19937_64 draw_rng(seed);
  Rng rng(seed + 1);
  UniformDistribution q(Domain::interval(0, 1));
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < draws; ++k) {
    Eigen::VectorXd tp(1), tq(1);
    tp << mp.draw(cdf_post, draw_rng);
    tq << mp.draw(cdf_prior, draw_rng);
    const double g = lambda_gradient_estimate(prior, *basis, lam, {tp}, {tq}, 1, 1, q, jeffreys, rng)[0];
    sum += g;
    sum2 += g * g;
  }
  rep.mc_mean = sum / draws;
  rep.mc_stderr = std::sqrt(std::max(0.0, sum2 / draws - rep.mc_mean * rep.mc_mean) / (draws - 1));
  return rep;
}

// ---------------------------------------------------------------------------
// Variations of the cubic energy D/2 phi'^2 + kappa/4 phi^4 + phi f.

struct VariationReport {
  double worst_first_ratio = 0.0;  // max |dE[phi*; eta]| / ||eta||
  double min_second = 0.0;         // min second variation over trials
  int trials = 0;
};

inline VariationReport cubic_variations(int trials, std::uint64_t seed) {
  using namespace pift;
  const double D = 0.1, kappa = 1.0;
  auto f = [](double x) { return std::cos(4 * x); };
  const GridFunction sol = solve_semilinear_bvp(D, kappa, 0.0, f, 0.0, 1.0, 0.0, 0.0);
  const Eigen::VectorXd xs = sol.nodes(), phi = sol.values();
  const Eigen::Index n = xs.size();
  const double h = xs[1] - xs[0];
  // Second-order derivative of the grid solution.
  Eigen::VectorXd dphi(n);
  for (Eigen::Index i = 1; i + 1 < n; ++i) dphi[i] = (phi[i + 1] - phi[i - 1]) / (2 * h);
  dphi[0] = (-3 * phi[0] + 4 * phi[1] - phi[2]) / (2 * h);
  dphi[n - 1] = (3 * phi[n - 1] - 4 * phi[n - 2] + phi[n - 3]) / (2 * h);

  CubicNonlinear model(PositiveParam{D}, PositiveParam{kappa},
                       SourceTerm::closed_form([f](const Point& p) { return f(p.x); }, "cos4"));
  std::mt19937_64 rng(seed);
  VariationReport rep;
  rep.trials = trials;
  rep.min_second = std::numeric_limits<double>::infinity();
  auto basis = std::make_shared<BoundaryWrapped1D>(std::make_shared<Fourier1D>(5), 0.0, 0.0);
  const Quadrature quad = trapezoid(Domain::interval(0, 1), 2049);
  for (int t = 0; t < trials; ++t) {
    // Zero-boundary direction eta = sum_k c_k sin(k pi x).
    Eigen::VectorXd c(5);
    for (int k = 0; k < 5; ++k) c[k] = uniform(rng, -1, 1);
    auto eta = [&](double x, double& deta) {
      double v = 0.0;
      deta = 0.0;
      for (int k = 0; k < 5; ++k) {
        v += c[k] * std::sin((k + 1) * std::numbers::pi * x);
        deta += c[k] * (k + 1) * std::numbers::pi * std::cos((k + 1) * std::numbers::pi * x);
      }
      return v;
    };
    auto energy = [&](double eps) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        double de;
        const double e = eta(xs[i], de);
        FieldJet jet;
        jet.value = phi[i] + eps * e;
        jet.grad[0] = dphi[i] + eps * de;
        const double w = (i == 0 || i == n - 1) ? 0.5 * h : h;
        acc += w * model.density({xs[i], 0.0}, jet);
      }
      return acc;
    };
    const double first = fd5(energy, 0.0, 1e-3);
    double norm2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double de;
      const double e = eta(xs[i], de);
      norm2 += ((i == 0 || i == n - 1) ? 0.5 : 1.0) * h * e * e;
    }
    rep.worst_first_ratio = std::max(rep.worst_first_ratio, std::abs(first) / std::sqrt(norm2));

    // Second variation at a random field along a random direction.
    Eigen::VectorXd theta(basis->size()), v(basis->size());
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
      theta[j] = uniform(rng, -2, 2);
      v[j] = uniform(rng, -1, 1);
    }
    const double step = 1e-3;
    auto e_at = [&](double s) { return total_energy(model, *basis, theta + s * v, quad); };
    const double second = (e_at(step) - 2 * e_at(0.0) + e_at(-step)) / (step * step);
    rep.min_second = std::min(rep.min_second, second);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// PINN and B-PINN correspondences.

struct CorrespondenceReport {
  double pinn = 0.0;   // max relative |pinn_loss - H(theta|d)|
  double bpinn = 0.0;  // max relative |bpinn - H(theta|d)|
  double bpinn_differences = 0.0;
  int trials = 0;
};

inline CorrespondenceReport pinn_correspondence(int trials, std::uint64_t seed) {
  using namespace pift;
  std::mt19937_64 rng(seed);
  CorrespondenceReport rep;
  rep.trials = trials;
  auto basis = std::make_shared<BoundaryWrapped1D>(std::make_shared<Fourier1D>(4), 0.0, 0.0);
  auto cos4 = SourceTerm::closed_form([](const Point& p) { return std::cos(4 * p.x); }, "cos4");
  SquaredResidual residual(SquaredResidual::Pde::kCubic, PositiveParam{0.1}, cos4, PositiveParam{1.0});
  auto model = std::make_shared<SquaredResidual>(residual);
  const Domain dom = Domain::interval(0, 1);
  Dataset data;
  data.sigma = 0.05;
  data.values.resize(7);
  for (int j = 1; j <= 7; ++j) {
    data.locations.push_back({j / 8.0, 0.0});
    data.values[j - 1] = uniform(rng, -0.2, 0.2);
  }
  const double beta = 37.0;
  const double s = static_cast<double>(data.size());
  const Quadrature quad = trapezoid(dom, 257);
  std::vector<Point> colloc;
  for (int i = 0; i < 50; ++i) colloc.push_back({uniform(rng, 0, 1), 0.0});
  const Quadrature shared = collocation(dom, colloc);
  const double sigma_r = std::sqrt(colloc.size() / (2.0 * beta));
  const Eigen::VectorXd lambda = model->default_params();
  const ParameterPrior none = ParameterPrior::jeffreys(0);
  double h_ref0 = 0.0, b_ref0 = 0.0;
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd theta(basis->size());
    for (Eigen::Index j = 0; j < theta.size(); ++j) theta[j] = uniform(rng, -1, 1);
    const double ell = neg_log_likelihood(data, *basis, theta);
    const double h_quad = ell + beta * total_energy(*model, *basis, theta, quad, lambda);
    const double pinn = pinn_loss(data, *basis, theta, s / (2 * data.sigma * data.sigma), beta,
                                  residual, quad, lambda);
    rep.pinn = std::max(rep.pinn, rel_err(pinn, h_quad, 1.0));
    const double h_colloc = ell + beta * total_energy(*model, *basis, theta, shared, lambda);
    const double bp = bpinn_neg_log_posterior(data, *basis, theta, lambda, residual, colloc, sigma_r,
                                              std::numeric_limits<double>::infinity(), none);
    rep.bpinn = std::max(rep.bpinn, rel_err(bp, h_colloc, 1.0));
    if (t == 0) {
      h_ref0 = h_colloc;
      b_ref0 = bp;
    } else {
      rep.bpinn_differences =
          std::max(rep.bpinn_differences, rel_err(bp - b_ref0, h_colloc - h_ref0, 1.0));
    }
  }
  return rep;
}

}  // namespace oracle
