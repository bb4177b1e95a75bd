#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pift/energy.hpp"

using namespace pift;
using Eigen::VectorXd;

namespace {

SourceTerm closed(double (*f)(double), const char* label) {
  return SourceTerm::closed_form([f](const Point& p) { return f(p.x); }, label);
}

double cos4(double x) { return std::cos(4 * x); }
double exp_neg(double x) { return std::exp(-x); }
double zero(double) { return 0.0; }

FieldJet jet(double value, double dx, double dy = 0.0) {
  FieldJet j;
  j.value = value;
  j.grad << dx, dy;
  return j;
}

}  // namespace

TEST_SUITE("energy") {
  TEST_CASE("density examples") {
    DirichletHeat heat({0.25}, closed(exp_neg, "exp"));
    CHECK(heat.density({0.0}, jet(0, 0)) == 0.0);
    CHECK(heat.density({0.3}, jet(2, 1)) == doctest::Approx(0.5 * 0.25 - 2 * std::exp(-0.3)));

    AllenCahn ac({0.01}, closed(zero, "zero"));
    CHECK(ac.density({0.2, -0.4}, jet(1, 0, 0)) == 0.0);
    CHECK(ac.density({0.2, -0.4}, jet(-1, 0, 0)) == 0.0);

    CubicNonlinear cubic({0.1}, {1.0}, closed(cos4, "cos4"));
    CHECK(cubic.density({0.0}, jet(1, 2)) == doctest::Approx(1.45).epsilon(1e-15));
  }

  TEST_CASE("blended cubic density") {
    const double gamma = 0.3;
    CubicNonlinear cubic({0.1}, {2.0}, closed(cos4, "cos4"), gamma);
    const double phi = 0.7, dphi = -1.2, x = 0.4;
    const double expected = 0.5 * 0.1 * dphi * dphi + gamma * 0.25 * 2.0 * std::pow(phi, 4) +
                            0.5 * (1 - gamma) * phi * phi + phi * std::cos(4 * x);
    CHECK(cubic.density({x}, jet(phi, dphi)) == doctest::Approx(expected).epsilon(1e-14));
  }

  TEST_CASE("gamma-blend source") {
    auto s = SourceTerm::blend(0.25, [](const Point& p) { return std::cos(4 * p.x); },
                               [](const Point& p) { return std::exp(-p.x); }, "blend");
    const VectorXd none(0);
    CHECK(s.value({0.6}, none) == doctest::Approx(0.25 * std::cos(2.4) + 0.75 * std::exp(-0.6)));
  }

  TEST_CASE("theta-gradient examples") {
    DirichletHeat heat({1.0}, closed(exp_neg, "exp"));
    Fourier1D constant(0);
    const VectorXd g = grad_theta_density(heat, constant, VectorXd::Zero(1), {0.4});
    CHECK(g[0] == doctest::Approx(-std::exp(-0.4)));

    AllenCahn ac({0.05}, closed(zero, "zero"));
    WellInformed2D w;
    CHECK(grad_theta_density(ac, w, VectorXd::Zero(1), {0.3, 0.2})[0] == 0.0);
  }

  TEST_CASE("lambda-gradient examples") {
    const double D = 0.3, kappa = 1.7, beta = 4.0;
    auto cubic = std::make_shared<CubicNonlinear>(PositiveParam{D, true}, PositiveParam{kappa, true},
                                                  closed(cos4, "cos4"));
    PhysicsPrior prior(cubic, beta);
    auto basis = std::make_shared<Fourier1D>(2);
    VectorXd theta(5);
    theta << 0.3, -0.2, 0.5, 0.1, 0.4;
    const Point x{0.35};
    const double dphi = basis->eval_dx(theta, x)[0];
    const double phi = basis->eval(theta, x);
    const VectorXd g = grad_lambda_density(prior, *basis, theta, x, prior.default_params());
    CHECK(g[0] == doctest::Approx(beta * D * 0.5 * dphi * dphi).epsilon(1e-13));
    CHECK(g[1] == doctest::Approx(beta * kappa * 0.25 * std::pow(phi, 4)).epsilon(1e-13));

    auto silent = std::make_shared<CubicNonlinear>(PositiveParam{D, true}, PositiveParam{kappa, true},
                                                   SourceTerm());
    PhysicsPrior quiet(silent, beta, true);
    const VectorXd z = grad_lambda_density(quiet, *basis, VectorXd::Zero(5), x, quiet.default_params());
    CHECK(z.cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("inferred beta appends log beta and its derivative is h") {
    auto heat = std::make_shared<DirichletHeat>(PositiveParam{0.5, true}, closed(exp_neg, "exp"));
    PhysicsPrior prior(heat, 30.0, true);
    CHECK(prior.param_names() == std::vector<std::string>{"log_D", "log_beta"});
    const VectorXd lambda = prior.default_params();
    CHECK(lambda[1] == doctest::Approx(std::log(30.0)));
    CHECK(prior.beta(lambda) == doctest::Approx(30.0));
    auto basis = std::make_shared<Fourier1D>(1);
    const VectorXd theta = Eigen::Vector3d(0.2, 0.4, -0.3);
    const Point x{0.6};
    const double h = 30.0 * heat->density(x, basis->jet(theta, x));
    CHECK(grad_lambda_density(prior, *basis, theta, x, lambda)[1] == doctest::Approx(h));
  }

  TEST_CASE("every gradient matches finite differences") {
    const auto rep = oracle::gradient_suite(27, 99);
    CHECK(rep.energy_theta < 1e-5);
    CHECK(rep.energy_lambda < 1e-5);
  }

  TEST_CASE("total energy") {
    DirichletHeat heat({0.25}, closed(exp_neg, "exp"));
    Fourier1D f(3);
    const auto quad = trapezoid(Domain::interval(0, 1), 2048);
    CHECK(total_energy(heat, f, VectorXd::Zero(7), quad) == 0.0);
    CHECK_THROWS_AS(total_energy(heat, f, VectorXd::Zero(7), Quadrature{}), std::invalid_argument);

    // Richardson-style refinement check on a smooth integrand.
    CubicNonlinear cubic({0.1}, {1.0}, closed(cos4, "cos4"));
    BoundaryWrapped1D w(std::make_shared<Fourier1D>(3), 0.2, -0.1);
    std::mt19937_64 rng(4);
    VectorXd theta(7);
    for (int i = 0; i < 7; ++i) theta[i] = oracle::uniform(rng, -1, 1);
    const double coarse = total_energy(cubic, w, theta, trapezoid(Domain::interval(0, 1), 2048));
    const double fine = total_energy(cubic, w, theta, trapezoid(Domain::interval(0, 1), 4096));
    CHECK(std::abs(coarse - fine) / std::abs(fine) < 1e-6);
  }

  TEST_CASE("first and second variations of the cubic energy") {
    const auto rep = oracle::cubic_variations(20, 13);
    CHECK(rep.worst_first_ratio < 1e-3);
    CHECK(rep.min_second > 0.0);
  }

  TEST_CASE("quadrature energy matches the direct sums") {
    auto ac = std::make_shared<AllenCahn>(PositiveParam{0.02}, SourceTerm::closed_form(
        [](const Point& p) { return p.x * p.y; }, "xy"));
    auto basis = Fourier2D::nine_term();
    const auto quad = trapezoid(basis->domain(), 24);
    QuadratureEnergy qe(ac, basis, quad);
    std::mt19937_64 rng(8);
    VectorXd theta(9);
    for (int i = 0; i < 9; ++i) theta[i] = oracle::uniform(rng, -1, 1);
    const VectorXd none(0);
    VectorXd g(9);
    const double e = qe.energy_and_grad(theta, none, g);
    CHECK(e == doctest::Approx(total_energy(*ac, *basis, theta, quad)).epsilon(1e-12));
    CHECK((g - grad_total_energy(*ac, *basis, theta, quad, none)).cwiseAbs().maxCoeff() < 1e-11);
  }

  TEST_CASE("stochastic gradient is exact for an x-independent integrand") {
    // Constant field, zero source: the density gradient does not depend on x.
    CubicNonlinear cubic({0.1}, {1.0}, SourceTerm());
    Fourier1D constant(0);
    UniformDistribution q(Domain::interval(0, 1));
    Rng rng(5);
    const VectorXd theta = VectorXd::Constant(1, 0.8);
    const VectorXd none(0);
    const VectorXd g = stochastic_grad_energy(cubic, constant, theta, none, rng, 1, q);
    CHECK(g[0] == doctest::Approx(std::pow(0.8, 3)).epsilon(1e-14));
    CHECK(q.density({0.3}) == 1.0);
  }

  TEST_CASE("stochastic gradient is unbiased for every model") {
    std::mt19937_64 prng(21);
    for (int c = 0; c < 9; ++c) {
      const auto prob = oracle::random_problem(c, prng);
      const FieldBasis& basis = *prob.basis;
      const Eigen::Index d = basis.size();
      VectorXd theta(d);
      for (Eigen::Index j = 0; j < d; ++j) theta[j] = oracle::uniform(prng, -0.5, 0.5);
      const VectorXd lambda = prob.model->default_params();
      UniformDistribution q(basis.domain());
      Rng rng(100 + c);
      const int n = 100000;
      VectorXd sum = VectorXd::Zero(d), sum2 = VectorXd::Zero(d);
      for (int i = 0; i < n; ++i) {
        const VectorXd g = stochastic_grad_energy(*prob.model, basis, theta, lambda, rng, 1, q);
        sum += g;
        sum2 += g.cwiseProduct(g);
      }
      const VectorXd mean = sum / n;
      const VectorXd se = ((sum2 / n - mean.cwiseProduct(mean)) / (n - 1)).cwiseSqrt();
      const auto quad = basis.dim() == 1 ? trapezoid(basis.domain(), 4097) : trapezoid(basis.domain(), 257);
      const VectorXd exact = grad_total_energy(*prob.model, basis, theta, quad, lambda);
      INFO(prob.label);
      for (Eigen::Index j = 0; j < d; ++j) CHECK(std::abs(mean[j] - exact[j]) <= 3.0 * se[j] + 1e-9);
    }
  }

  TEST_CASE("positive parameters must be positive") {
    CHECK_THROWS_AS(DirichletHeat({-1.0}, SourceTerm()), std::invalid_argument);
    CHECK_THROWS_AS(PhysicsPrior(std::make_shared<DirichletHeat>(PositiveParam{1.0}, SourceTerm()), 0.0),
                    std::invalid_argument);
  }
}
