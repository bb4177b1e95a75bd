#include "pift/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>
#include <stdexcept>

#include "pift/quadrature.hpp"

namespace pift {

double quantile(Eigen::VectorXd values, double p) {
  if (values.size() == 0) throw std::invalid_argument("quantile: empty input");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile: p outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<Eigen::Index>(std::floor(pos));
  const Eigen::Index hi = std::min<Eigen::Index>(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double median(const Eigen::VectorXd& values) { return quantile(values, 0.5); }

std::vector<Point> grid_1d(double a, double b, int n) {
  if (n < 2) throw std::invalid_argument("grid_1d: need at least two points");
  std::vector<Point> grid;
  grid.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) grid.push_back({a + (b - a) * i / (n - 1), 0.0});
  return grid;
}

std::vector<Point> grid_2d(const Domain& box, int nx, int ny) {
  if (box.dim() != 2 || nx < 2 || ny < 2) {
    throw std::invalid_argument("grid_2d: need a 2D box and at least two points per axis");
  }
  std::vector<Point> grid;
  grid.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      grid.push_back({box.lo(0) + box.length(0) * i / (nx - 1),
                      box.lo(1) + box.length(1) * j / (ny - 1)});
    }
  }
  return grid;
}

FieldSummary summarize_field(const Eigen::MatrixXd& samples, const FieldBasis& basis,
                             const std::vector<Point>& grid) {
  if (samples.rows() == 0) throw std::invalid_argument("summarize_field: empty chain");
  if (samples.cols() != basis.size()) {
    throw std::invalid_argument("summarize_field: chain width does not match basis");
  }
  const auto g = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd features(basis.size(), g);
  Eigen::VectorXd offset(g);
  BasisFrame frame;
  for (Eigen::Index i = 0; i < g; ++i) {
    basis.evaluate(grid[static_cast<std::size_t>(i)], frame);
    features.col(i) = frame.psi;
    offset[i] = frame.offset.value;
  }
  // rows = samples, cols = grid points
  Eigen::MatrixXd fields = samples * features;
  fields.rowwise() += offset.transpose();

  FieldSummary out;
  out.grid = grid;
  out.mean = fields.colwise().mean().transpose();
  out.stddev.resize(g);
  out.q025.resize(g);
  out.q975.resize(g);
  for (Eigen::Index i = 0; i < g; ++i) {
    const Eigen::VectorXd col = fields.col(i);
    const double var = (col.array() - out.mean[i]).square().mean();
    out.stddev[i] = std::sqrt(std::max(var, 0.0));
    out.q025[i] = quantile(col, 0.025);
    out.q975[i] = quantile(col, 0.975);
  }
  return out;
}

void FieldSummary::write_csv(const std::string& path, int dim) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << (dim == 2 ? "x,y,mean,std,q025,q975\n" : "x,mean,std,q025,q975\n");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out << grid[i].x << ',';
    if (dim == 2) out << grid[i].y << ',';
    out << mean[k] << ',' << stddev[k] << ',' << q025[k] << ',' << q975[k] << '\n';
  }
}

// ---------------------------------------------------------------------------
// Two-component Gaussian mixture

namespace {

constexpr double kMinVariance = 1e-12;

// log N(x | mu, diag(var)) for every row.
Eigen::VectorXd log_gauss(const Eigen::MatrixXd& x, const Eigen::RowVectorXd& mu,
                          const Eigen::RowVectorXd& var) {
  const double log_norm =
      -0.5 * (static_cast<double>(x.cols()) * std::log(2.0 * std::numbers::pi) +
              var.array().log().sum());
  const Eigen::RowVectorXd inv = var.cwiseInverse();
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out[i] = log_norm - 0.5 * ((x.row(i) - mu).array().square() * inv.array()).sum();
  }
  return out;
}

// Responsibilities and mean log-likelihood in one pass.
double e_step(const Eigen::MatrixXd& x, const GmmFit& fit, Eigen::MatrixXd& resp) {
  resp.resize(x.rows(), 2);
  const Eigen::VectorXd l0 =
      log_gauss(x, fit.means.row(0), fit.variances.row(0)).array() + std::log(fit.weights[0]);
  const Eigen::VectorXd l1 =
      log_gauss(x, fit.means.row(1), fit.variances.row(1)).array() + std::log(fit.weights[1]);
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double m = std::max(l0[i], l1[i]);
    const double a = std::exp(l0[i] - m);
    const double b = std::exp(l1[i] - m);
    resp(i, 0) = a / (a + b);
    resp(i, 1) = b / (a + b);
    total += m + std::log(a + b);
  }
  return total / static_cast<double>(x.rows());
}

// Returns false when a component degenerates.
bool m_step(const Eigen::MatrixXd& x, const Eigen::MatrixXd& resp, GmmFit& fit) {
  for (int c = 0; c < 2; ++c) {
    const double nk = resp.col(c).sum();
    if (!(nk > 0.0)) return false;
    fit.weights[c] = nk / static_cast<double>(x.rows());
    const Eigen::RowVectorXd mu = (resp.col(c).transpose() * x) / nk;
    Eigen::RowVectorXd var = Eigen::RowVectorXd::Zero(x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      var += resp(i, c) * (x.row(i) - mu).array().square().matrix();
    }
    var /= nk;
    if (var.minCoeff() < kMinVariance) return false;
    fit.means.row(c) = mu;
    fit.variances.row(c) = var;
  }
  return true;
}

// k-means++ seeding followed by hard assignment.
bool initialize(const Eigen::MatrixXd& x, Rng& rng, GmmFit& fit) {
  const Eigen::Index n = x.rows();
  const auto first = std::min<Eigen::Index>(
      static_cast<Eigen::Index>(uniform01(rng) * static_cast<double>(n)), n - 1);
  Eigen::VectorXd d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2[i] = (x.row(i) - x.row(first)).squaredNorm();
  const double total = d2.sum();
  if (!(total > 0.0)) return false;
  double target = uniform01(rng) * total;
  Eigen::Index second = n - 1;
  for (Eigen::Index i = 0; i < n; ++i) {
    target -= d2[i];
    if (target < 0.0) {
      second = i;
      break;
    }
  }
  Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = (x.row(i) - x.row(first)).squaredNorm();
    const double b = (x.row(i) - x.row(second)).squaredNorm();
    resp(i, a <= b ? 0 : 1) = 1.0;
  }
  return m_step(x, resp, fit);
}

}  // namespace

GmmFit fit_gmm2(const Eigen::MatrixXd& samples, int max_iters, double tol,
                std::uint64_t seed) {
  if (samples.rows() < 2 || samples.cols() < 1) {
    throw std::invalid_argument("fit_gmm2: need at least two samples");
  }
  if (max_iters < 1) throw std::invalid_argument("fit_gmm2: max_iters must be >= 1");
  Rng rng(seed);
  for (int attempt = 0; attempt < 2; ++attempt) {
    GmmFit fit;
    fit.means.resize(2, samples.cols());
    fit.variances.resize(2, samples.cols());
    if (!initialize(samples, rng, fit)) continue;
    bool degenerate = false;
    Eigen::MatrixXd resp;
    double prev = e_step(samples, fit, resp);
    fit.log_likelihood.push_back(prev);
    for (int it = 0; it < max_iters; ++it) {
      if (!m_step(samples, resp, fit)) {
        degenerate = true;
        break;
      }
      const double ll = e_step(samples, fit, resp);
      fit.log_likelihood.push_back(ll);
      fit.iterations = it + 1;
      if (std::abs(ll - prev) < tol * std::max(1.0, std::abs(ll))) {
        fit.converged = true;
        break;
      }
      prev = ll;
    }
    if (degenerate) continue;
    fit.responsibilities = std::move(resp);
    return fit;
  }
  throw std::runtime_error("fit_gmm2: degenerate mixture component (variance < 1e-12)");
}

Eigen::MatrixXd GmmFit::responsibilities_for(const Eigen::MatrixXd& samples) const {
  if (samples.cols() != means.cols()) {
    throw std::invalid_argument("gmm: sample dimension mismatch");
  }
  Eigen::MatrixXd resp;
  e_step(samples, *this, resp);
  return resp;
}

nlohmann::json GmmFit::to_json() const {
  auto to_vec = [](const Eigen::RowVectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  nlohmann::json j;
  j["weights"] = {weights[0], weights[1]};
  j["means"] = {to_vec(means.row(0)), to_vec(means.row(1))};
  j["variances"] = {to_vec(variances.row(0)), to_vec(variances.row(1))};
  j["log_likelihood"] = log_likelihood;
  j["iterations"] = iterations;
  j["converged"] = converged;
  return j;
}

ModeSplit split_modes(const Eigen::MatrixXd& samples, const GmmFit& fit) {
  const Eigen::MatrixXd resp = fit.responsibilities_for(samples);
  ModeSplit out;
  out.labels.resize(static_cast<std::size_t>(samples.rows()));
  Eigen::Index n0 = 0;
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    const int label = resp(i, 0) >= resp(i, 1) ? 0 : 1;
    out.labels[static_cast<std::size_t>(i)] = label;
    n0 += label == 0;
  }
  out.first.resize(n0, samples.cols());
  out.second.resize(samples.rows() - n0, samples.cols());
  Eigen::Index a = 0, b = 0;
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    if (out.labels[static_cast<std::size_t>(i)] == 0) {
      out.first.row(a++) = samples.row(i);
    } else {
      out.second.row(b++) = samples.row(i);
    }
  }
  return out;
}

namespace {

Eigen::VectorXd average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  Eigen::VectorXd ranks(static_cast<Eigen::Index>(n));
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[static_cast<Eigen::Index>(order[k])] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double monotone_trend(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 3) throw std::invalid_argument("monotone_trend: need at least 3 pairs");
  std::vector<double> gamma, value;
  std::set<double> seen;
  for (const auto& [g, v] : pairs) {
    if (!seen.insert(g).second) throw std::invalid_argument("monotone_trend: tied gamma values");
    gamma.push_back(g);
    value.push_back(v);
  }
  const Eigen::VectorXd rg = average_ranks(gamma);
  const Eigen::VectorXd rv = average_ranks(value);
  const Eigen::VectorXd cg = rg.array() - rg.mean();
  const Eigen::VectorXd cv = rv.array() - rv.mean();
  const double denom = std::sqrt(cg.squaredNorm() * cv.squaredNorm());
  if (!(denom > 0.0)) return 0.0;
  return cg.dot(cv) / denom;
}

}  // namespace pift
