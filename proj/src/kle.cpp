#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pift/basis.hpp"

namespace pift {

KleBasis::KleBasis(CovarianceKernel kernel, double a, double b)
    : FieldBasis(Domain::interval(a, b)), kernel_(std::move(kernel)) {}

std::shared_ptr<KleBasis> nystrom_kle(const CovarianceKernel& kernel, double a,
                                      double b, int num_nodes, int num_terms) {
  if (num_nodes < 2) {
    throw std::invalid_argument("nystrom_kle: need at least two nodes");
  }
  if (num_terms < 1 || num_terms > num_nodes) {
    throw std::invalid_argument("nystrom_kle: need 1 <= M <= num_nodes");
  }
  if (!kernel.value) {
    throw std::invalid_argument("nystrom_kle: kernel has no value function");
  }
  std::shared_ptr<KleBasis> kle(new KleBasis(kernel, a, b));

  const Eigen::Index n = num_nodes;
  const double h = (b - a) / static_cast<double>(n - 1);
  kle->nodes_ = Eigen::VectorXd::LinSpaced(n, a, b);
  kle->weights_ = Eigen::VectorXd::Constant(n, h);
  kle->weights_[0] = kle->weights_[n - 1] = 0.5 * h;

  const Eigen::VectorXd sqrt_w = kle->weights_.cwiseSqrt();
  Eigen::MatrixXd op(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double kij =
          0.5 * (kernel(kle->nodes_[i], kle->nodes_[j]) +
                 kernel(kle->nodes_[j], kle->nodes_[i]));
      op(i, j) = op(j, i) = sqrt_w[i] * kij * sqrt_w[j];
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(op);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("nystrom_kle: eigensolver failed");
  }
  // Eigen returns ascending order.
  const Eigen::VectorXd all = solver.eigenvalues().reverse();
  const double lmax = all[0];
  const double lmin = all[n - 1];
  if (lmin < -1e-10 * std::abs(lmax)) {
    std::ostringstream os;
    os << "nystrom_kle: kernel matrix has eigenvalue " << lmin
       << " below -1e-10 * lambda_max";
    throw std::runtime_error(os.str());
  }
  const Eigen::VectorXd clipped = all.cwiseMax(0.0);
  const double total = clipped.sum();

  const Eigen::Index m = num_terms;
  kle->eigenvalues_ = clipped.head(m);
  kle->retained_energy_ = total > 0.0 ? kle->eigenvalues_.sum() / total : 1.0;

  const Eigen::MatrixXd vecs = solver.eigenvectors().rowwise().reverse();
  kle->eigvecs_.resize(n, m);
  kle->extension_.resize(n, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    kle->eigvecs_.col(k) = vecs.col(k).cwiseQuotient(sqrt_w);
    const double mu = kle->eigenvalues_[k];
    if (mu > 0.0) {
      kle->extension_.col(k) =
          kle->weights_.cwiseProduct(kle->eigvecs_.col(k)) / mu;
    } else {
      kle->extension_.col(k).setZero();
    }
  }
  return kle;
}

double KleBasis::eigenfunction(Eigen::Index m, double x) const {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < nodes_.size(); ++i) {
    acc += kernel_(x, nodes_[i]) * extension_(i, m);
  }
  return acc;
}

void KleBasis::fill(const Point& x, BasisFrame& frame) const {
  const Eigen::Index n = nodes_.size();
  Eigen::VectorXd k(n), dk(n), d2k(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k[i] = kernel_.value(x.x, nodes_[i]);
    dk[i] = kernel_.d_dx ? kernel_.d_dx(x.x, nodes_[i]) : 0.0;
    d2k[i] = kernel_.d2_dx2 ? kernel_.d2_dx2(x.x, nodes_[i]) : 0.0;
  }
  const Eigen::VectorXd scale = eigenvalues_.cwiseSqrt();
  frame.psi = scale.cwiseProduct(extension_.transpose() * k);
  frame.dpsi.col(0) = scale.cwiseProduct(extension_.transpose() * dk);
  frame.lap = scale.cwiseProduct(extension_.transpose() * d2k);
}

}  // namespace pift
