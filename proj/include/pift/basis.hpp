#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

#include "pift/geometry.hpp"
#include "pift/kernels.hpp"

namespace pift {

/// Values of a field and its first/second spatial derivatives at one point.
struct FieldJet {
  double value = 0.0;
  Eigen::Vector2d grad = Eigen::Vector2d::Zero();
  double laplacian = 0.0;
};

/// Per-point evaluation of an affine basis
///
///   phi(x; theta) = offset(x) + sum_j theta_j psi_j(x)
///
/// `psi` holds psi_j(x); `dpsi.col(d)` holds d psi_j / d x_d; `lap` holds the
/// Laplacian of psi_j. The offset carries fixed boundary data.
struct BasisFrame {
  Eigen::VectorXd psi;
  Eigen::MatrixXd dpsi;
  Eigen::VectorXd lap;
  FieldJet offset;

  void resize(Eigen::Index size, int dim) {
    psi.resize(size);
    dpsi.resize(size, dim);
    lap.resize(size);
  }

  /// Field jet for the given coefficients.
  FieldJet jet(const Eigen::Ref<const Eigen::VectorXd>& theta) const;
};

/// A finite parameterization phi(x; theta) of a scalar field.
///
/// Every basis in this library is affine in theta, so parameter gradients do
/// not depend on theta. Implementations are immutable after construction and
/// may be shared across threads.
class FieldBasis {
 public:
  virtual ~FieldBasis() = default;

  const Domain& domain() const { return domain_; }
  int dim() const { return domain_.dim(); }
  virtual Eigen::Index size() const = 0;
  virtual std::string name() const = 0;

  /// Fills `frame` at x. Throws std::invalid_argument if x is outside the
  /// domain (closed, with 1e-12 slack).
  void evaluate(const Point& x, BasisFrame& frame) const;

  double eval(const Eigen::Ref<const Eigen::VectorXd>& theta,
              const Point& x) const;
  Eigen::Vector2d eval_dx(const Eigen::Ref<const Eigen::VectorXd>& theta,
                          const Point& x) const;
  double eval_laplacian(const Eigen::Ref<const Eigen::VectorXd>& theta,
                        const Point& x) const;
  FieldJet jet(const Eigen::Ref<const Eigen::VectorXd>& theta,
               const Point& x) const;

  /// d phi / d theta at x.
  Eigen::VectorXd grad_theta(const Point& x) const;
  /// d (grad_x phi) / d theta at x, one column per spatial dimension.
  Eigen::MatrixXd grad_theta_dx(const Point& x) const;

  void check_size(const Eigen::Ref<const Eigen::VectorXd>& theta) const;

 protected:
  explicit FieldBasis(Domain domain) : domain_(std::move(domain)) {}

  /// Writes psi, dpsi, lap and offset for an in-domain point.
  virtual void fill(const Point& x, BasisFrame& frame) const = 0;

 private:
  Domain domain_;
};

using BasisPtr = std::shared_ptr<const FieldBasis>;

/// Truncated real Fourier series on [a, b]:
///   theta_0 + sum_{j=1..K} theta_j cos(2 pi j t) + theta_{K+j} sin(2 pi j t),
/// with t = (x - a) / (b - a). Parameter count is 1 + 2K.
class Fourier1D final : public FieldBasis {
 public:
  Fourier1D(int num_pairs, double a = 0.0, double b = 1.0);

  Eigen::Index size() const override { return 1 + 2 * num_pairs_; }
  std::string name() const override { return "fourier1d"; }
  int num_pairs() const { return num_pairs_; }

 protected:
  void fill(const Point& x, BasisFrame& frame) const override;

 private:
  friend class BoundaryWrapped1D;

  int num_pairs_;
  double omega_;
};

/// phi(x) = (1-t) phi0 + t phi1 + t (1-t) psi(x; theta), t = (x-a)/(b-a).
/// Boundary values hold exactly for every theta.
class BoundaryWrapped1D final : public FieldBasis {
 public:
  BoundaryWrapped1D(std::shared_ptr<const Fourier1D> inner, double phi0,
                    double phi1);

  Eigen::Index size() const override { return inner_->size(); }
  std::string name() const override { return "boundary_wrapped1d"; }
  double phi0() const { return phi0_; }
  double phi1() const { return phi1_; }
  const Fourier1D& inner() const { return *inner_; }

 protected:
  void fill(const Point& x, BasisFrame& frame) const override;

 private:
  std::shared_ptr<const Fourier1D> inner_;
  double phi0_;
  double phi1_;
};

/// Real 2D Fourier modes on [-1,1]^2 built from tensor products of
/// {1, cos(pi k x), sin(pi k x)} factors.
class Fourier2D final : public FieldBasis {
 public:
  enum class Kind { kOne, kCos, kSin };
  struct Factor {
    Kind kind = Kind::kOne;
    int freq = 0;
  };
  struct Mode {
    Factor fx;
    Factor fy;
  };

  explicit Fourier2D(std::vector<Mode> modes);

  /// The 9-term basis {1, cx, sx, cy, sy, cx cy, cx sy, sx cy, sx sy} with
  /// cx = cos(pi x), sx = sin(pi x), in that order.
  static std::shared_ptr<Fourier2D> nine_term();

  Eigen::Index size() const override {
    return static_cast<Eigen::Index>(modes_.size());
  }
  std::string name() const override { return "fourier2d"; }
  const std::vector<Mode>& modes() const { return modes_; }

 protected:
  void fill(const Point& x, BasisFrame& frame) const override;

 private:
  std::vector<Mode> modes_;
};

/// Single-parameter basis theta * exp(-(x^2+y^2)) sin(pi x) sin(pi y) on
/// [-1,1]^2; vanishes on the whole boundary.
class WellInformed2D final : public FieldBasis {
 public:
  WellInformed2D();

  Eigen::Index size() const override { return 1; }
  std::string name() const override { return "well_informed2d"; }

 protected:
  void fill(const Point& x, BasisFrame& frame) const override;
};

/// Truncated Karhunen-Loeve expansion of a 1D Gaussian random field,
///   f(x; c) = sum_m sqrt(mu_m) xi_m(x) c_m,
/// with eigenpairs from a Nystrom discretization of the kernel operator.
class KleBasis final : public FieldBasis {
 public:
  Eigen::Index size() const override {
    return static_cast<Eigen::Index>(eigenvalues_.size());
  }
  std::string name() const override { return "kle"; }

  /// Retained eigenvalues, descending, non-negative.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  /// Discrete eigenvectors at the nodes, one column per mode, normalized so
  /// that xi_i^T W xi_j = delta_ij.
  const Eigen::MatrixXd& node_eigenvectors() const { return eigvecs_; }
  const Eigen::VectorXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  /// Sum of retained eigenvalues over the sum of all (clipped) eigenvalues.
  double retained_energy() const { return retained_energy_; }

  /// Nystrom-extended eigenfunction xi_m(x).
  double eigenfunction(Eigen::Index m, double x) const;

  friend std::shared_ptr<KleBasis> nystrom_kle(const CovarianceKernel& kernel,
                                               double a, double b,
                                               int num_nodes, int num_terms);

 protected:
  void fill(const Point& x, BasisFrame& frame) const override;

 private:
  KleBasis(CovarianceKernel kernel, double a, double b);

  CovarianceKernel kernel_;
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigvecs_;
  // Columns of W * xi_m / mu_m, used by the Nystrom extension.
  Eigen::MatrixXd extension_;
  double retained_energy_ = 0.0;
};

/// Top-`num_terms` eigenpairs of the kernel operator on [a, b], discretized
/// with trapezoidal weights on `num_nodes` uniform nodes.
std::shared_ptr<KleBasis> nystrom_kle(const CovarianceKernel& kernel, double a,
                                      double b, int num_nodes, int num_terms);

}  // namespace pift
