#include "pift/basis.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace pift {

FieldJet BasisFrame::jet(const Eigen::Ref<const Eigen::VectorXd>& theta) const {
  FieldJet j;
  j.value = offset.value + psi.dot(theta);
  j.grad = offset.grad;
  for (Eigen::Index d = 0; d < dpsi.cols(); ++d) {
    j.grad[d] += dpsi.col(d).dot(theta);
  }
  j.laplacian = offset.laplacian + lap.dot(theta);
  return j;
}

void FieldBasis::evaluate(const Point& x, BasisFrame& frame) const {
  if (!domain_.contains(x)) {
    std::ostringstream os;
    os << name() << ": point (" << x.x;
    if (dim() == 2) os << ", " << x.y;
    os << ") outside domain " << domain_.describe();
    throw std::invalid_argument(os.str());
  }
  frame.resize(size(), dim());
  frame.offset = FieldJet{};
  fill(x, frame);
}

void FieldBasis::check_size(const Eigen::Ref<const Eigen::VectorXd>& theta) const {
  if (theta.size() != size()) {
    std::ostringstream os;
    os << name() << ": expected " << size() << " parameters, got "
       << theta.size();
    throw std::invalid_argument(os.str());
  }
}

double FieldBasis::eval(const Eigen::Ref<const Eigen::VectorXd>& theta,
                        const Point& x) const {
  return jet(theta, x).value;
}

Eigen::Vector2d FieldBasis::eval_dx(
    const Eigen::Ref<const Eigen::VectorXd>& theta, const Point& x) const {
  return jet(theta, x).grad;
}

double FieldBasis::eval_laplacian(const Eigen::Ref<const Eigen::VectorXd>& theta,
                                  const Point& x) const {
  return jet(theta, x).laplacian;
}

FieldJet FieldBasis::jet(const Eigen::Ref<const Eigen::VectorXd>& theta,
                         const Point& x) const {
  check_size(theta);
  BasisFrame frame;
  evaluate(x, frame);
  return frame.jet(theta);
}

Eigen::VectorXd FieldBasis::grad_theta(const Point& x) const {
  BasisFrame frame;
  evaluate(x, frame);
  return frame.psi;
}

Eigen::MatrixXd FieldBasis::grad_theta_dx(const Point& x) const {
  BasisFrame frame;
  evaluate(x, frame);
  return frame.dpsi;
}

// ---------------------------------------------------------------------------

Fourier1D::Fourier1D(int num_pairs, double a, double b)
    : FieldBasis(Domain::interval(a, b)),
      num_pairs_(num_pairs),
      omega_(2.0 * std::numbers::pi / (b - a)) {
  if (num_pairs < 0) {
    throw std::invalid_argument("fourier1d: num_pairs must be non-negative");
  }
}

void Fourier1D::fill(const Point& x, BasisFrame& frame) const {
  const int K = num_pairs_;
  const double s = x.x - domain().lo(0);
  frame.psi[0] = 1.0;
  frame.dpsi(0, 0) = 0.0;
  frame.lap[0] = 0.0;
  // cos(j w s), sin(j w s) by angle addition from the first harmonic.
  const double c1 = std::cos(omega_ * s);
  const double s1 = std::sin(omega_ * s);
  double cj = 1.0;
  double sj = 0.0;
  for (int j = 1; j <= K; ++j) {
    const double cn = cj * c1 - sj * s1;
    const double sn = sj * c1 + cj * s1;
    cj = cn;
    sj = sn;
    const double w = j * omega_;
    frame.psi[j] = cj;
    frame.psi[K + j] = sj;
    frame.dpsi(j, 0) = -w * sj;
    frame.dpsi(K + j, 0) = w * cj;
    frame.lap[j] = -w * w * cj;
    frame.lap[K + j] = -w * w * sj;
  }
}

// ---------------------------------------------------------------------------

BoundaryWrapped1D::BoundaryWrapped1D(std::shared_ptr<const Fourier1D> inner,
                                     double phi0, double phi1)
    : FieldBasis(inner ? inner->domain() : Domain::interval(0.0, 1.0)),
      inner_(std::move(inner)),
      phi0_(phi0),
      phi1_(phi1) {
  if (!inner_) {
    throw std::invalid_argument("boundary_wrapped1d: inner basis is null");
  }
}

void BoundaryWrapped1D::fill(const Point& x, BasisFrame& frame) const {
  inner_->fill(x, frame);
  const double L = domain().length(0);
  const double t = (x.x - domain().lo(0)) / L;
  const double w = t * (1.0 - t);
  const double dw = (1.0 - 2.0 * t) / L;
  const double d2w = -2.0 / (L * L);
  for (Eigen::Index j = 0; j < frame.psi.size(); ++j) {
    const double p = frame.psi[j];
    const double dp = frame.dpsi(j, 0);
    const double d2p = frame.lap[j];
    frame.psi[j] = w * p;
    frame.dpsi(j, 0) = dw * p + w * dp;
    frame.lap[j] = d2w * p + 2.0 * dw * dp + w * d2p;
  }
  frame.offset.value = (1.0 - t) * phi0_ + t * phi1_;
  frame.offset.grad = Eigen::Vector2d((phi1_ - phi0_) / L, 0.0);
  frame.offset.laplacian = 0.0;
}

// ---------------------------------------------------------------------------

namespace {

struct FactorJet {
  double v, d, d2;
};

FactorJet factor_jet(const Fourier2D::Factor& f, double x) {
  const double w = std::numbers::pi * f.freq;
  switch (f.kind) {
    case Fourier2D::Kind::kOne:
      return {1.0, 0.0, 0.0};
    case Fourier2D::Kind::kCos: {
      const double c = std::cos(w * x);
      return {c, -w * std::sin(w * x), -w * w * c};
    }
    case Fourier2D::Kind::kSin: {
      const double s = std::sin(w * x);
      return {s, w * std::cos(w * x), -w * w * s};
    }
  }
  return {0.0, 0.0, 0.0};
}

}  // namespace

Fourier2D::Fourier2D(std::vector<Mode> modes)
    : FieldBasis(Domain::box(-1.0, 1.0, -1.0, 1.0)), modes_(std::move(modes)) {
  if (modes_.empty()) {
    throw std::invalid_argument("fourier2d: at least one mode required");
  }
  for (const auto& m : modes_) {
    for (const auto& f : {m.fx, m.fy}) {
      if (f.kind != Kind::kOne && f.freq < 1) {
        throw std::invalid_argument("fourier2d: trig factors need freq >= 1");
      }
    }
  }
}

std::shared_ptr<Fourier2D> Fourier2D::nine_term() {
  const Factor one{Kind::kOne, 0};
  const Factor c{Kind::kCos, 1};
  const Factor s{Kind::kSin, 1};
  return std::make_shared<Fourier2D>(std::vector<Mode>{
      {one, one}, {c, one}, {s, one}, {one, c}, {one, s},
      {c, c}, {c, s}, {s, c}, {s, s}});
}

void Fourier2D::fill(const Point& x, BasisFrame& frame) const {
  for (std::size_t j = 0; j < modes_.size(); ++j) {
    const FactorJet a = factor_jet(modes_[j].fx, x.x);
    const FactorJet b = factor_jet(modes_[j].fy, x.y);
    const auto i = static_cast<Eigen::Index>(j);
    frame.psi[i] = a.v * b.v;
    frame.dpsi(i, 0) = a.d * b.v;
    frame.dpsi(i, 1) = a.v * b.d;
    frame.lap[i] = a.d2 * b.v + a.v * b.d2;
  }
}

// ---------------------------------------------------------------------------

WellInformed2D::WellInformed2D()
    : FieldBasis(Domain::box(-1.0, 1.0, -1.0, 1.0)) {}

void WellInformed2D::fill(const Point& x, BasisFrame& frame) const {
  constexpr double pi = std::numbers::pi;
  // g(x, y) = A(x) A(y) with A(s) = exp(-s^2) sin(pi s).
  auto factor = [](double s) {
    const double e = std::exp(-s * s);
    const double sn = std::sin(pi * s);
    const double cs = std::cos(pi * s);
    return FactorJet{e * sn, e * (pi * cs - 2.0 * s * sn),
                     e * ((4.0 * s * s - 2.0 - pi * pi) * sn - 4.0 * pi * s * cs)};
  };
  const FactorJet a = factor(x.x);
  const FactorJet b = factor(x.y);
  frame.psi[0] = a.v * b.v;
  frame.dpsi(0, 0) = a.d * b.v;
  frame.dpsi(0, 1) = a.v * b.d;
  frame.lap[0] = a.d2 * b.v + a.v * b.d2;
}

}  // namespace pift
