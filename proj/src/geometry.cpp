#include "pift/geometry.hpp"

#include <sstream>
#include <stdexcept>

namespace pift {

Domain::Domain(int dim, std::array<double, 2> lo, std::array<double, 2> hi)
    : dim_(dim), lo_(lo), hi_(hi) {
  for (int d = 0; d < dim_; ++d) {
    if (!(hi_[d] > lo_[d])) {
      throw std::invalid_argument("domain: upper bound must exceed lower bound");
    }
  }
}

Domain Domain::interval(double a, double b) {
  return Domain(1, {a, 0.0}, {b, 0.0});
}

Domain Domain::box(double ax, double bx, double ay, double by) {
  return Domain(2, {ax, ay}, {bx, by});
}

double Domain::volume() const {
  double v = 1.0;
  for (int d = 0; d < dim_; ++d) v *= length(d);
  return v;
}

bool Domain::contains(const Point& p, double tol) const {
  for (int d = 0; d < dim_; ++d) {
    const double c = p[d];
    if (!(c >= lo_[d] - tol && c <= hi_[d] + tol)) return false;
  }
  return true;
}

std::string Domain::describe() const {
  std::ostringstream os;
  for (int d = 0; d < dim_; ++d) {
    if (d > 0) os << " x ";
    os << '[' << lo_[d] << ", " << hi_[d] << ']';
  }
  return os.str();
}

}  // namespace pift
