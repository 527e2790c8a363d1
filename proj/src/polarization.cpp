#include "polalign/polarization.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace polalign {

namespace {
constexpr Complex kI{0.0, 1.0};
}

JonesVector normalized_jones(const JonesVector& j) {
  const double norm = j.norm();
  if (norm < 1e-12) throw std::invalid_argument("normalized_jones: zero vector");
  return j / norm;
}

StokesVector jones_to_stokes(const JonesVector& j) {
  const Complex cross = std::conj(j(0)) * j(1);
  return {std::norm(j(0)) - std::norm(j(1)), 2.0 * cross.real(), 2.0 * cross.imag()};
}

JonesVector stokes_to_jones(const StokesVector& s) {
  const double ax_sq = 0.5 * (1.0 + s(0));
  if (ax_sq <= 0.0) return {Complex(0.0, 0.0), Complex(1.0, 0.0)};
  const double ax = std::sqrt(ax_sq);
  const Complex ay = Complex(s(1), s(2)) / (2.0 * ax);
  return normalized_jones({Complex(ax, 0.0), ay});
}

PolarizationTransform transform_from_basis(const JonesVector& j) {
  const JonesVector u = normalized_jones(j);
  PolarizationTransform m;
  m << u(0), -std::conj(u(1)),
       u(1),  std::conj(u(0));
  return m;
}

JonesVector apply_transform(const PolarizationTransform& u, const JonesVector& j) {
  return normalized_jones(u * j);
}

double angle_between(const StokesVector& a, const StokesVector& b) {
  return std::acos(std::clamp(a.dot(b), -1.0, 1.0));
}

PolarizationTransform rotation_about(const StokesVector& axis, double angle) {
  // Generators per the library convention: S1 <-> sigma_z, S2 <-> sigma_x,
  // S3 <-> sigma_y.
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  PolarizationTransform generator;
  generator << Complex(axis(0), 0.0), Complex(axis(1), -axis(2)),
               Complex(axis(1), axis(2)), Complex(-axis(0), 0.0);
  return c * PolarizationTransform::Identity() - kI * s * generator;
}

double unitarity_defect(const PolarizationTransform& u) {
  return (u.adjoint() * u - PolarizationTransform::Identity()).cwiseAbs().maxCoeff();
}

}  // namespace polalign
