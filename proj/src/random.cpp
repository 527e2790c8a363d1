#include "polalign/random.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace polalign {

double RandomSource::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double u1 = uniform_pos();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

namespace {

// Inversion by sequential search (Knuth). Valid for small means only:
// exp(-mean) underflows near mean ~ 700.
long long poisson_small(RandomSource& rng, double mean) {
  const double threshold = std::exp(-mean);
  long long k = 0;
  double prod = 1.0;
  for (;;) {
    prod *= rng.uniform_pos();
    if (prod <= threshold) return k;
    ++k;
  }
}

// PTRS transformed rejection (Hormann 1993), valid for mean >= 10.
long long poisson_ptrs(RandomSource& rng, double mean) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform_pos() - 0.5;
    const double v = rng.uniform_pos();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<long long>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<long long>(k);
    }
  }
}

}  // namespace

long long RandomSource::poisson(double mean) {
  if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be >= 0");
  if (mean == 0.0) return 0;
  if (mean < 10.0) return poisson_small(*this, mean);
  return poisson_ptrs(*this, mean);
}

Eigen::Vector3d RandomSource::unit_vector() {
  for (;;) {
    const Eigen::Vector3d g(normal(), normal(), normal());
    const double norm = g.norm();
    if (norm > 1e-12) return g / norm;
  }
}

}  // namespace polalign
