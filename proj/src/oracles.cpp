#include "polalign/oracles.hpp"

#include <cmath>

namespace polalign {

namespace {

/// Jones vector orthogonal to j (the state of the complementary PBS port).
JonesVector orthogonal_jones(const JonesVector& j) {
  return {-std::conj(j(1)), std::conj(j(0))};
}

Eigen::Vector4cd product_ket(const JonesVector& alice, const JonesVector& bob) {
  Eigen::Vector4cd ket;
  ket << alice(0) * bob(0), alice(0) * bob(1), alice(1) * bob(0), alice(1) * bob(1);
  return ket;
}

JonesVector random_jones(RandomSource& rng) {
  JonesVector j{Complex(rng.normal(), rng.normal()), Complex(rng.normal(), rng.normal())};
  return normalized_jones(j);
}

OracleCheck summarize(std::string name, double max_error, double tolerance) {
  return {std::move(name), max_error <= tolerance, max_error, tolerance};
}

}  // namespace

Eigen::Matrix4cd singlet_density() {
  Eigen::Vector4cd psi;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  psi << 0.0, inv_sqrt2, -inv_sqrt2, 0.0;  // |xy> - |yx|
  return psi * psi.adjoint();
}

Eigen::Matrix4cd dephased_pair_density(const StokesVector& crystal_axis) {
  const JonesVector c = stokes_to_jones(crystal_axis);
  const JonesVector c_perp = stokes_to_jones(StokesVector(-crystal_axis));
  const Eigen::Vector4cd ket_ab = product_ket(c, c_perp);
  const Eigen::Vector4cd ket_ba = product_ket(c_perp, c);
  return 0.5 * (ket_ab * ket_ab.adjoint() + ket_ba * ket_ba.adjoint());
}

Eigen::Matrix4cd pair_density(const TwoPhotonState& state) {
  return state.gamma * singlet_density() +
         (1.0 - state.gamma) * dephased_pair_density(state.crystal_axis);
}

double detection_probability(const Eigen::Matrix4cd& rho, const JonesVector& alice_h,
                             const JonesVector& bob_h, DetectorPair pair) {
  // Projection of rho onto the product of the two port states; the v port of
  // either observer projects onto the orthogonal Jones vector.
  const bool alice_v = (pair == DetectorPair::VH || pair == DetectorPair::VV);
  const bool bob_v = (pair == DetectorPair::HV || pair == DetectorPair::VV);
  const JonesVector a = alice_v ? orthogonal_jones(alice_h) : alice_h;
  const JonesVector b = bob_v ? orthogonal_jones(bob_h) : bob_h;
  const Eigen::Vector4cd ket = product_ket(a, b);
  return (ket.adjoint() * rho * ket)(0).real();
}

std::vector<OracleCheck> run_identity_suite(int samples, std::uint64_t seed) {
  RandomSource rng(seed);
  double bridge_err = 0.0;
  double round_trip_err = 0.0;
  for (int i = 0; i < samples; ++i) {
    const JonesVector ja = random_jones(rng);
    const JonesVector jb = random_jones(rng);
    const StokesVector a = jones_to_stokes(ja);
    const StokesVector b = jones_to_stokes(jb);

    const double inner_sq = std::norm(ja.dot(jb));  // Eigen dot conjugates lhs
    bridge_err = std::max(bridge_err, std::abs(inner_sq - 0.5 * (1.0 + a.dot(b))));

    const StokesVector s = rng.unit_vector();
    round_trip_err =
        std::max(round_trip_err, (jones_to_stokes(stokes_to_jones(s)) - s).norm());
    round_trip_err =
        std::max(round_trip_err, (jones_to_stokes(stokes_to_jones(a)) - a).norm());
  }
  return {summarize("jones-stokes inner-product bridge", bridge_err, 1e-10),
          summarize("jones<->stokes round trip", round_trip_err, 1e-10)};
}

std::vector<OracleCheck> run_coincidence_suite(int samples, std::uint64_t seed) {
  RandomSource rng(seed);
  const TwoPhotonState entangled{1.0, StokesVector(1.0, 0.0, 0.0)};

  double law_err = 0.0;
  double completeness_err = 0.0;
  double dephased_err = 0.0;

  const Eigen::Matrix4cd rho_singlet = singlet_density();

  for (int i = 0; i < samples; ++i) {
    const JonesVector ja = random_jones(rng);
    const JonesVector jb = random_jones(rng);
    const StokesVector a = jones_to_stokes(ja);
    const StokesVector b = jones_to_stokes(jb);

    // Entangled law, both against cos(theta) and the projection oracle.
    const double p_hh = coincidence_probability(a, b, entangled, DetectorPair::HH);
    law_err = std::max(law_err, std::abs(p_hh - 0.25 * (1.0 - a.dot(b))));
    law_err = std::max(
        law_err,
        std::abs(p_hh - detection_probability(rho_singlet, ja, jb, DetectorPair::HH)));

    double total = 0.0;
    for (DetectorPair pair :
         {DetectorPair::HH, DetectorPair::HV, DetectorPair::VH, DetectorPair::VV}) {
      total += coincidence_probability(a, b, entangled, pair);
    }
    completeness_err = std::max(completeness_err, std::abs(total - 1.0));

    // Dephased closed form vs brute-force mixture, random crystal axis.
    const StokesVector axis = rng.unit_vector();
    const TwoPhotonState broken{0.0, axis};
    const Eigen::Matrix4cd rho_mix = dephased_pair_density(axis);
    for (DetectorPair pair :
         {DetectorPair::HH, DetectorPair::HV, DetectorPair::VH, DetectorPair::VV}) {
      const double closed = coincidence_probability(a, b, broken, pair);
      const double brute = detection_probability(rho_mix, ja, jb, pair);
      dephased_err = std::max(dephased_err, std::abs(closed - brute));
    }
  }
  return {summarize("entangled coincidence law", law_err, 1e-12),
          summarize("four-pair completeness", completeness_err, 1e-12),
          summarize("dephased closed form vs density matrix", dephased_err, 1e-10)};
}

}  // namespace polalign
