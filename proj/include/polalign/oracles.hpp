#pragma once

#include <string>
#include <vector>

#include "polalign/photon_pair.hpp"
#include "polalign/polarization.hpp"

namespace polalign {

// Independent reference computations. Everything here goes through explicit
// two-photon density matrices and 4-dim amplitude projections, never through
// the closed forms in photon_pair, so the two paths can check each other.

/// 4x4 density matrix of the singlet |xy> - |yx> (normalized) in the
/// x/y (x) x/y amplitude basis.
Eigen::Matrix4cd singlet_density();

/// Density matrix of the fully dephased pair: an equal mixture of
/// |c c_perp> and |c_perp c>, where c is the Jones vector of crystal_axis.
Eigen::Matrix4cd dephased_pair_density(const StokesVector& crystal_axis);

/// gamma-weighted mixture of the two densities above.
Eigen::Matrix4cd pair_density(const TwoPhotonState& state);

/// Detection probability for one detector pairing, computed by projecting rho
/// onto the product detection ket. alice_h / bob_h are the measurement-basis
/// Jones vectors (the states fully transmitted into each "h" port).
double detection_probability(const Eigen::Matrix4cd& rho, const JonesVector& alice_h,
                             const JonesVector& bob_h, DetectorPair pair);

/// One named check with its worst observed deviation.
struct OracleCheck {
  std::string name;
  bool passed = false;
  double max_error = 0.0;
  double tolerance = 0.0;
};

/// Jones<->Stokes round trips and the inner-product bridge
/// |<a~, b~>|^2 = (1 + a.b)/2 over `samples` random pairs.
std::vector<OracleCheck> run_identity_suite(int samples, std::uint64_t seed);

/// Closed-form coincidence probabilities vs density-matrix projections:
/// the entangled law 1/4 (1 - cos theta_ab), four-pair completeness, and the
/// dephased (gamma = 0) closed form, over random bases and crystal axes.
std::vector<OracleCheck> run_coincidence_suite(int samples, std::uint64_t seed);

}  // namespace polalign
