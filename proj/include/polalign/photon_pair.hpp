#pragma once

#include "polalign/polarization.hpp"
#include "polalign/random.hpp"

namespace polalign {

/// Which of Alice's and Bob's polarizing-beamsplitter outputs are correlated.
enum class DetectorPair { HH, HV, VH, VV };

/// Two-photon polarization state of the post-selected source.
///
/// gamma = 1 is the maximally entangled singlet; gamma = 0 is the classical
/// mixture obtained when the photons are made temporally distinguishable,
/// dephased along crystal_axis (the source's signal/idler polarization axis).
/// Intermediate gamma interpolates linearly between the two density matrices.
struct TwoPhotonState {
  double gamma = 1.0;
  StokesVector crystal_axis{1.0, 0.0, 0.0};

  void validate() const;
};

/// Counting-rate parameters for one coincidence measurement channel.
struct CoincidenceModel {
  double pair_rate = 800.0;        ///< r_p, pair-detection rate scale (pairs/s)
  double accidental_rate = 60.0;   ///< r_a, background coincidences (pairs/s)
  double singles_rate_a = 1e5;     ///< Alice singles (counts/s)
  double singles_rate_b = 1e5;     ///< Bob singles (counts/s)
  double integration_s = 5.0;      ///< T, seconds per measurement

  void validate() const;
};

/// Coincidence probability for one detector pairing given both measurement
/// bases (unit Stokes vectors). For HH/VV this is
///   1/4 (1 - gamma a.b - (1-gamma)(a.c)(b.c)),
/// and for HV/VH the sign of the correlation term flips. Result in [0, 1/2].
double coincidence_probability(const StokesVector& a, const StokesVector& b,
                               const TwoPhotonState& state, DetectorPair pair);

/// Mean detected coincidence rate (counts/s): 4 r_p p + r_a.
double mean_coincidence_rate(double probability, const CoincidenceModel& model);

/// One Poisson draw with mean = mean_coincidence_rate(p, model) * T.
long long sample_coincidences(double probability, const CoincidenceModel& model,
                              RandomSource& rng);

/// Independent Poisson singles counts for the two observers over one period.
/// By construction independent of any basis or actuator state.
std::pair<long long, long long> sample_singles(const CoincidenceModel& model,
                                               RandomSource& rng);

}  // namespace polalign
