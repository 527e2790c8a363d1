#include "polalign/photon_pair.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace polalign {

void TwoPhotonState::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::invalid_argument("TwoPhotonState: gamma must be in [0, 1]");
  if (std::abs(crystal_axis.norm() - 1.0) > 1e-6)
    throw std::invalid_argument("TwoPhotonState: crystal_axis must be unit norm");
}

void CoincidenceModel::validate() const {
  if (pair_rate < 0.0 || accidental_rate < 0.0 || singles_rate_a < 0.0 ||
      singles_rate_b < 0.0)
    throw std::invalid_argument("CoincidenceModel: rates must be >= 0");
  if (!(integration_s > 0.0))
    throw std::invalid_argument("CoincidenceModel: integration period must be > 0");
}

double coincidence_probability(const StokesVector& a, const StokesVector& b,
                               const TwoPhotonState& state, DetectorPair pair) {
  const StokesVector& c = state.crystal_axis;
  // Grouped so that exchanging a and b is bitwise neutral.
  const double correlation =
      state.gamma * a.dot(b) + (1.0 - state.gamma) * (a.dot(c) * b.dot(c));
  const bool same_port = (pair == DetectorPair::HH || pair == DetectorPair::VV);
  const double p = 0.25 * (same_port ? 1.0 - correlation : 1.0 + correlation);
  return std::clamp(p, 0.0, 0.5);
}

double mean_coincidence_rate(double probability, const CoincidenceModel& model) {
  return 4.0 * model.pair_rate * probability + model.accidental_rate;
}

long long sample_coincidences(double probability, const CoincidenceModel& model,
                              RandomSource& rng) {
  return rng.poisson(mean_coincidence_rate(probability, model) * model.integration_s);
}

std::pair<long long, long long> sample_singles(const CoincidenceModel& model,
                                               RandomSource& rng) {
  const long long count_a = rng.poisson(model.singles_rate_a * model.integration_s);
  const long long count_b = rng.poisson(model.singles_rate_b * model.integration_s);
  return {count_a, count_b};
}

}  // namespace polalign
