#include "polalign/hardware.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace polalign {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kDegToRad = kPi / 180.0;

ActuatorSpec make_actuator(int n_stages, double v_pi) {
  ActuatorSpec spec;
  spec.stages.reserve(n_stages);
  for (int i = 0; i < n_stages; ++i)
    spec.stages.push_back({(i % 2 == 0) ? 0.0 : 45.0, v_pi});
  // A 4 v_pi span centered on the conventional (v_pi/2, ...) start point,
  // comparable to the multi-v_pi drive range of commercial piezo
  // controllers. Two properties matter. The faces sit at retardances
  // -7pi/4 and 9pi/4, away from multiples of pi: a face at a fold of the
  // rotation would map an entire boundary plane onto one sphere point, where
  // the objective is flat and a clamped simplex gets absorbed. And spanning
  // two full turns guarantees every target angle has optimum copies well
  // inside the box, so no target is reachable only by sitting on a face.
  spec.v_min = Eigen::VectorXd::Constant(n_stages, -1.75 * v_pi);
  spec.v_max = Eigen::VectorXd::Constant(n_stages, 2.25 * v_pi);
  return spec;
}

}  // namespace

ActuatorSpec ActuatorSpec::three_stage(double v_pi) { return make_actuator(3, v_pi); }
ActuatorSpec ActuatorSpec::four_stage(double v_pi) { return make_actuator(4, v_pi); }

bool ActuatorSpec::within_limits(const Eigen::VectorXd& v) const {
  if (v.size() != size()) return false;
  for (int i = 0; i < size(); ++i) {
    if (v(i) < v_min(i) - 1e-9 || v(i) > v_max(i) + 1e-9) return false;
  }
  return true;
}

void ActuatorSpec::validate() const {
  const int n = size();
  if (n != 3 && n != 4)
    throw std::invalid_argument("ActuatorSpec: need 3 or 4 stages");
  for (int i = 0; i < n; ++i) {
    const double expected_axis = (i % 2 == 0) ? 0.0 : 45.0;
    if (stages[i].axis_deg != expected_axis)
      throw std::invalid_argument("ActuatorSpec: stage axes must alternate 0/45 deg");
    if (!(stages[i].v_pi > 0.0))
      throw std::invalid_argument("ActuatorSpec: v_pi must be > 0");
  }
  if (v_min.size() != n || v_max.size() != n)
    throw std::invalid_argument("ActuatorSpec: limit vectors must match stage count");
}

PolarizationTransform retarder_transform(double axis_deg, double retardance) {
  const double axis_rad = 2.0 * axis_deg * kDegToRad;
  return rotation_about({std::cos(axis_rad), std::sin(axis_rad), 0.0}, retardance);
}

PolarizationTransform actuator_transform(const ActuatorSpec& spec,
                                         const VoltageVector& v) {
  if (v.size() != spec.size())
    throw std::domain_error("actuator_transform: voltage count != stage count");
  if (!spec.within_limits(v))
    throw std::domain_error("actuator_transform: voltage outside limits");
  PolarizationTransform u = PolarizationTransform::Identity();
  for (int i = 0; i < spec.size(); ++i) {
    const double delta = kPi * v(i) / spec.stages[i].v_pi;
    u = retarder_transform(spec.stages[i].axis_deg, delta) * u;
  }
  return u;
}

DriftSampler::DriftSampler(DriftModel model, RandomSource rng)
    : model_(std::move(model)), rng_(rng) {
  if (auto* saw = std::get_if<SawtoothGreatCircleDrift>(&model_)) {
    saw->actuator.validate();
    if (saw->actuator.size() != 4)
      throw std::invalid_argument("SawtoothGreatCircleDrift: need a 4-stage actuator");
  }
}

PolarizationTransform DriftSampler::at(double t_seconds) {
  if (t_seconds < 0.0) throw std::invalid_argument("DriftSampler: t must be >= 0");

  if (const auto* fixed = std::get_if<StaticDrift>(&model_)) return fixed->transform;

  if (const auto* saw = std::get_if<SawtoothGreatCircleDrift>(&model_)) {
    const double v_pi_last = saw->actuator.stages[3].v_pi;
    const double rate_rad_s = saw->rate_deg_per_hour * kDegToRad / 3600.0;
    const double span = kPi * saw->amplitude_v / v_pi_last;  // ramp, radians
    double phase = std::fmod(rate_rad_s * t_seconds, span);
    if (phase < 0.0) phase += span;
    VoltageVector v(4);
    v << saw->axis_setup_v(0), saw->axis_setup_v(1), saw->axis_setup_v(2),
        phase * v_pi_last / kPi;
    return actuator_transform(saw->actuator, v);
  }

  const auto& walk = std::get<RandomWalkDrift>(model_);
  if (!(walk.step_seconds > 0.0))
    throw std::invalid_argument("RandomWalkDrift: step_seconds must be > 0");
  const auto target_steps =
      static_cast<long long>(std::floor(t_seconds / walk.step_seconds + 1e-9));
  if (target_steps < walk_steps_done_)
    throw std::invalid_argument("DriftSampler: random walk time must not decrease");
  // Per-step rotation sigma such that the RMS tangent displacement of a basis
  // point accumulates as step_scale * sqrt(t): a random-axis rotation by alpha
  // displaces a point by alpha * sin(axis angle), E[sin^2] = 2/3.
  const double scale_rad_sqrt_s =
      walk.step_scale_deg_per_sqrt_hour * kDegToRad / 60.0;
  const double sigma = scale_rad_sqrt_s * std::sqrt(1.5 * walk.step_seconds);
  while (walk_steps_done_ < target_steps) {
    const Eigen::Vector3d axis = rng_.unit_vector();
    const double angle = sigma * rng_.normal();
    walk_state_ = rotation_about(axis, angle) * walk_state_;
    ++walk_steps_done_;
  }
  return walk_state_;
}

PolarizationTransform channel_transform(const DriftModel& drift, double t_seconds,
                                        RandomSource& rng) {
  DriftSampler sampler(drift, rng);
  return sampler.at(t_seconds);
}

StokesVector effective_basis(const PolarizationTransform& channel,
                             const PolarizationTransform& actuator,
                             const JonesVector& pbs_h_axis) {
  return jones_to_stokes(
      normalized_jones((actuator * channel).adjoint() * pbs_h_axis));
}

}  // namespace polalign
