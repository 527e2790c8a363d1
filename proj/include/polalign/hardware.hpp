#pragma once

#include <variant>
#include <vector>

#include "polalign/polarization.hpp"
#include "polalign/random.hpp"

namespace polalign {

/// One piezoelectric squeezing stage: birefringence axis (0 or 45 degrees)
/// and the half-wave voltage producing pi of retardance.
struct ActuatorStage {
  double axis_deg = 0.0;
  double v_pi = 100.0;
};

/// Voltage-controlled polarization actuator: an ordered stack of variable
/// retarder stages, axes alternating 0/45 degrees, light traversing stage 0
/// first. Retardance is linear in voltage: delta = pi * v / v_pi.
struct ActuatorSpec {
  std::vector<ActuatorStage> stages;
  Eigen::VectorXd v_min;  ///< per-stage lower voltage limit
  Eigen::VectorXd v_max;  ///< per-stage upper voltage limit

  /// 3-stage actuator (0, 45, 0 degrees), limits [-3 v_pi/4, 7 v_pi/4].
  static ActuatorSpec three_stage(double v_pi);
  /// 4-stage actuator (0, 45, 0, 45 degrees), limits [-3 v_pi/4, 7 v_pi/4].
  static ActuatorSpec four_stage(double v_pi);

  int size() const { return static_cast<int>(stages.size()); }
  bool within_limits(const Eigen::VectorXd& v) const;
  void validate() const;
};

using VoltageVector = Eigen::VectorXd;

/// Jones matrix of a linear retarder: fast axis at axis_deg (physical
/// degrees), phase retardance in radians. On the Poincare sphere: rotation by
/// the retardance about (cos 2*axis, sin 2*axis, 0).
PolarizationTransform retarder_transform(double axis_deg, double retardance);

/// Ordered product of the stage retarders at the given voltages (stage 0
/// rightmost). Throws std::domain_error for voltages outside the limits.
PolarizationTransform actuator_transform(const ActuatorSpec& spec,
                                         const VoltageVector& v);

/// Fixed channel transformation.
struct StaticDrift {
  PolarizationTransform transform = PolarizationTransform::Identity();
};

/// Great-circle drift: a 4-stage actuator whose first three voltages are
/// fixed and whose last stage ramps as a sawtooth of the given amplitude,
/// sweeping the output basis along a great circle at rate_deg_per_hour.
/// The sweep resets once the retardance ramp reaches pi * amplitude / v_pi.
///
/// The default axis setup (0, v_pi/2, v_pi/2) projects the sweep onto the
/// S2-S3 equator, a circle in general position relative to the receiving
/// actuator's own rotation axes (two exactly coincident frames are a
/// measure-zero special case that pins the chart singularity onto the
/// swept path).
struct SawtoothGreatCircleDrift {
  ActuatorSpec actuator = ActuatorSpec::four_stage(100.0);
  Eigen::Vector3d axis_setup_v = Eigen::Vector3d(0.0, 50.0, 50.0);
  double rate_deg_per_hour = 176.1;
  double amplitude_v = 100.0;  ///< sawtooth voltage amplitude, default = v_pi
};

/// Isotropic angular random walk: one small random rotation per step_seconds,
/// scaled so the RMS displacement of any basis point after time t is
/// step_scale_deg_per_sqrt_hour * sqrt(t hours) (while small).
struct RandomWalkDrift {
  double step_scale_deg_per_sqrt_hour = 0.1;
  double step_seconds = 5.0;
};

using DriftModel = std::variant<StaticDrift, SawtoothGreatCircleDrift, RandomWalkDrift>;

/// Stateful drift evaluator. For the random walk, `at` must be called with
/// non-decreasing times; the walk advances in step_seconds increments drawn
/// from the owned random source, so a given seed reproduces the trajectory
/// bit for bit.
class DriftSampler {
 public:
  DriftSampler(DriftModel model, RandomSource rng);

  PolarizationTransform at(double t_seconds);

 private:
  DriftModel model_;
  RandomSource rng_;
  PolarizationTransform walk_state_ = PolarizationTransform::Identity();
  long long walk_steps_done_ = 0;
};

/// Channel transformation at time t. Stateless convenience wrapper: the
/// random walk is replayed from t = 0 on every call using `rng`.
PolarizationTransform channel_transform(const DriftModel& drift, double t_seconds,
                                        RandomSource& rng);

/// Measurement basis seen at the fiber input: back-propagates the PBS h-axis
/// through the actuator, then the channel (light order is
/// source -> channel -> actuator -> PBS), i.e. the Stokes image of
/// (actuator * channel)^dagger * pbs_h_axis.
StokesVector effective_basis(const PolarizationTransform& channel,
                             const PolarizationTransform& actuator,
                             const JonesVector& pbs_h_axis);

}  // namespace polalign
