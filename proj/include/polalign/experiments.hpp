#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "polalign/hardware.hpp"
#include "polalign/nelder_mead.hpp"
#include "polalign/photon_pair.hpp"
#include "polalign/polarization.hpp"

namespace polalign {

/// Everything needed for one seeded alignment or tracking run. Exactly one of
/// bob_basis / bob_drift must be set. Each objective evaluation consumes one
/// integration period of simulated time.
struct AlignmentScenario {
  TwoPhotonState state;
  CoincidenceModel model;

  ActuatorSpec alice_actuator = ActuatorSpec::three_stage(100.0);
  DriftModel alice_channel = StaticDrift{};
  JonesVector alice_pbs_h{1.0, 0.0};

  std::optional<StokesVector> bob_basis;  ///< fixed target
  std::optional<DriftModel> bob_drift;    ///< or a drifting target

  NelderMeadOptions optimizer;  ///< bounds/budget filled in by make_default
  Eigen::VectorXd start_voltages;

  std::uint64_t seed = 1;
  int evaluations = 100;

  /// Replace Poisson sampling with exact expected counts (the deterministic
  /// oracle mode; establishes the optimizer-limited error floor).
  bool zero_noise = false;

  /// In-lab operating defaults: r_p = 800/s, r_a = 60/s, T = 5 s, gamma = 1,
  /// 3-stage actuator with the given v_pi, start at (v_pi/2, v_pi/2, v_pi/2),
  /// standard Nelder-Mead coefficients, initial scale 0.3 v_pi.
  static AlignmentScenario make_default(double v_pi = 100.0);

  void validate() const;
};

/// Per-evaluation log of one run: voltages, both coincidence channels,
/// singles, and the simulation-only ground-truth angle.
struct RunRecord {
  int index = 0;
  double time_s = 0.0;
  Eigen::VectorXd voltages;
  double c_hh = 0.0;
  double c_hv = 0.0;
  double singles_a = 0.0;
  double singles_b = 0.0;
  double theta_ab_rad = 0.0;
};

struct RunTrace {
  std::vector<RunRecord> records;
  Eigen::VectorXd best_voltages;
  double final_theta_rad = 0.0;  ///< angle at the best voltages, end of run
  bool converged = false;
  std::vector<int> reinflation_indices;
};

/// Drives minimize() with the sampled (h_a, h_b) count as the objective,
/// logging the complementary channel, singles, and ground truth each
/// evaluation. Deterministic for a given scenario and seed.
RunTrace run_alignment(const AlignmentScenario& scenario);

/// Same objective through track(); requires bob_drift.
RunTrace run_tracking(const AlignmentScenario& scenario);

/// 1 - mean(c_hh)/mean(c_hv) over records [first, last), clamped to [0, 1].
/// Throws std::invalid_argument for an empty or out-of-range window.
double extinction_ratio(const RunTrace& trace, int first, int last);

/// extinction_ratio over the last `window` records.
double trailing_extinction_ratio(const RunTrace& trace, int window);

/// First index at which the trailing-window extinction ratio reaches
/// `threshold`, or -1 if it never does.
int lock_index(const RunTrace& trace, int window, double threshold);

/// Uniform random point on the Poincare sphere.
StokesVector sample_uniform_basis(RandomSource& rng);

struct SweepPoint {
  double coord1 = 0.0;              ///< T for the time sweep; r_p T for the grid
  double coord2 = 0.0;              ///< r_a T for the grid; unused otherwise
  double car = 0.0;                 ///< coincidence-to-accidental ratio r_p/r_a
  double mean_theta_error_rad = 0.0;
  double stddev_theta_error_rad = 0.0;
  int runs = 0;
  /// Per-run final errors, indexed by target. Every cell of a sweep replays
  /// the same targets and seed streams (common random numbers), so two cells
  /// can be compared pairwise, target by target.
  std::vector<double> errors_rad;
};

struct SweepResult {
  std::vector<SweepPoint> points;
};

/// Mean final alignment error vs integration time, averaged over
/// targets_per_point uniform targets per grid value; each target may be
/// re-run repeats_per_target times with fresh noise (the per-target mean is
/// what enters the statistics).
SweepResult sweep_integration_time(const AlignmentScenario& base,
                                   const std::vector<double>& t_grid,
                                   int targets_per_point = 100,
                                   int repeats_per_target = 1, int workers = 1);

/// Mean final alignment error over an (r_p T, r_a T) grid at fixed T.
SweepResult sweep_rate_grid(const AlignmentScenario& base,
                            const std::vector<double>& rp_t_grid,
                            const std::vector<double>& ra_t_grid,
                            int targets_per_point = 100,
                            int repeats_per_target = 1, int workers = 1);

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Exceptions from
/// workers are rethrown on the caller.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace polalign
