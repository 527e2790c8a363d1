#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace polalign {

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;

/// Box bounds; empty vectors mean unconstrained.
struct Bounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  bool active() const { return lower.size() > 0; }
  Eigen::VectorXd clamp(Eigen::VectorXd x) const;
  bool contains(const Eigen::VectorXd& x, double slack = 1e-9) const;
};

struct NelderMeadOptions {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;

  double initial_scale = 1.0;  ///< axis step used to build the initial simplex

  int max_evaluations = 200;

  /// Evaluations between forced re-measurements of the best vertex; stale
  /// cached values under measurement noise otherwise pin lucky low draws.
  /// 0 disables refreshing.
  int revaluation_interval = 10;

  /// Evaluations over which the convergence conditions must hold.
  int convergence_window = 5;

  /// minimize() stops early once the simplex diameter stays below this and
  /// the value spread stays below 2 sqrt(max(best, 1)) (counting-noise scale)
  /// for convergence_window evaluations. <= 0 runs the full budget.
  double convergence_diameter = 0.0;

  /// The simplex is re-inflated (scale initial_scale / 4) around the best
  /// vertex when its diameter falls below this, so noise-driven premature
  /// collapse cannot silently freeze a run and a drifting minimum can still
  /// be followed. <= 0 disables re-inflation; when combining with early
  /// convergence, keep this below convergence_diameter.
  double collapse_diameter = 0.0;

  /// Simulated seconds consumed per objective evaluation (one integration
  /// period); only used to stamp the evaluation trace.
  double seconds_per_evaluation = 1.0;

  Bounds bounds;

  void validate() const;  // throws std::invalid_argument
};

/// One objective measurement, in evaluation order.
struct EvaluationRecord {
  int index = 0;
  Eigen::VectorXd x;
  double value = 0.0;
  double time_s = 0.0;  ///< index * seconds_per_evaluation
};

/// n+1 vertices in n dimensions with cached objective values and the age
/// (evaluations elapsed) of each cached value.
class Simplex {
 public:
  /// Vertex 0 at x0, vertex i at x0 + scale * e_i clamped to bounds; an axis
  /// step that clamping would collapse onto x0 is taken downhill instead.
  /// Throws std::invalid_argument for scale <= 0.
  static Simplex initial(const Eigen::VectorXd& x0, double scale, const Bounds& bounds);

  int dimension() const { return static_cast<int>(vertices_.rows()); }
  int count() const { return static_cast<int>(vertices_.cols()); }

  /// One vertex per column, n x (n+1).
  const Eigen::MatrixXd& vertices() const { return vertices_; }
  Eigen::VectorXd vertex(int i) const { return vertices_.col(i); }
  double value(int i) const { return values_(i); }
  int age(int i) const { return ages_(i); }

  void set_vertex(int i, const Eigen::VectorXd& x, double value);
  void set_value(int i, double value);
  void bump_ages() { ages_.array() += 1; }

  int best_index() const;
  int worst_index() const;
  double best_value() const { return values_(best_index()); }
  double value_spread() const { return values_.maxCoeff() - values_.minCoeff(); }

  /// Largest inter-vertex distance.
  double diameter() const;
  /// Smallest singular value of the edge matrix; ~0 for a flattened simplex.
  double thinnest_extent() const;

 private:
  Simplex(Eigen::MatrixXd vertices);

  Eigen::MatrixXd vertices_;  // n x (n+1), one vertex per column
  Eigen::VectorXd values_;
  Eigen::VectorXi ages_;
};

struct OptimizeResult {
  Eigen::VectorXd best_x;
  double best_value = 0.0;
  bool converged = false;
  int evaluations = 0;
  std::vector<EvaluationRecord> trace;
  std::vector<int> reinflation_indices;  ///< evaluation index at each re-inflation
};

/// One Nelder-Mead iteration (order, reflect, maybe expand / contract /
/// shrink). Candidate points are clamped to bounds before evaluation; the
/// records for every evaluation made are appended to `trace`. The simplex
/// must already have measured values (as built by minimize/track).
Simplex step(Simplex simplex, const ObjectiveFn& objective,
             const NelderMeadOptions& options, std::vector<EvaluationRecord>& trace);

/// Runs iterations until the evaluation budget or the convergence test is
/// met. The best vertex is re-measured every revaluation_interval
/// evaluations.
OptimizeResult minimize(const ObjectiveFn& objective, const Eigen::VectorXd& x0,
                        const NelderMeadOptions& options);

/// Continuous variant for time-varying objectives: never terminates on
/// convergence (only on the budget), and re-inflates a collapsed or
/// flattened simplex around the current best vertex.
OptimizeResult track(const ObjectiveFn& objective, const Eigen::VectorXd& x0,
                     const NelderMeadOptions& options);

}  // namespace polalign
