#include "polalign/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/SVD>

namespace polalign {

namespace {

constexpr double kUnmeasured = std::numeric_limits<double>::quiet_NaN();

/// Thrown by the budget guard before an evaluation that would exceed the
/// budget; unwinds out of the current iteration without consuming anything.
struct BudgetExhausted {};

bool measured(double v) { return !std::isnan(v); }

}  // namespace

Eigen::VectorXd Bounds::clamp(Eigen::VectorXd x) const {
  if (!active()) return x;
  return x.cwiseMax(lower).cwiseMin(upper);
}

bool Bounds::contains(const Eigen::VectorXd& x, double slack) const {
  if (!active()) return true;
  return (x.array() >= lower.array() - slack).all() &&
         (x.array() <= upper.array() + slack).all();
}

void NelderMeadOptions::validate() const {
  if (!(reflection > 0.0))
    throw std::invalid_argument("NelderMeadOptions: reflection must be > 0");
  if (!(expansion > reflection))
    throw std::invalid_argument("NelderMeadOptions: expansion must exceed reflection");
  if (!(contraction > 0.0 && contraction < 1.0))
    throw std::invalid_argument("NelderMeadOptions: contraction must be in (0, 1)");
  if (!(shrink > 0.0 && shrink < 1.0))
    throw std::invalid_argument("NelderMeadOptions: shrink must be in (0, 1)");
  if (max_evaluations < 1)
    throw std::invalid_argument("NelderMeadOptions: max_evaluations must be >= 1");
  if (revaluation_interval < 0 || convergence_window < 0)
    throw std::invalid_argument("NelderMeadOptions: intervals must be >= 0");
  if (!(seconds_per_evaluation > 0.0))
    throw std::invalid_argument("NelderMeadOptions: seconds_per_evaluation must be > 0");
  if (bounds.active() && bounds.lower.size() != bounds.upper.size())
    throw std::invalid_argument("NelderMeadOptions: mismatched bound vectors");
}

Simplex::Simplex(Eigen::MatrixXd vertices) : vertices_(std::move(vertices)) {
  values_ = Eigen::VectorXd::Constant(vertices_.cols(), kUnmeasured);
  ages_ = Eigen::VectorXi::Zero(vertices_.cols());
}

Simplex Simplex::initial(const Eigen::VectorXd& x0, double scale, const Bounds& bounds) {
  if (!(scale > 0.0))
    throw std::invalid_argument("Simplex::initial: scale must be > 0");
  const auto n = x0.size();
  Eigen::MatrixXd vertices(n, n + 1);
  vertices.col(0) = bounds.clamp(x0);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd v = vertices.col(0);
    v(i) += scale;
    v = bounds.clamp(v);
    if ((v - vertices.col(0)).norm() < 1e-12 * std::max(1.0, scale)) {
      v = vertices.col(0);
      v(i) -= scale;  // axis step clamped away entirely; take it downhill
      v = bounds.clamp(v);
    }
    vertices.col(i + 1) = v;
  }
  return Simplex(std::move(vertices));
}

void Simplex::set_vertex(int i, const Eigen::VectorXd& x, double value) {
  vertices_.col(i) = x;
  values_(i) = value;
  ages_(i) = 0;
}

void Simplex::set_value(int i, double value) {
  values_(i) = value;
  ages_(i) = 0;
}

int Simplex::best_index() const {
  int best = 0;
  for (int i = 1; i < count(); ++i)
    if (values_(i) < values_(best)) best = i;
  return best;
}

int Simplex::worst_index() const {
  int worst = 0;
  for (int i = 1; i < count(); ++i)
    if (values_(i) >= values_(worst)) worst = i;
  return worst;
}

double Simplex::diameter() const {
  double d = 0.0;
  for (int i = 0; i < count(); ++i)
    for (int j = i + 1; j < count(); ++j)
      d = std::max(d, (vertices_.col(i) - vertices_.col(j)).norm());
  return d;
}

double Simplex::thinnest_extent() const {
  Eigen::MatrixXd edges(dimension(), dimension());
  for (int i = 0; i < dimension(); ++i)
    edges.col(i) = vertices_.col(i + 1) - vertices_.col(0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(edges);
  return svd.singularValues().minCoeff();
}

namespace {

class Evaluator {
 public:
  Evaluator(const ObjectiveFn& objective, const NelderMeadOptions& options,
            std::vector<EvaluationRecord>& trace)
      : objective_(objective), options_(options), trace_(trace) {}

  double operator()(Simplex& simplex, const Eigen::VectorXd& x) {
    const int index = static_cast<int>(trace_.size());
    if (index >= options_.max_evaluations) throw BudgetExhausted{};
    const double value = objective_(x);
    trace_.push_back({index, x, value, index * options_.seconds_per_evaluation});
    simplex.bump_ages();
    return value;
  }

  int count() const { return static_cast<int>(trace_.size()); }

 private:
  const ObjectiveFn& objective_;
  const NelderMeadOptions& options_;
  std::vector<EvaluationRecord>& trace_;
};

/// Indices sorted best-to-worst; stable so noisy ties break deterministically.
std::vector<int> ranked(const Simplex& simplex) {
  std::vector<int> order(simplex.count());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return simplex.value(a) < simplex.value(b);
  });
  return order;
}

// One iteration, in place: if the budget guard fires mid-step the simplex is
// left in its last consistent state (every accepted vertex was measured).
void step_in_place(Simplex& simplex, Evaluator& eval, const NelderMeadOptions& opt) {
  // Measure any vertices without a cached value first (fresh or re-inflated
  // simplexes arrive here unmeasured).
  for (int i = 0; i < simplex.count(); ++i) {
    if (!measured(simplex.value(i))) {
      const Eigen::VectorXd x = simplex.vertex(i);
      const double v = eval(simplex, x);
      simplex.set_vertex(i, x, v);
    }
  }

  const std::vector<int> order = ranked(simplex);
  const int best = order.front();
  const int second_worst = order[order.size() - 2];
  const int worst = order.back();

  Eigen::VectorXd centroid = Eigen::VectorXd::Zero(simplex.dimension());
  for (int i : order)
    if (i != worst) centroid += simplex.vertex(i);
  centroid /= simplex.dimension();

  const Eigen::VectorXd direction = centroid - simplex.vertex(worst);

  const Eigen::VectorXd x_reflect =
      opt.bounds.clamp(centroid + opt.reflection * direction);
  const double f_reflect = eval(simplex, x_reflect);

  if (f_reflect < simplex.value(best)) {
    const Eigen::VectorXd x_expand =
        opt.bounds.clamp(centroid + opt.expansion * direction);
    const double f_expand = eval(simplex, x_expand);
    if (f_expand < f_reflect)
      simplex.set_vertex(worst, x_expand, f_expand);
    else
      simplex.set_vertex(worst, x_reflect, f_reflect);
    return;
  }

  if (f_reflect < simplex.value(second_worst)) {
    simplex.set_vertex(worst, x_reflect, f_reflect);
    return;
  }

  if (f_reflect < simplex.value(worst)) {
    // Outside contraction, between centroid and the reflected point.
    const Eigen::VectorXd x_out =
        opt.bounds.clamp(centroid + opt.contraction * opt.reflection * direction);
    const double f_out = eval(simplex, x_out);
    if (f_out <= f_reflect) {
      simplex.set_vertex(worst, x_out, f_out);
      return;
    }
  } else {
    const Eigen::VectorXd x_in = opt.bounds.clamp(centroid - opt.contraction * direction);
    const double f_in = eval(simplex, x_in);
    if (f_in < simplex.value(worst)) {
      simplex.set_vertex(worst, x_in, f_in);
      return;
    }
  }

  // Shrink everything toward the best vertex.
  const Eigen::VectorXd x_best = simplex.vertex(best);
  for (int i : order) {
    if (i == best) continue;
    const Eigen::VectorXd x =
        opt.bounds.clamp(x_best + opt.shrink * (simplex.vertex(i) - x_best));
    const double f = eval(simplex, x);
    simplex.set_vertex(i, x, f);
  }
}

/// Restores lost simplex volume. Clamping can pin every vertex into one
/// bounding face (an affine subspace no Nelder-Mead move ever leaves), and
/// flat objectives collapse the simplex along their level sets; both show up
/// as a thin smallest singular direction. The worst vertex is moved off the
/// degenerate hyperplane along that direction, towards the feasible interior.
/// Returns true if a repair evaluation was spent.
bool repair_degeneracy(Simplex& simplex, Evaluator& eval,
                       const NelderMeadOptions& opt) {
  const double diameter = simplex.diameter();
  if (diameter <= 0.0) return false;
  const int best = simplex.best_index();

  // A needle-shaped simplex tracking a curved valley is healthy; a simplex
  // whose vertices share an exact hyperplane (clamped onto a bound face, or
  // fully contracted along a flat direction) is not, and shows up as an
  // essentially zero singular value.
  Eigen::MatrixXd edges(simplex.dimension(), simplex.dimension());
  int col = 0;
  for (int i = 0; i < simplex.count(); ++i) {
    if (i == best) continue;
    edges.col(col++) = simplex.vertex(i) - simplex.vertex(best);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(edges, Eigen::ComputeFullU);
  if (svd.singularValues().minCoeff() >= 1e-6 * diameter) return false;

  const Eigen::VectorXd direction = svd.matrixU().col(simplex.dimension() - 1);
  const double h = 0.5 * diameter;
  const Eigen::VectorXd base = simplex.vertex(best);
  Eigen::VectorXd candidate = opt.bounds.clamp(base + h * direction);
  const Eigen::VectorXd mirrored = opt.bounds.clamp(base - h * direction);
  if ((mirrored - base).norm() > (candidate - base).norm()) candidate = mirrored;
  if ((candidate - base).norm() < 1e-12 * std::max(1.0, h)) return false;

  const double value = eval(simplex, candidate);
  simplex.set_vertex(simplex.worst_index(), candidate, value);
  return true;
}

OptimizeResult run_loop(const ObjectiveFn& objective, const Eigen::VectorXd& x0,
                        const NelderMeadOptions& options, bool tracking) {
  options.validate();
  if (options.bounds.active() && options.bounds.lower.size() != x0.size())
    throw std::invalid_argument("minimize: bounds dimension != x0 dimension");

  OptimizeResult result;
  Evaluator eval(objective, options, result.trace);
  Simplex simplex =
      Simplex::initial(options.bounds.clamp(x0), options.initial_scale, options.bounds);

  int stable_since = -1;
  int last_repair = -1;
  try {
    for (;;) {
      step_in_place(simplex, eval, options);

      if (!tracking && options.convergence_diameter > 0.0) {
        const double noise_scale = 2.0 * std::sqrt(std::max(simplex.best_value(), 1.0));
        const bool stable = simplex.diameter() < options.convergence_diameter &&
                            simplex.value_spread() < noise_scale;
        if (!stable) {
          stable_since = -1;
        } else {
          if (stable_since < 0) stable_since = eval.count();
          if (eval.count() - stable_since >= options.convergence_window) {
            result.converged = true;
            break;
          }
        }
      }

      // Noise collapses the simplex long before the landscape is resolved: a
      // run of unlucky draws shrinks it below the scale where count
      // differences rise above shot noise, after which ordering is random
      // and shrinks dominate. Re-inflating restores signal; the incumbent
      // vertex is kept but every value is re-measured, since a cached value
      // may be a lucky draw (or, under drift, describe a minimum that moved).
      if (options.collapse_diameter > 0.0 &&
          simplex.diameter() < options.collapse_diameter) {
        result.reinflation_indices.push_back(eval.count());
        simplex = Simplex::initial(simplex.vertex(simplex.best_index()),
                                   options.initial_scale / 4.0, options.bounds);
        continue;  // vertices get measured at the top of the next step
      }

      // Cooldown: at a bound-constrained optimum the injected vertex keeps
      // getting contracted back onto the face; repairing every iteration
      // would only burn budget there.
      if (last_repair < 0 ||
          eval.count() - last_repair >= 2 * (simplex.dimension() + 1)) {
        if (repair_degeneracy(simplex, eval, options)) {
          last_repair = eval.count();
          result.reinflation_indices.push_back(eval.count());
        }
      }

      if (options.revaluation_interval > 0) {
        // minimize: keep the incumbent honest so a lucky low draw cannot pin
        // a false minimum. track: additionally refresh the oldest stale
        // vertex, since a moving objective invalidates every cached value.
        int refresh = simplex.best_index();
        if (tracking) {
          for (int i = 0; i < simplex.count(); ++i)
            if (simplex.age(i) > simplex.age(refresh)) refresh = i;
        }
        if (simplex.age(refresh) >= options.revaluation_interval &&
            measured(simplex.value(refresh))) {
          const double fresh = eval(simplex, simplex.vertex(refresh));
          simplex.set_value(refresh, fresh);
        }
      }
    }
  } catch (const BudgetExhausted&) {
    // Out of budget mid-iteration; report the simplex as it stood.
  }

  const int best = simplex.best_index();
  result.best_x = simplex.vertex(best);
  result.best_value = simplex.value(best);
  result.evaluations = eval.count();
  if (!measured(result.best_value)) {
    // Budget too small to measure the initial simplex; fall back to the
    // best recorded evaluation.
    for (const auto& rec : result.trace) {
      if (!measured(result.best_value) || rec.value < result.best_value) {
        result.best_x = rec.x;
        result.best_value = rec.value;
      }
    }
  }
  return result;
}

}  // namespace

Simplex step(Simplex simplex, const ObjectiveFn& objective,
             const NelderMeadOptions& options, std::vector<EvaluationRecord>& trace) {
  options.validate();
  Evaluator eval(objective, options, trace);
  try {
    step_in_place(simplex, eval, options);
  } catch (const BudgetExhausted&) {
    // max_evaluations reached mid-iteration; the simplex is returned as it
    // stood after the last completed measurement.
  }
  return simplex;
}

OptimizeResult minimize(const ObjectiveFn& objective, const Eigen::VectorXd& x0,
                        const NelderMeadOptions& options) {
  return run_loop(objective, x0, options, /*tracking=*/false);
}

OptimizeResult track(const ObjectiveFn& objective, const Eigen::VectorXd& x0,
                     const NelderMeadOptions& options) {
  return run_loop(objective, x0, options, /*tracking=*/true);
}

}  // namespace polalign
