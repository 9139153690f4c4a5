#pragma once

#include <functional>
#include <span>
#include <vector>

#include "mfg/core.hpp"

namespace mfg {

/// Controls the coarse-grid + local-refinement minimization over the action box.
struct MinimizerOptions {
  /// Grid nodes per axis for the global stage (>= 2).
  std::size_t grid_points = 65;
  /// Width (per axis) at which the local stage stops.
  double action_tolerance = 1e-13;
  std::size_t max_iterations = 400;
};

struct ActionMinimum {
  Action action;
  double value = 0.0;
};

/// Real-valued function on X x A.
///
/// Concrete representations: BasisQFunction (regression output),
/// GridQFunction (tabulated, piecewise multilinear), BackupQFunction (exact
/// Bellman backup of a value vector) and LambdaQFunction (closures; tests).
class QFunction {
 public:
  QFunction(StateSpace states, ActionSpace actions, MinimizerOptions options = {});
  virtual ~QFunction() = default;

  const StateSpace& states() const { return states_; }
  const ActionSpace& actions() const { return actions_; }
  std::size_t num_states() const { return states_.size(); }
  const MinimizerOptions& minimizer_options() const { return options_; }

  virtual double value(State x, std::span<const double> a) const = 0;

  /// True when gradient() is exact rather than a finite difference.
  virtual bool has_gradient() const { return false; }
  /// Gradient in a. Default: central differences.
  virtual void gradient(State x, std::span<const double> a, std::span<double> out) const;

  /// Minimum of Q(x, .) over the box. Default: grid scan, then derivative
  /// bisection (1-D; central differences when there is no analytic gradient) or
  /// projected gradient descent (dim > 1). Ties go to the lexicographically
  /// smallest grid node.
  virtual ActionMinimum minimize(State x) const;

 private:
  StateSpace states_;
  ActionSpace actions_;
  MinimizerOptions options_;
};

/// Generic box minimizer behind QFunction::minimize.
ActionMinimum minimize_over_box(
    const ActionSpace& box, const std::function<double(std::span<const double>)>& f,
    const std::function<void(std::span<const double>, std::span<double>)>* gradient,
    const MinimizerOptions& options);

double q_min(const QFunction& q, State x);
Action q_argmin(const QFunction& q, State x);
/// (q_min(q, 0), ..., q_min(q, |X|-1)).
std::vector<double> q_min_vector(const QFunction& q);
DeterministicPolicy greedy_policy(const QFunction& q);

/// Nodes of the tensor grid with `points_per_axis` nodes on each axis, in
/// lexicographic order (first axis most significant).
std::vector<Action> action_grid(const ActionSpace& box, std::size_t points_per_axis);

/// sup over states and grid actions of |q1 - q2|.
double sup_distance(const QFunction& q1, const QFunction& q2, std::size_t points_per_axis);
/// span over states and grid actions of (q1 - q2).
double span_distance(const QFunction& q1, const QFunction& q2, std::size_t points_per_axis);

/// QFunction backed by a closure.
class LambdaQFunction final : public QFunction {
 public:
  using ValueFn = std::function<double(State, std::span<const double>)>;
  using GradientFn = std::function<void(State, std::span<const double>, std::span<double>)>;

  LambdaQFunction(StateSpace states, ActionSpace actions, ValueFn value,
                  GradientFn gradient = nullptr, MinimizerOptions options = {});

  double value(State x, std::span<const double> a) const override { return value_(x, a); }
  bool has_gradient() const override { return static_cast<bool>(gradient_); }
  void gradient(State x, std::span<const double> a, std::span<double> out) const override;

 private:
  ValueFn value_;
  GradientFn gradient_;
};

/// Q tabulated on a tensor action grid with multilinear interpolation.
/// Minimization is an exact scan over nodes (the interpolant attains its
/// minimum at a node).
class GridQFunction final : public QFunction {
 public:
  /// `values[x]` holds one entry per node of action_grid(actions, points_per_axis).
  GridQFunction(StateSpace states, ActionSpace actions, std::size_t points_per_axis,
                std::vector<std::vector<double>> values);

  static GridQFunction tabulate(const QFunction& q, std::size_t points_per_axis);

  std::size_t points_per_axis() const { return points_; }
  const std::vector<std::vector<double>>& table() const { return values_; }

  double value(State x, std::span<const double> a) const override;
  ActionMinimum minimize(State x) const override;

 private:
  std::size_t points_;
  std::vector<std::vector<double>> values_;
};

}  // namespace mfg
