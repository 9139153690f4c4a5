#include "mfg/qfunction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mfg {

namespace {

double grid_coordinate(double lo, double hi, std::size_t j, std::size_t n) {
  if (j + 1 == n) return hi;
  return lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n - 1);
}

std::size_t checked_grid_size(std::size_t points, std::size_t dim) {
  if (points < 2) throw ConfigError("action grid needs at least 2 points per axis");
  std::size_t total = 1;
  for (std::size_t i = 0; i < dim; ++i) {
    if (total > std::numeric_limits<std::size_t>::max() / points)
      throw ConfigError("action grid too large");
    total *= points;
  }
  return total;
}

// Bisection on the sign of f' in [lo, hi]; assumes f is convex there.
double derivative_bisection(const std::function<double(double)>& derivative, double lo, double hi,
                            const MinimizerOptions& options) {
  if (derivative(lo) >= 0.0) return lo;
  if (derivative(hi) <= 0.0) return hi;
  for (std::size_t it = 0; it < options.max_iterations && hi - lo > options.action_tolerance; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (derivative(mid) > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

ActionMinimum projected_gradient(
    const ActionSpace& box, const std::function<double(std::span<const double>)>& f,
    const std::function<void(std::span<const double>, std::span<double>)>& gradient,
    ActionMinimum start, const MinimizerOptions& options) {
  const std::size_t dim = box.dim();
  double step = 0.0;
  for (std::size_t i = 0; i < dim; ++i) step = std::max(step, box.upper(i) - box.lower(i));
  step *= 0.1;

  ActionMinimum best = std::move(start);
  std::vector<double> grad(dim);
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    gradient(best.action, grad);
    Action trial(dim);
    for (std::size_t i = 0; i < dim; ++i) trial[i] = best.action[i] - step * grad[i];
    trial = box.project(trial);
    const double moved = action_distance(trial, best.action);
    if (moved <= options.action_tolerance) break;
    const double ft = f(trial);
    if (ft < best.value) {
      best.action = std::move(trial);
      best.value = ft;
      step *= 1.5;
    } else {
      step *= 0.5;
      if (step < 1e-18) break;
    }
  }
  return best;
}

}  // namespace

ActionMinimum minimize_over_box(
    const ActionSpace& box, const std::function<double(std::span<const double>)>& f,
    const std::function<void(std::span<const double>, std::span<double>)>* gradient,
    const MinimizerOptions& options) {
  const std::size_t n = options.grid_points;
  const std::size_t dim = box.dim();
  checked_grid_size(n, dim);

  // Global stage: lexicographic scan, strict improvement keeps the first node.
  std::vector<std::size_t> index(dim, 0);
  Action node(dim);
  ActionMinimum best{Action(dim), std::numeric_limits<double>::infinity()};
  std::vector<std::size_t> best_index(dim, 0);
  while (true) {
    for (std::size_t i = 0; i < dim; ++i)
      node[i] = grid_coordinate(box.lower(i), box.upper(i), index[i], n);
    const double v = f(node);
    if (v < best.value) {
      best.value = v;
      best.action = node;
      best_index = index;
    }
    std::size_t axis = dim;
    while (axis > 0) {
      --axis;
      if (++index[axis] < n) break;
      index[axis] = 0;
      if (axis == 0) {
        axis = dim + 1;
        break;
      }
    }
    if (axis == dim + 1) break;
  }
  if (!std::isfinite(best.value)) return best;

  // Local stage.
  ActionMinimum refined = best;
  if (dim == 1) {
    const std::size_t k = best_index[0];
    const double lo = grid_coordinate(box.lower(0), box.upper(0), k == 0 ? 0 : k - 1, n);
    const double hi = grid_coordinate(box.lower(0), box.upper(0), std::min(k + 1, n - 1), n);
    double a = 0.0;
    if (gradient != nullptr) {
      std::vector<double> g(1);
      auto derivative = [&](double t) {
        const double point[1] = {t};
        (*gradient)(point, g);
        return g[0];
      };
      a = derivative_bisection(derivative, lo, hi, options);
    } else {
      // Central differences are exact for quadratic sections up to rounding,
      // which golden section (value comparisons only) cannot match.
      auto derivative = [&](double t) {
        const double h = std::min({1e-4, t - box.lower(0), box.upper(0) - t});
        const double l = h > 0.0 ? t - h : std::max(t - 1e-4, box.lower(0));
        const double r = h > 0.0 ? t + h : std::min(t + 1e-4, box.upper(0));
        const double pl[1] = {l};
        const double pr[1] = {r};
        return (f(pr) - f(pl)) / (r - l);
      };
      a = derivative_bisection(derivative, lo, hi, options);
    }
    refined.action = {a};
    refined.value = f(refined.action);
  } else {
    std::function<void(std::span<const double>, std::span<double>)> grad_fn;
    if (gradient != nullptr) {
      grad_fn = *gradient;
    } else {
      grad_fn = [&](std::span<const double> a, std::span<double> out) {
        const double h = 1e-7;
        for (std::size_t i = 0; i < dim; ++i) {
          Action plus(a.begin(), a.end());
          Action minus(a.begin(), a.end());
          plus[i] = std::min(a[i] + h, box.upper(i));
          minus[i] = std::max(a[i] - h, box.lower(i));
          out[i] = (f(plus) - f(minus)) / (plus[i] - minus[i]);
        }
      };
    }
    refined = projected_gradient(box, f, grad_fn, best, options);
  }
  return refined.value <= best.value ? refined : best;
}

QFunction::QFunction(StateSpace states, ActionSpace actions, MinimizerOptions options)
    : states_(states), actions_(std::move(actions)), options_(options) {}

void QFunction::gradient(State x, std::span<const double> a, std::span<double> out) const {
  const double h = 1e-7;
  for (std::size_t i = 0; i < actions_.dim(); ++i) {
    Action plus(a.begin(), a.end());
    Action minus(a.begin(), a.end());
    plus[i] = std::min(a[i] + h, actions_.upper(i));
    minus[i] = std::max(a[i] - h, actions_.lower(i));
    out[i] = (value(x, plus) - value(x, minus)) / (plus[i] - minus[i]);
  }
}

ActionMinimum QFunction::minimize(State x) const {
  if (x >= num_states()) throw DimensionError("state out of range");
  auto f = [&](std::span<const double> a) { return value(x, a); };
  if (has_gradient()) {
    std::function<void(std::span<const double>, std::span<double>)> g =
        [&](std::span<const double> a, std::span<double> out) { gradient(x, a, out); };
    return minimize_over_box(actions_, f, &g, options_);
  }
  return minimize_over_box(actions_, f, nullptr, options_);
}

double q_min(const QFunction& q, State x) { return q.minimize(x).value; }

Action q_argmin(const QFunction& q, State x) { return q.minimize(x).action; }

std::vector<double> q_min_vector(const QFunction& q) {
  std::vector<double> v(q.num_states());
  for (State x = 0; x < q.num_states(); ++x) v[x] = q_min(q, x);
  return v;
}

DeterministicPolicy greedy_policy(const QFunction& q) {
  std::vector<Action> actions(q.num_states());
  for (State x = 0; x < q.num_states(); ++x) actions[x] = q_argmin(q, x);
  return DeterministicPolicy(q.actions(), std::move(actions));
}

std::vector<Action> action_grid(const ActionSpace& box, std::size_t points_per_axis) {
  const std::size_t dim = box.dim();
  const std::size_t total = checked_grid_size(points_per_axis, dim);
  std::vector<Action> nodes;
  nodes.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    Action a(dim);
    std::size_t rest = flat;
    for (std::size_t i = dim; i-- > 0;) {
      a[i] = grid_coordinate(box.lower(i), box.upper(i), rest % points_per_axis, points_per_axis);
      rest /= points_per_axis;
    }
    nodes.push_back(std::move(a));
  }
  return nodes;
}

double sup_distance(const QFunction& q1, const QFunction& q2, std::size_t points_per_axis) {
  if (q1.num_states() != q2.num_states()) throw DimensionError("Q-functions over different spaces");
  const auto nodes = action_grid(q1.actions(), points_per_axis);
  double d = 0.0;
  for (State x = 0; x < q1.num_states(); ++x) {
    for (const Action& a : nodes) d = std::max(d, std::abs(q1.value(x, a) - q2.value(x, a)));
  }
  return d;
}

double span_distance(const QFunction& q1, const QFunction& q2, std::size_t points_per_axis) {
  if (q1.num_states() != q2.num_states()) throw DimensionError("Q-functions over different spaces");
  const auto nodes = action_grid(q1.actions(), points_per_axis);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (State x = 0; x < q1.num_states(); ++x) {
    for (const Action& a : nodes) {
      const double d = q1.value(x, a) - q2.value(x, a);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  return hi - lo;
}

LambdaQFunction::LambdaQFunction(StateSpace states, ActionSpace actions, ValueFn value,
                                 GradientFn gradient, MinimizerOptions options)
    : QFunction(states, std::move(actions), options),
      value_(std::move(value)),
      gradient_(std::move(gradient)) {}

void LambdaQFunction::gradient(State x, std::span<const double> a, std::span<double> out) const {
  if (gradient_)
    gradient_(x, a, out);
  else
    QFunction::gradient(x, a, out);
}

GridQFunction::GridQFunction(StateSpace states, ActionSpace actions, std::size_t points_per_axis,
                             std::vector<std::vector<double>> values)
    : QFunction(states, std::move(actions)), points_(points_per_axis), values_(std::move(values)) {
  const std::size_t total = checked_grid_size(points_, this->actions().dim());
  if (values_.size() != states.size()) throw DimensionError("grid table has wrong number of states");
  for (const auto& row : values_) {
    if (row.size() != total) throw DimensionError("grid table row has wrong number of nodes");
  }
}

GridQFunction GridQFunction::tabulate(const QFunction& q, std::size_t points_per_axis) {
  const auto nodes = action_grid(q.actions(), points_per_axis);
  std::vector<std::vector<double>> values(q.num_states(), std::vector<double>(nodes.size()));
  for (State x = 0; x < q.num_states(); ++x) {
    for (std::size_t j = 0; j < nodes.size(); ++j) values[x][j] = q.value(x, nodes[j]);
  }
  return GridQFunction(q.states(), q.actions(), points_per_axis, std::move(values));
}

double GridQFunction::value(State x, std::span<const double> a) const {
  const ActionSpace& box = actions();
  const std::size_t dim = box.dim();
  if (a.size() != dim) throw DimensionError("action has wrong dimension");
  std::vector<std::size_t> base(dim);
  std::vector<double> frac(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const double t = (std::clamp(a[i], box.lower(i), box.upper(i)) - box.lower(i)) /
                     (box.upper(i) - box.lower(i)) * static_cast<double>(points_ - 1);
    base[i] = std::min(static_cast<std::size_t>(t), points_ - 2);
    frac[i] = t - static_cast<double>(base[i]);
  }
  const auto& row = values_[x];
  double result = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t{1} << dim); ++corner) {
    double weight = 1.0;
    std::size_t flat = 0;
    for (std::size_t i = 0; i < dim; ++i) {
      const bool up = (corner >> (dim - 1 - i)) & 1U;
      weight *= up ? frac[i] : 1.0 - frac[i];
      flat = flat * points_ + base[i] + (up ? 1 : 0);
    }
    if (weight != 0.0) result += weight * row[flat];
  }
  return result;
}

ActionMinimum GridQFunction::minimize(State x) const {
  const auto& row = values_.at(x);
  const auto it = std::min_element(row.begin(), row.end());
  const std::size_t flat = static_cast<std::size_t>(it - row.begin());
  const ActionSpace& box = actions();
  Action a(box.dim());
  std::size_t rest = flat;
  for (std::size_t i = box.dim(); i-- > 0;) {
    a[i] = grid_coordinate(box.lower(i), box.upper(i), rest % points_, points_);
    rest /= points_;
  }
  return {std::move(a), *it};
}

}  // namespace mfg
