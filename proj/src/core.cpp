#include "mfg/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mfg {

const char* to_string(Criterion criterion) {
  return criterion == Criterion::discounted ? "discounted" : "average";
}

Criterion parse_criterion(const std::string& text) {
  if (text == "discounted") return Criterion::discounted;
  if (text == "average") return Criterion::average;
  throw ConfigError("unknown criterion '" + text + "' (expected discounted|average)");
}

StateSpace::StateSpace(std::size_t size) : size_(size) {
  if (size == 0) throw ConfigError("state space must have at least one state");
}

ActionSpace::ActionSpace(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.empty()) throw ConfigError("action space must have dimension >= 1");
  if (lower_.size() != upper_.size())
    throw DimensionError("action box bounds have different lengths");
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (!(std::isfinite(lower_[i]) && std::isfinite(upper_[i]) && lower_[i] < upper_[i]))
      throw ConfigError("action box requires finite lower[i] < upper[i]");
  }
}

double ActionSpace::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < dim(); ++i) v *= upper_[i] - lower_[i];
  return v;
}

bool ActionSpace::contains(std::span<const double> a, double tol) const {
  if (a.size() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (!(a[i] >= lower_[i] - tol && a[i] <= upper_[i] + tol)) return false;
  }
  return true;
}

Action ActionSpace::project(std::span<const double> a) const {
  if (a.size() != dim()) throw DimensionError("action has wrong dimension");
  Action out(a.begin(), a.end());
  for (std::size_t i = 0; i < dim(); ++i) out[i] = std::clamp(out[i], lower_[i], upper_[i]);
  return out;
}

Action ActionSpace::sample_uniform(Rng& rng) const {
  Action a(dim());
  for (std::size_t i = 0; i < dim(); ++i) a[i] = rng.uniform(lower_[i], upper_[i]);
  return a;
}

double action_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("action dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

StateMeasure::StateMeasure(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw InvalidMeasure("measure over an empty state space");
  double total = 0.0;
  for (double& p : probs_) {
    if (!std::isfinite(p) || p < -kNormalizationTolerance)
      throw InvalidMeasure("measure entry is negative or not finite");
    p = std::max(p, 0.0);
    total += p;
  }
  const double drift = std::abs(total - 1.0);
  if (drift > kRenormalizeLimit)
    throw InvalidMeasure("measure mass " + std::to_string(total) + " is not 1");
  if (drift > 0.0) {
    for (double& p : probs_) p /= total;
  }
}

StateMeasure StateMeasure::dirac(std::size_t n, State x) {
  if (x >= n) throw DimensionError("dirac state out of range");
  std::vector<double> p(n, 0.0);
  p[x] = 1.0;
  return StateMeasure(std::move(p));
}

StateMeasure StateMeasure::uniform(std::size_t n) {
  return StateMeasure(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double l1_distance(const StateMeasure& mu, const StateMeasure& nu) {
  if (mu.size() != nu.size()) throw DimensionError("measures live on different state spaces");
  double d = 0.0;
  for (std::size_t x = 0; x < mu.size(); ++x) d += std::abs(mu[x] - nu[x]);
  return d;
}

double span_seminorm(std::span<const double> v) {
  if (v.empty()) throw DimensionError("span of an empty vector");
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

double kernel_contraction_coefficient(std::span<const StateMeasure> rows) {
  if (rows.empty()) throw DimensionError("empty kernel");
  double worst = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j)
      worst = std::max(worst, l1_distance(rows[i], rows[j]));
  }
  return 0.5 * worst;
}

double kernel_contraction_coefficient(const std::vector<std::vector<double>>& rows) {
  std::vector<StateMeasure> measures;
  measures.reserve(rows.size());
  for (const auto& r : rows) measures.emplace_back(r);
  return kernel_contraction_coefficient(std::span<const StateMeasure>(measures));
}

StateMeasure push_forward(const StateMeasure& mu, std::span<const StateMeasure> rows) {
  if (rows.size() != mu.size()) throw DimensionError("kernel has wrong number of rows");
  std::vector<double> out(mu.size(), 0.0);
  for (std::size_t x = 0; x < mu.size(); ++x) {
    if (rows[x].size() != mu.size()) throw DimensionError("kernel row has wrong length");
    for (std::size_t y = 0; y < mu.size(); ++y) out[y] += mu[x] * rows[x][y];
  }
  return StateMeasure(std::move(out));
}

DeterministicPolicy::DeterministicPolicy(const ActionSpace& actions, std::vector<Action> per_state)
    : actions_(std::move(per_state)) {
  if (actions_.empty()) throw ConfigError("policy must cover at least one state");
  for (const Action& a : actions_) {
    if (!actions.contains(a)) throw ConfigError("policy action lies outside the action box");
  }
}

double policy_distance(const DeterministicPolicy& a, const DeterministicPolicy& b) {
  if (a.num_states() != b.num_states()) throw DimensionError("policies over different state spaces");
  double d = 0.0;
  for (std::size_t x = 0; x < a.num_states(); ++x)
    d = std::max(d, action_distance(a.action(x), b.action(x)));
  return d;
}

State MFGModel::sample_next(State x, std::span<const double> a, const StateMeasure& mu,
                            Rng& rng) const {
  const std::vector<double> row = transition_probs(x, a, mu);
  return rng.categorical(row);
}

namespace {

constexpr double kFiniteDifferenceStep = 1e-6;

// Central difference along axis i, falling back to one-sided at the faces.
template <typename Eval>
void finite_difference(const ActionSpace& box, std::span<const double> a, std::size_t i,
                       Eval&& eval) {
  Action plus(a.begin(), a.end());
  Action minus(a.begin(), a.end());
  plus[i] = std::min(a[i] + kFiniteDifferenceStep, box.upper(i));
  minus[i] = std::max(a[i] - kFiniteDifferenceStep, box.lower(i));
  eval(plus, minus, plus[i] - minus[i]);
}

}  // namespace

void MFGModel::cost_gradient(State x, std::span<const double> a, const StateMeasure& mu,
                             std::span<double> out) const {
  for (std::size_t i = 0; i < actions().dim(); ++i) {
    finite_difference(actions(), a, i, [&](const Action& plus, const Action& minus, double h) {
      out[i] = (cost(x, plus, mu) - cost(x, minus, mu)) / h;
    });
  }
}

std::vector<std::vector<double>> MFGModel::transition_jacobian(State x, std::span<const double> a,
                                                               const StateMeasure& mu) const {
  const std::size_t n = states().size();
  std::vector<std::vector<double>> jac(n, std::vector<double>(actions().dim(), 0.0));
  for (std::size_t i = 0; i < actions().dim(); ++i) {
    finite_difference(actions(), a, i, [&](const Action& plus, const Action& minus, double h) {
      const auto hi = transition_probs(x, plus, mu);
      const auto lo = transition_probs(x, minus, mu);
      for (std::size_t y = 0; y < n; ++y) jac[y][i] = (hi[y] - lo[y]) / h;
    });
  }
  return jac;
}

}  // namespace mfg
