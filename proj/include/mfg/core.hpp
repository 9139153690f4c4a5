#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfg/random.hpp"

namespace mfg {

using State = std::size_t;
/// A point of the action box; length equals ActionSpace::dim().
using Action = std::vector<double>;

enum class Criterion { discounted, average };

const char* to_string(Criterion criterion);
Criterion parse_criterion(const std::string& text);

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user configuration or degenerate input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidMeasure : public Error {
 public:
  using Error::Error;
};

/// Base of all numerical failures (divergence, singular fits, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public NumericalError {
 public:
  NonConvergenceError(const std::string& what, double last_residual)
      : NumericalError(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

class NonContractionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularFitError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class MinorizationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Spaces

/// Finite state space {0, ..., size-1} with the discrete metric.
class StateSpace {
 public:
  explicit StateSpace(std::size_t size);

  std::size_t size() const { return size_; }
  static double distance(State x, State y) { return x == y ? 0.0 : 1.0; }

  bool operator==(const StateSpace&) const = default;

 private:
  std::size_t size_;
};

/// Axis-aligned box [lower, upper] in R^dim.
class ActionSpace {
 public:
  ActionSpace(std::vector<double> lower, std::vector<double> upper);
  static ActionSpace interval(double lo, double hi) { return ActionSpace({lo}, {hi}); }

  std::size_t dim() const { return lower_.size(); }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  double lower(std::size_t i) const { return lower_[i]; }
  double upper(std::size_t i) const { return upper_[i]; }

  /// Lebesgue measure m(A).
  double volume() const;
  bool contains(std::span<const double> a, double tol = 0.0) const;
  Action project(std::span<const double> a) const;
  /// Uniform draw on the box.
  Action sample_uniform(Rng& rng) const;

  bool operator==(const ActionSpace&) const = default;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

/// Euclidean distance between two action points.
double action_distance(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// Measures

/// Probability vector over a finite state space.
///
/// Construction enforces the simplex: entries below -1e-12 or a total mass
/// more than 1e-9 away from one are rejected; smaller drift is renormalized
/// so that the stored mass is within 1e-12 of one.
class StateMeasure {
 public:
  static constexpr double kNormalizationTolerance = 1e-12;
  static constexpr double kRenormalizeLimit = 1e-9;

  explicit StateMeasure(std::vector<double> probs);

  static StateMeasure dirac(std::size_t n, State x);
  static StateMeasure uniform(std::size_t n);

  std::size_t size() const { return probs_.size(); }
  double operator[](State x) const { return probs_[x]; }
  std::span<const double> probs() const { return probs_; }

  bool operator==(const StateMeasure&) const = default;

 private:
  std::vector<double> probs_;
};

/// Sum over states of |mu(x) - nu(x)|; lies in [0, 2].
double l1_distance(const StateMeasure& mu, const StateMeasure& nu);

/// max(v) - min(v).
double span_seminorm(std::span<const double> v);

double sup_norm(std::span<const double> v);

/// (1/2) max_{x,z} || P(.|x) - P(.|z) ||_1 for a row-stochastic matrix.
double kernel_contraction_coefficient(std::span<const StateMeasure> rows);
double kernel_contraction_coefficient(const std::vector<std::vector<double>>& rows);

/// mu P for a row-stochastic matrix given as one measure per state.
StateMeasure push_forward(const StateMeasure& mu, std::span<const StateMeasure> rows);

// ---------------------------------------------------------------------------
// Policies

/// One action per state, each inside the action box.
class DeterministicPolicy {
 public:
  DeterministicPolicy(const ActionSpace& actions, std::vector<Action> per_state);

  std::size_t num_states() const { return actions_.size(); }
  const Action& action(State x) const { return actions_[x]; }
  const std::vector<Action>& actions() const { return actions_; }

  bool operator==(const DeterministicPolicy&) const = default;

 private:
  std::vector<Action> actions_;
};

/// sup_x || pi(x) - pi'(x) ||.
double policy_distance(const DeterministicPolicy& a, const DeterministicPolicy& b);

// ---------------------------------------------------------------------------
// Models

/// Simulator access: what a model-free learner is allowed to see.
class MFGSampler {
 public:
  virtual ~MFGSampler() = default;

  virtual const StateSpace& states() const = 0;
  virtual const ActionSpace& actions() const = 0;
  virtual double cost(State x, std::span<const double> a, const StateMeasure& mu) const = 0;
  virtual State sample_next(State x, std::span<const double> a, const StateMeasure& mu,
                            Rng& rng) const = 0;
  /// c_m = sup |c|.
  virtual double cost_bound() const = 0;
};

/// Full model: kernel p(.|x,a,mu) and one-stage cost c(x,a,mu).
class MFGModel : public MFGSampler {
 public:
  virtual std::string name() const = 0;

  /// Raw kernel row; entries sum to one up to rounding.
  virtual std::vector<double> transition_probs(State x, std::span<const double> a,
                                               const StateMeasure& mu) const = 0;

  StateMeasure transition(State x, std::span<const double> a, const StateMeasure& mu) const {
    return StateMeasure(transition_probs(x, a, mu));
  }

  /// Inverse-CDF draw from transition_probs: exactly one uniform per call.
  State sample_next(State x, std::span<const double> a, const StateMeasure& mu,
                    Rng& rng) const override;

  /// Sub-probability lambda with p(.|x,a,mu) >= lambda, if the model knows one.
  virtual std::optional<std::vector<double>> minorization() const { return std::nullopt; }

  /// Gradient of c in a. Default: central differences (step 1e-6, one-sided
  /// at the box faces).
  virtual void cost_gradient(State x, std::span<const double> a, const StateMeasure& mu,
                             std::span<double> out) const;

  /// jac[y][i] = d p(y|x,a,mu) / d a_i. Default: central differences.
  virtual std::vector<std::vector<double>> transition_jacobian(State x, std::span<const double> a,
                                                               const StateMeasure& mu) const;
};

}  // namespace mfg
