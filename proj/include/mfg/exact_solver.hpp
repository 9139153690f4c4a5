#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "mfg/core.hpp"
#include "mfg/qfunction.hpp"

namespace mfg {

/// Q(x, a) = c(x, a, mu) + scale * sum_y v(y) (p(y|x,a,mu) - offset(y)).
///
/// This is the exact image of any Q-function under one of the Bellman
/// operators: v = q_min vector of the input, (scale, offset) = (beta, 0),
/// (1, lambda) or (1, 0). It is exact at every action, so minimization needs
/// no interpolation; the gradient comes from the model.
class BackupQFunction final : public QFunction {
 public:
  BackupQFunction(std::shared_ptr<const MFGModel> model, StateMeasure mu, std::vector<double> next_values,
                  double scale, std::vector<double> offset, MinimizerOptions options = {});

  const MFGModel& model() const { return *model_; }
  const StateMeasure& measure() const { return mu_; }
  const std::vector<double>& next_values() const { return values_; }
  double scale() const { return scale_; }
  const std::vector<double>& offset() const { return offset_; }

  double value(State x, std::span<const double> a) const override;
  bool has_gradient() const override { return true; }
  void gradient(State x, std::span<const double> a, std::span<double> out) const override;

 private:
  std::shared_ptr<const MFGModel> model_;
  StateMeasure mu_;
  std::vector<double> values_;
  double scale_;
  std::vector<double> offset_;
  double offset_term_;
};

struct SolverConfig {
  Criterion criterion = Criterion::discounted;
  double beta = 0.5;
  double q_iter_tol = 1e-12;
  std::size_t q_iter_max = 10000;
  double picard_tol = 1e-10;
  std::size_t picard_max = 1000;
  /// Grid nodes per axis for the global minimization stage and residual checks.
  std::size_t action_grid = 1025;
  /// Average criterion: explicit lambda; otherwise the model's or a computed one.
  std::optional<std::vector<double>> minorization;

  void validate() const;
  MinimizerOptions minimizer() const;
};

/// (H_mu Q)(x,a) = c + beta sum_y q_min(Q,y) p(y|x,a,mu).
BackupQFunction bellman_discounted(const QFunction& q, const StateMeasure& mu,
                                   std::shared_ptr<const MFGModel> model, double beta,
                                   MinimizerOptions options = {});

/// (H_mu^av Q)(x,a) = c + sum_y q_min(Q,y) (p(y|x,a,mu) - lambda(y)).
/// Checks p >= lambda at mu on a 65-point grid per axis; throws
/// MinorizationError on violation.
BackupQFunction bellman_average(const QFunction& q, const StateMeasure& mu,
                                std::shared_ptr<const MFGModel> model, const std::vector<double>& lambda,
                                MinimizerOptions options = {});

/// (R_mu Q)(x,a) = c + sum_y q_min(Q,y) p(y|x,a,mu): the undiscounted
/// operator, a span contraction with modulus 1 - lambda(X)/2.
BackupQFunction span_operator(const QFunction& q, const StateMeasure& mu,
                              std::shared_ptr<const MFGModel> model, MinimizerOptions options = {});

/// Contraction modulus of the Bellman operator selected by `config`.
double bellman_modulus(const SolverConfig& config, const std::vector<double>& lambda);

/// Optimal Q-function at a frozen mean field, by value iteration on the
/// minimum vector. `warm_start` seeds that vector.
BackupQFunction solve_q_star(const StateMeasure& mu, std::shared_ptr<const MFGModel> model,
                             const SolverConfig& config,
                             const std::optional<std::vector<double>>& warm_start = std::nullopt);

/// sum_x mu(x) p(.|x, argmin Q(x,.), mu).
StateMeasure next_measure(const StateMeasure& mu, const QFunction& q, const MFGModel& model);
StateMeasure next_measure(const StateMeasure& mu, const DeterministicPolicy& policy, const MFGModel& model);

/// sup over states and grid actions of |Q - T Q| for the operator in `config`.
double bellman_residual(const BackupQFunction& q, const StateMeasure& mu, std::shared_ptr<const MFGModel> model,
                        const SolverConfig& config, const std::vector<double>& lambda);

/// sup_x |h(x) + sum_y h(y) lambda(y) - min_a [c + sum_y h(y) p(y|x,a,mu)]|
/// with h = q_min(q_star, .).
double acoe_residual(const QFunction& q_star, const StateMeasure& mu, std::shared_ptr<const MFGModel> model,
                     const std::vector<double>& lambda, MinimizerOptions options = {});

/// sum_y q_min(q_star, y) lambda(y).
double optimal_average_cost(const QFunction& q_star, const std::vector<double>& lambda);

/// The model's minorization if it has one, otherwise the componentwise
/// minimum of p(y|x,a,mu) over the action grid, all states and the Dirac and
/// uniform measures, shrunk by 1e-9 and floored at zero. Throws
/// MinorizationError when the result has zero mass.
std::vector<double> effective_minorization(const MFGModel& model, std::size_t points_per_axis = 65);

/// Throws MinorizationError if p(y|x,a,mu) < lambda(y) anywhere on the
/// action grid for the given measures.
void verify_minorization(const MFGModel& model, const std::vector<double>& lambda,
                         std::span<const StateMeasure> measures, std::size_t points_per_axis = 65);

struct EquilibriumResult {
  Criterion criterion;
  StateMeasure mu_star;
  std::shared_ptr<const BackupQFunction> q_star;
  DeterministicPolicy policy;
  /// q_min(q_star, .): the value function (average: the relative value h).
  std::vector<double> values;
  double residual_measure = 0.0;
  double residual_bellman = 0.0;
  std::size_t iterations = 0;
  /// l1 step of each Picard iteration.
  std::vector<double> steps;
  /// steps[k+1] / steps[k].
  std::vector<double> contraction_estimates;
  /// Average criterion only.
  std::vector<double> lambda;
  std::optional<double> average_cost;
};

/// Picard iteration mu <- H(mu). Throws ConfigError for picard_max = 0,
/// NonContractionError when five consecutive ratios exceed one and the
/// step keeps growing, NonConvergenceError when picard_max is exhausted.
EquilibriumResult solve_mfe(const StateMeasure& mu0, std::shared_ptr<const MFGModel> model,
                            const SolverConfig& config);

/// Fixed point of mu <- sum_x mu(x) p(.|x, pi(x), mu) by repeated application.
StateMeasure policy_stationary_measure(const DeterministicPolicy& policy, const MFGModel& model,
                                       double tol = 1e-13, std::size_t max_iterations = 100000);

/// Exact discounted cost of a policy at a frozen mean field:
/// (I - beta P_pi)^{-1} c_pi.
std::vector<double> policy_value_discounted(const DeterministicPolicy& policy, const StateMeasure& mu,
                                            const MFGModel& model, double beta);

/// Long-run average cost of a policy at a frozen mean field: the invariant
/// law of P_pi paired with c_pi.
double policy_average_cost(const DeterministicPolicy& policy, const StateMeasure& mu, const MFGModel& model);

}  // namespace mfg
