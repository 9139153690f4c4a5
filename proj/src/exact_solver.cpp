#include "mfg/exact_solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace mfg {

BackupQFunction::BackupQFunction(std::shared_ptr<const MFGModel> model, StateMeasure mu,
                                 std::vector<double> next_values, double scale, std::vector<double> offset,
                                 MinimizerOptions options)
    : QFunction(model->states(), model->actions(), options),
      model_(std::move(model)),
      mu_(std::move(mu)),
      values_(std::move(next_values)),
      scale_(scale),
      offset_(std::move(offset)),
      offset_term_(0.0) {
  const std::size_t n = model_->states().size();
  if (mu_.size() != n || values_.size() != n || offset_.size() != n)
    throw DimensionError("backup Q-function inputs disagree with the state space");
  for (State y = 0; y < n; ++y) offset_term_ += values_[y] * offset_[y];
}

double BackupQFunction::value(State x, std::span<const double> a) const {
  const auto p = model_->transition_probs(x, a, mu_);
  double s = 0.0;
  for (std::size_t y = 0; y < p.size(); ++y) s += values_[y] * p[y];
  return model_->cost(x, a, mu_) + scale_ * (s - offset_term_);
}

void BackupQFunction::gradient(State x, std::span<const double> a, std::span<double> out) const {
  model_->cost_gradient(x, a, mu_, out);
  const auto jac = model_->transition_jacobian(x, a, mu_);
  for (std::size_t y = 0; y < jac.size(); ++y) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += scale_ * values_[y] * jac[y][i];
  }
}

void SolverConfig::validate() const {
  if (criterion == Criterion::discounted && !(beta > 0.0 && beta < 1.0))
    throw ConfigError("discount factor must lie in (0,1)");
  if (!(q_iter_tol > 0.0) || !(picard_tol > 0.0)) throw ConfigError("tolerances must be positive");
  if (q_iter_max == 0) throw ConfigError("q_iter_max = 0: no iterations");
  if (picard_max == 0) throw ConfigError("picard_max = 0: no iterations");
  if (action_grid < 2) throw ConfigError("action grid needs at least 2 points per axis");
}

MinimizerOptions SolverConfig::minimizer() const {
  MinimizerOptions options;
  options.grid_points = action_grid;
  return options;
}

namespace {

std::vector<double> zeros(std::size_t n) { return std::vector<double>(n, 0.0); }

double mass(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

void check_lambda_shape(const MFGModel& model, const std::vector<double>& lambda) {
  if (lambda.size() != model.states().size()) throw DimensionError("minorization has wrong length");
  const double m = mass(lambda);
  if (!(m > 0.0) || m > 1.0 + 1e-12) throw MinorizationError("minorization mass must lie in (0,1]");
  for (double l : lambda) {
    if (l < 0.0) throw MinorizationError("minorization entries must be >= 0");
  }
}

void check_measure(const MFGModel& model, const StateMeasure& mu) {
  if (mu.size() != model.states().size()) throw DimensionError("measure does not match the state space");
}

struct OperatorShape {
  double scale;
  std::vector<double> offset;
};

OperatorShape operator_shape(const SolverConfig& config, const std::vector<double>& lambda, std::size_t n) {
  if (config.criterion == Criterion::discounted) return {config.beta, zeros(n)};
  return {1.0, lambda};
}

}  // namespace

BackupQFunction bellman_discounted(const QFunction& q, const StateMeasure& mu,
                                   std::shared_ptr<const MFGModel> model, double beta, MinimizerOptions options) {
  if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("discount factor must lie in [0,1)");
  check_measure(*model, mu);
  const std::size_t n = model->states().size();
  return BackupQFunction(std::move(model), mu, q_min_vector(q), beta, zeros(n), options);
}

BackupQFunction bellman_average(const QFunction& q, const StateMeasure& mu,
                                std::shared_ptr<const MFGModel> model, const std::vector<double>& lambda,
                                MinimizerOptions options) {
  check_measure(*model, mu);
  check_lambda_shape(*model, lambda);
  verify_minorization(*model, lambda, std::span<const StateMeasure>(&mu, 1));
  return BackupQFunction(std::move(model), mu, q_min_vector(q), 1.0, lambda, options);
}

BackupQFunction span_operator(const QFunction& q, const StateMeasure& mu, std::shared_ptr<const MFGModel> model,
                              MinimizerOptions options) {
  check_measure(*model, mu);
  const std::size_t n = model->states().size();
  return BackupQFunction(std::move(model), mu, q_min_vector(q), 1.0, zeros(n), options);
}

double bellman_modulus(const SolverConfig& config, const std::vector<double>& lambda) {
  if (config.criterion == Criterion::discounted) return config.beta;
  return 1.0 - mass(lambda);
}

namespace {

BackupQFunction solve_q_star_with(const StateMeasure& mu, const std::shared_ptr<const MFGModel>& model,
                                  const SolverConfig& config, const std::vector<double>& lambda,
                                  const std::optional<std::vector<double>>& warm_start) {
  const std::size_t n = model->states().size();
  const OperatorShape shape = operator_shape(config, lambda, n);
  const double tau = bellman_modulus(config, lambda);
  std::vector<double> v = warm_start ? *warm_start : zeros(n);
  if (v.size() != n) throw DimensionError("warm start has wrong length");

  double step = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < config.q_iter_max; ++it) {
    BackupQFunction q(model, mu, v, shape.scale, shape.offset, config.minimizer());
    std::vector<double> next = q_min_vector(q);
    double diff = 0.0;
    for (State y = 0; y < n; ++y) diff = std::max(diff, std::abs(next[y] - v[y]));
    // sup |T^{k+1} Q - T^k Q| <= tau * sup |v_{k+1} - v_k|
    step = tau * diff;
    v = std::move(next);
    if (step < config.q_iter_tol) return BackupQFunction(model, mu, v, shape.scale, shape.offset, config.minimizer());
  }
  throw NonConvergenceError("Q iteration did not reach tolerance within q_iter_max", step);
}

}  // namespace

BackupQFunction solve_q_star(const StateMeasure& mu, std::shared_ptr<const MFGModel> model,
                             const SolverConfig& config, const std::optional<std::vector<double>>& warm_start) {
  config.validate();
  check_measure(*model, mu);
  std::vector<double> lambda;
  if (config.criterion == Criterion::average) {
    lambda = config.minorization ? *config.minorization : effective_minorization(*model);
    check_lambda_shape(*model, lambda);
  }
  return solve_q_star_with(mu, model, config, lambda, warm_start);
}

StateMeasure next_measure(const StateMeasure& mu, const DeterministicPolicy& policy, const MFGModel& model) {
  check_measure(model, mu);
  const std::size_t n = model.states().size();
  if (policy.num_states() != n) throw DimensionError("policy does not match the state space");
  std::vector<double> out(n, 0.0);
  for (State x = 0; x < n; ++x) {
    if (mu[x] == 0.0) continue;
    const auto p = model.transition_probs(x, policy.action(x), mu);
    for (State y = 0; y < n; ++y) out[y] += mu[x] * p[y];
  }
  return StateMeasure(std::move(out));
}

StateMeasure next_measure(const StateMeasure& mu, const QFunction& q, const MFGModel& model) {
  return next_measure(mu, greedy_policy(q), model);
}

double bellman_residual(const BackupQFunction& q, const StateMeasure& mu, std::shared_ptr<const MFGModel> model,
                        const SolverConfig& config, const std::vector<double>& lambda) {
  const std::size_t n = model->states().size();
  const OperatorShape shape = operator_shape(config, lambda, n);
  const BackupQFunction tq(model, mu, q_min_vector(q), shape.scale, shape.offset, config.minimizer());
  return sup_distance(q, tq, config.action_grid);
}

double acoe_residual(const QFunction& q_star, const StateMeasure& mu, std::shared_ptr<const MFGModel> model,
                     const std::vector<double>& lambda, MinimizerOptions options) {
  check_lambda_shape(*model, lambda);
  const std::size_t n = model->states().size();
  const std::vector<double> h = q_min_vector(q_star);
  double h_lambda = 0.0;
  for (State y = 0; y < n; ++y) h_lambda += h[y] * lambda[y];
  const BackupQFunction rhs(model, mu, h, 1.0, zeros(n), options);
  double worst = 0.0;
  for (State x = 0; x < n; ++x) worst = std::max(worst, std::abs(h[x] + h_lambda - q_min(rhs, x)));
  return worst;
}

double optimal_average_cost(const QFunction& q_star, const std::vector<double>& lambda) {
  if (lambda.size() != q_star.num_states()) throw DimensionError("minorization has wrong length");
  const std::vector<double> h = q_min_vector(q_star);
  double j = 0.0;
  for (State y = 0; y < h.size(); ++y) j += h[y] * lambda[y];
  return j;
}

void verify_minorization(const MFGModel& model, const std::vector<double>& lambda,
                         std::span<const StateMeasure> measures, std::size_t points_per_axis) {
  const std::size_t n = model.states().size();
  if (lambda.size() != n) throw DimensionError("minorization has wrong length");
  for (const Action& a : action_grid(model.actions(), points_per_axis)) {
    for (const StateMeasure& mu : measures) {
      for (State x = 0; x < n; ++x) {
        const auto p = model.transition_probs(x, a, mu);
        for (State y = 0; y < n; ++y) {
          if (p[y] < lambda[y])
            throw MinorizationError("p(" + std::to_string(y) + "|" + std::to_string(x) + ",a,mu) = " +
                                    std::to_string(p[y]) + " is below lambda = " + std::to_string(lambda[y]));
        }
      }
    }
  }
}

std::vector<double> effective_minorization(const MFGModel& model, std::size_t points_per_axis) {
  const std::size_t n = model.states().size();
  std::vector<StateMeasure> corners;
  for (State x = 0; x < n; ++x) corners.push_back(StateMeasure::dirac(n, x));
  corners.push_back(StateMeasure::uniform(n));

  if (auto given = model.minorization()) {
    check_lambda_shape(model, *given);
    verify_minorization(model, *given, corners, points_per_axis);
    return *given;
  }
  std::vector<double> lambda(n, std::numeric_limits<double>::infinity());
  for (const Action& a : action_grid(model.actions(), points_per_axis)) {
    for (const StateMeasure& mu : corners) {
      for (State x = 0; x < n; ++x) {
        const auto p = model.transition_probs(x, a, mu);
        for (State y = 0; y < n; ++y) lambda[y] = std::min(lambda[y], p[y]);
      }
    }
  }
  for (double& l : lambda) l = std::max(0.0, l - 1e-9);
  if (!(mass(lambda) > 0.0)) throw MinorizationError("kernel admits no minorizing measure (lambda(X) = 0)");
  return lambda;
}

EquilibriumResult solve_mfe(const StateMeasure& mu0, std::shared_ptr<const MFGModel> model,
                            const SolverConfig& config) {
  config.validate();
  check_measure(*model, mu0);
  const std::size_t n = model->states().size();

  std::vector<double> lambda;
  if (config.criterion == Criterion::average) {
    lambda = config.minorization ? *config.minorization : effective_minorization(*model);
    check_lambda_shape(*model, lambda);
    std::vector<StateMeasure> probes{mu0};
    for (State x = 0; x < n; ++x) probes.push_back(StateMeasure::dirac(n, x));
    verify_minorization(*model, lambda, probes);
  }

  StateMeasure mu = mu0;
  std::vector<double> warm(n, 0.0);
  std::vector<double> steps;
  std::vector<double> ratios;
  bool converged = false;
  std::size_t iterations = 0;

  for (std::size_t k = 0; k < config.picard_max; ++k) {
    const BackupQFunction q = solve_q_star_with(mu, model, config, lambda, warm);
    warm = q.next_values();
    StateMeasure next = next_measure(mu, q, *model);
    const double step = l1_distance(next, mu);
    if (!steps.empty() && steps.back() > 0.0) ratios.push_back(step / steps.back());
    steps.push_back(step);
    mu = std::move(next);
    iterations = k + 1;
    if (step < config.picard_tol) {
      converged = true;
      break;
    }
    if (ratios.size() >= 5 && steps.size() >= 6) {
      const bool expanding = std::all_of(ratios.end() - 5, ratios.end(), [](double r) { return r > 1.0; });
      if (expanding && steps.back() > steps[steps.size() - 6])
        throw NonContractionError("Picard iteration is expanding: last ratio " + std::to_string(ratios.back()));
    }
  }
  if (!converged)
    throw NonConvergenceError("Picard iteration did not reach picard_tol within picard_max", steps.back());

  auto q_star = std::make_shared<const BackupQFunction>(solve_q_star_with(mu, model, config, lambda, warm));
  DeterministicPolicy policy = greedy_policy(*q_star);
  const StateMeasure image = next_measure(mu, policy, *model);

  EquilibriumResult result{config.criterion,
                           mu,
                           q_star,
                           policy,
                           q_min_vector(*q_star),
                           l1_distance(image, mu),
                           bellman_residual(*q_star, mu, model, config, lambda),
                           iterations,
                           std::move(steps),
                           std::move(ratios),
                           {},
                           std::nullopt};
  if (config.criterion == Criterion::average) {
    result.average_cost = optimal_average_cost(*q_star, lambda);
    result.lambda = std::move(lambda);
  }
  return result;
}

StateMeasure policy_stationary_measure(const DeterministicPolicy& policy, const MFGModel& model, double tol,
                                       std::size_t max_iterations) {
  const std::size_t n = model.states().size();
  StateMeasure mu = StateMeasure::uniform(n);
  double step = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < max_iterations; ++it) {
    StateMeasure next = next_measure(mu, policy, model);
    step = l1_distance(next, mu);
    mu = std::move(next);
    if (step < tol) return mu;
  }
  throw NonConvergenceError("stationary measure iteration did not converge", step);
}

namespace {

void policy_matrices(const DeterministicPolicy& policy, const StateMeasure& mu, const MFGModel& model,
                     Eigen::MatrixXd& p, Eigen::VectorXd& c) {
  const std::size_t n = model.states().size();
  if (policy.num_states() != n) throw DimensionError("policy does not match the state space");
  check_measure(model, mu);
  p.resize(n, n);
  c.resize(n);
  for (State x = 0; x < n; ++x) {
    const auto row = model.transition_probs(x, policy.action(x), mu);
    for (State y = 0; y < n; ++y) p(x, y) = row[y];
    c(x) = model.cost(x, policy.action(x), mu);
  }
}

}  // namespace

std::vector<double> policy_value_discounted(const DeterministicPolicy& policy, const StateMeasure& mu,
                                            const MFGModel& model, double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("discount factor must lie in [0,1)");
  Eigen::MatrixXd p;
  Eigen::VectorXd c;
  policy_matrices(policy, mu, model, p, c);
  const Eigen::Index n = p.rows();
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - beta * p;
  const Eigen::VectorXd j = a.partialPivLu().solve(c);
  return {j.data(), j.data() + n};
}

double policy_average_cost(const DeterministicPolicy& policy, const StateMeasure& mu, const MFGModel& model) {
  Eigen::MatrixXd p;
  Eigen::VectorXd c;
  policy_matrices(policy, mu, model, p, c);
  const Eigen::Index n = p.rows();
  // pi (P - I) = 0 with sum(pi) = 1: replace the last balance equation.
  Eigen::MatrixXd a = p.transpose() - Eigen::MatrixXd::Identity(n, n);
  a.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) throw NumericalError("policy kernel has no unique invariant law");
  const Eigen::VectorXd pi = lu.solve(rhs);
  return pi.dot(c);
}

}  // namespace mfg
