#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mfg/core.hpp"
#include "mfg/exact_solver.hpp"

namespace mfg {

/// States of N agents together with their empirical measure.
class PopulationState {
 public:
  PopulationState(std::vector<State> states, std::size_t n_states);

  const std::vector<State>& states() const { return states_; }
  const StateMeasure& empirical_measure() const { return measure_; }
  std::size_t size() const { return states_.size(); }

 private:
  std::vector<State> states_;
  StateMeasure measure_;
};

/// Policy of each agent, stored as distinct policies plus an assignment.
struct PolicyProfile {
  std::vector<DeterministicPolicy> policies;
  std::vector<std::size_t> assignment;

  static PolicyProfile shared(const DeterministicPolicy& policy, std::size_t N);
  /// Agent 0 plays `deviation`, everyone else `policy`.
  static PolicyProfile with_deviator(const DeterministicPolicy& policy, const DeterministicPolicy& deviation,
                                     std::size_t N);

  std::size_t num_agents() const { return assignment.size(); }
  const DeterministicPolicy& policy_of(std::size_t agent) const { return policies[assignment[agent]]; }
};

struct SimulationConfig {
  Criterion criterion = Criterion::discounted;
  double beta = 0.5;
  std::size_t T = 100;
  /// eta_0; uniform when absent.
  std::optional<StateMeasure> initial;
};

struct PopulationCosts {
  /// Discounted sum over t < T, or average over t in [T/10, T).
  std::vector<double> agent_costs;
  /// beta^T c_m / (1 - beta) for the discounted criterion, 0 otherwise.
  double tail_bound = 0.0;
  /// Time average of the empirical measure over the costed steps.
  StateMeasure mean_measure;
  PopulationState final_state;
};

/// Synchronous N-agent dynamics: every step, each agent pays
/// c(x_i, a_i, e_t) and moves according to p(.|x_i, a_i, e_t), where e_t
/// is the empirical measure including the agent itself. Initial states are
/// drawn in agent order, then each step uses exactly one uniform per agent
/// in agent order, so profiles that differ in one agent share randomness.
PopulationCosts simulate_population(const PolicyProfile& profile, const MFGModel& model,
                                    const SimulationConfig& config, Rng& rng);

/// Smallest T with beta^T c_m / (1 - beta) < tol.
std::size_t discounted_horizon(double beta, double cost_bound, double tol);

struct DeviationConfig {
  Criterion criterion = Criterion::discounted;
  double beta = 0.5;
  std::size_t N = 10;
  std::size_t T = 100;
  std::size_t replications = 200;
  std::uint64_t seed = 1;
  /// eta_0; defaults to the stationary measure of the shared policy.
  std::optional<StateMeasure> initial;
  /// Solver settings for the best response (criterion and beta are copied in).
  SolverConfig solver;
  std::size_t threads = 1;
};

struct DeviationReport {
  Criterion criterion = Criterion::discounted;
  std::size_t N = 0;
  std::size_t horizon = 0;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  double baseline_cost = 0.0;
  double baseline_stderr = 0.0;
  double deviated_cost = 0.0;
  double deviated_stderr = 0.0;
  /// baseline - deviated (positive: deviating pays off).
  double gain = 0.0;
  /// Standard error of the paired per-replication gains.
  double gain_stderr = 0.0;
  double median_gain = 0.0;
  double tail_bound = 0.0;
  /// Stationary mean field of the shared policy and the best response to it.
  StateMeasure mean_field;
  DeterministicPolicy best_response;
};

/// A best response closer than this (sup action distance) to the shared
/// policy is taken to be the shared policy itself.
inline constexpr double kSamePolicyTolerance = 1e-8;

/// Agent 0's cost under (pi, ..., pi) against (pi', pi, ..., pi), where pi'
/// is the best response to the stationary mean field of pi. Replication r
/// uses stream (seed, N, r) for both runs.
DeviationReport deviation_gain(const DeterministicPolicy& shared_policy, std::shared_ptr<const MFGModel> model,
                               const DeviationConfig& config);

/// Same, with a caller-supplied deviation instead of the best response.
DeviationReport deviation_gain(const DeterministicPolicy& shared_policy, const DeterministicPolicy& deviation,
                               std::shared_ptr<const MFGModel> model, const DeviationConfig& config);

}  // namespace mfg
