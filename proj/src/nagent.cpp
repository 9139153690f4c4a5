#include "mfg/nagent.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

namespace mfg {

namespace {

StateMeasure empirical(const std::vector<std::size_t>& counts, std::size_t N) {
  std::vector<double> probs(counts.size());
  for (std::size_t y = 0; y < counts.size(); ++y) probs[y] = static_cast<double>(counts[y]) / static_cast<double>(N);
  return StateMeasure(std::move(probs));
}

std::vector<std::size_t> count_states(const std::vector<State>& states, std::size_t n_states) {
  std::vector<std::size_t> counts(n_states, 0);
  for (State x : states) {
    if (x >= n_states) throw DimensionError("agent state out of range");
    ++counts[x];
  }
  return counts;
}

}  // namespace

PopulationState::PopulationState(std::vector<State> states, std::size_t n_states)
    : states_(std::move(states)),
      measure_(states_.empty() ? throw ConfigError("population needs at least one agent")
                               : empirical(count_states(states_, n_states), states_.size())) {}

PolicyProfile PolicyProfile::shared(const DeterministicPolicy& policy, std::size_t N) {
  if (N == 0) throw ConfigError("population needs at least one agent");
  return PolicyProfile{{policy}, std::vector<std::size_t>(N, 0)};
}

PolicyProfile PolicyProfile::with_deviator(const DeterministicPolicy& policy, const DeterministicPolicy& deviation,
                                           std::size_t N) {
  PolicyProfile profile = shared(policy, N);
  profile.policies.push_back(deviation);
  profile.assignment[0] = 1;
  return profile;
}

PopulationCosts simulate_population(const PolicyProfile& profile, const MFGModel& model,
                                    const SimulationConfig& config, Rng& rng) {
  const std::size_t N = profile.num_agents();
  const std::size_t n = model.states().size();
  if (N == 0) throw ConfigError("population needs at least one agent");
  if (config.T == 0) throw ConfigError("horizon T must be >= 1");
  const bool discounted = config.criterion == Criterion::discounted;
  if (discounted && !(config.beta > 0.0 && config.beta < 1.0)) throw ConfigError("discount factor must lie in (0,1)");
  for (const auto& p : profile.policies) {
    if (p.num_states() != n) throw DimensionError("policy does not match the state space");
  }
  for (std::size_t k : profile.assignment) {
    if (k >= profile.policies.size()) throw DimensionError("policy assignment out of range");
  }
  const StateMeasure eta = config.initial ? *config.initial : StateMeasure::uniform(n);
  if (eta.size() != n) throw DimensionError("initial measure does not match the state space");

  std::vector<State> states(N);
  for (auto& x : states) x = rng.categorical(eta.probs());
  std::vector<std::size_t> counts = count_states(states, n);

  const std::size_t burn_in = discounted ? 0 : config.T / 10;
  const double average_weight = 1.0 / static_cast<double>(config.T - burn_in);
  std::vector<double> costs(N, 0.0);
  std::vector<double> measure_sum(n, 0.0);
  double discount = 1.0;

  const std::size_t n_policies = profile.policies.size();
  std::vector<std::vector<double>> rows(n_policies * n);
  std::vector<double> stage_cost(n_policies * n);
  std::vector<std::size_t> next_counts(n);

  for (std::size_t t = 0; t < config.T; ++t) {
    const StateMeasure e = empirical(counts, N);
    for (std::size_t p = 0; p < n_policies; ++p) {
      for (State x = 0; x < n; ++x) {
        const Action& a = profile.policies[p].action(x);
        rows[p * n + x] = model.transition_probs(x, a, e);
        stage_cost[p * n + x] = model.cost(x, a, e);
      }
    }
    const bool costed = t >= burn_in;
    const double w = discounted ? discount : average_weight;
    std::fill(next_counts.begin(), next_counts.end(), 0);
    for (std::size_t i = 0; i < N; ++i) {
      const std::size_t cell = profile.assignment[i] * n + states[i];
      if (costed) costs[i] += w * stage_cost[cell];
      states[i] = rng.categorical(rows[cell]);
      ++next_counts[states[i]];
    }
    if (costed) {
      for (State y = 0; y < n; ++y) measure_sum[y] += e[y];
    }
    counts.swap(next_counts);
    discount *= config.beta;
  }

  const double costed_steps = static_cast<double>(config.T - burn_in);
  for (double& m : measure_sum) m /= costed_steps;
  const double tail = discounted ? std::pow(config.beta, static_cast<double>(config.T)) * model.cost_bound() /
                                       (1.0 - config.beta)
                                 : 0.0;
  return PopulationCosts{std::move(costs), tail, StateMeasure(std::move(measure_sum)),
                         PopulationState(std::move(states), n)};
}

std::size_t discounted_horizon(double beta, double cost_bound, double tol) {
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("discount factor must lie in (0,1)");
  if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
  std::size_t T = 0;
  double tail = cost_bound / (1.0 - beta);
  while (!(tail < tol)) {
    tail *= beta;
    ++T;
  }
  return T == 0 ? 1 : T;
}

namespace {

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v) {
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

void check_deviation_config(const DeviationConfig& config) {
  if (config.N < 2) throw ConfigError("deviation gain needs N >= 2");
  if (config.replications < 2) throw ConfigError("deviation gain needs >= 2 replications (stderr undefined)");
  if (config.T == 0) throw ConfigError("horizon T must be >= 1");
  if (config.threads == 0) throw ConfigError("threads must be >= 1");
}

DeviationReport run_deviation(const DeterministicPolicy& shared_policy, const DeterministicPolicy& deviation,
                              const StateMeasure& mean_field, const MFGModel& model, const DeviationConfig& config) {
  SimulationConfig sim;
  sim.criterion = config.criterion;
  sim.beta = config.beta;
  sim.T = config.T;
  sim.initial = config.initial ? *config.initial : mean_field;

  const PolicyProfile baseline_profile = PolicyProfile::shared(shared_policy, config.N);
  const PolicyProfile deviated_profile = PolicyProfile::with_deviator(shared_policy, deviation, config.N);
  const std::size_t R = config.replications;
  std::vector<double> baseline(R), deviated(R);
  double tail = 0.0;

  auto run_rep = [&](std::size_t r) {
    const Rng stream = make_stream(config.seed, {config.N, r});
    Rng rng_a = stream;
    Rng rng_b = stream;
    const PopulationCosts a = simulate_population(baseline_profile, model, sim, rng_a);
    const PopulationCosts b = simulate_population(deviated_profile, model, sim, rng_b);
    baseline[r] = a.agent_costs[0];
    deviated[r] = b.agent_costs[0];
    if (r == 0) tail = a.tail_bound;
  };

  const std::size_t workers = std::min(config.threads, R);
  if (workers <= 1) {
    for (std::size_t r = 0; r < R; ++r) run_rep(r);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t r = w; r < R; r += workers) run_rep(r);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<double> gains(R);
  for (std::size_t r = 0; r < R; ++r) gains[r] = baseline[r] - deviated[r];

  return DeviationReport{.criterion = config.criterion,
                         .N = config.N,
                         .horizon = config.T,
                         .replications = R,
                         .seed = config.seed,
                         .baseline_cost = mean(baseline),
                         .baseline_stderr = stderr_of(baseline),
                         .deviated_cost = mean(deviated),
                         .deviated_stderr = stderr_of(deviated),
                         .gain = mean(gains),
                         .gain_stderr = stderr_of(gains),
                         .median_gain = median(gains),
                         .tail_bound = tail,
                         .mean_field = mean_field,
                         .best_response = deviation};
}

}  // namespace

DeviationReport deviation_gain(const DeterministicPolicy& shared_policy, const DeterministicPolicy& deviation,
                               std::shared_ptr<const MFGModel> model, const DeviationConfig& config) {
  check_deviation_config(config);
  const StateMeasure mean_field = policy_stationary_measure(shared_policy, *model);
  return run_deviation(shared_policy, deviation, mean_field, *model, config);
}

DeviationReport deviation_gain(const DeterministicPolicy& shared_policy, std::shared_ptr<const MFGModel> model,
                               const DeviationConfig& config) {
  check_deviation_config(config);
  const StateMeasure mean_field = policy_stationary_measure(shared_policy, *model);
  SolverConfig solver = config.solver;
  solver.criterion = config.criterion;
  solver.beta = config.beta;
  const BackupQFunction q = solve_q_star(mean_field, model, solver);
  DeterministicPolicy best = greedy_policy(q);
  if (policy_distance(best, shared_policy) < kSamePolicyTolerance) best = shared_policy;
  return run_deviation(shared_policy, best, mean_field, *model, config);
}

}  // namespace mfg
