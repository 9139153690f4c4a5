#include "mfg/learner.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <thread>

namespace mfg {

BehaviorPolicy BehaviorPolicy::uniform(const ActionSpace& actions) {
  const double density = 1.0 / actions.volume();
  return BehaviorPolicy{[actions](State, Rng& rng) { return actions.sample_uniform(rng); },
                        [density](State, std::span<const double>) { return density; }, density};
}

BehaviorPolicy LearnerConfig::behavior_or_default(const ActionSpace& actions) const {
  return behavior ? *behavior : BehaviorPolicy::uniform(actions);
}

StateMeasure LearnerConfig::sampling_measure_or_default(std::size_t n_states) const {
  return sampling_measure ? *sampling_measure : StateMeasure::uniform(n_states);
}

void LearnerConfig::validate(const MFGSampler& sampler) const {
  if (N == 0 || L == 0 || M == 0) throw ConfigError("N, L and M must be >= 1");
  if (criterion == Criterion::discounted && !(beta > 0.0 && beta < 1.0))
    throw ConfigError("discount factor must lie in (0,1)");
  if (threads == 0) throw ConfigError("threads must be >= 1");
  basis.validate();
  if (basis.dim != sampler.actions().dim()) throw DimensionError("basis dimension differs from the action box");
  if (behavior) {
    if (!behavior->sample || !behavior->density) throw ConfigError("behavior policy needs a sampler and a density");
    if (!(behavior->min_density > 0.0)) throw ConfigError("behavior policy density must be bounded below (pi_0 > 0)");
  }
  if (sampling_measure) {
    if (sampling_measure->size() != sampler.states().size())
      throw DimensionError("sampling measure does not match the state space");
    for (double p : sampling_measure->probs()) {
      if (!(p > 0.0)) throw ConfigError("sampling measure must charge every state (min nu > 0)");
    }
  }
}

namespace {

constexpr std::size_t kChunk = 250;

struct Tuple {
  State x;
  Action a;
  double weight;
  double cost;
  State next;
};

std::vector<Tuple> draw_tuples(const StateMeasure& mu, const MFGSampler& sampler, const LearnerConfig& config,
                               std::uint64_t base) {
  const BehaviorPolicy behavior = config.behavior_or_default(sampler.actions());
  const StateMeasure nu = config.sampling_measure_or_default(sampler.states().size());
  const double volume = sampler.actions().volume();
  const std::size_t chunks = (config.N + kChunk - 1) / kChunk;
  std::vector<Tuple> tuples(config.N);

  auto run_chunk = [&](std::size_t j) {
    Rng rng = make_stream(base, {j});
    const std::size_t end = std::min(config.N, (j + 1) * kChunk);
    for (std::size_t t = j * kChunk; t < end; ++t) {
      Tuple& s = tuples[t];
      s.x = rng.categorical(nu.probs());
      s.a = behavior.sample(s.x, rng);
      s.weight = 1.0 / (volume * behavior.density(s.x, s.a));
      s.cost = sampler.cost(s.x, s.a, mu);
      s.next = sampler.sample_next(s.x, s.a, mu, rng);
    }
  };

  const std::size_t workers = std::min(config.threads, chunks);
  if (workers <= 1) {
    for (std::size_t j = 0; j < chunks; ++j) run_chunk(j);
    return tuples;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t j = w; j < chunks; j += workers) run_chunk(j);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return tuples;
}

}  // namespace

FittedQ fitted_q_iteration(const StateMeasure& mu, const MFGSampler& sampler, const LearnerConfig& config,
                           Rng& rng) {
  config.validate(sampler);
  const StateSpace& states = sampler.states();
  const ActionSpace& actions = sampler.actions();
  if (mu.size() != states.size()) throw DimensionError("measure does not match the state space");
  const std::size_t n = states.size();
  const bool discounted = config.criterion == Criterion::discounted;
  const double xi = discounted ? config.beta : 1.0;
  const std::optional<double> clamp =
      discounted ? std::optional<double>(sampler.cost_bound() / (1.0 - config.beta)) : std::nullopt;

  const std::vector<Tuple> tuples = draw_tuples(mu, sampler, config, rng.next_u64());

  FitOptions options;
  options.ridge = config.ridge;
  options.clamp = clamp;
  options.minimizer = config.minimizer;

  std::vector<RegressionSample> samples(tuples.size());
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    samples[t].x = tuples[t].x;
    samples[t].a = tuples[t].a;
    samples[t].weight = tuples[t].weight;
  }

  std::vector<double> next_min(n, 0.0);  // min_a Q_0(y, a) = 0
  std::optional<FitResult> current;
  for (std::size_t l = 0; l < config.L; ++l) {
    if (current) {
      for (State y = 0; y < n; ++y) {
        double v = q_min(current->q, y);
        if (clamp) v = std::clamp(v, -*clamp, *clamp);
        next_min[y] = v;
      }
    }
    for (std::size_t t = 0; t < tuples.size(); ++t) samples[t].target = tuples[t].cost + xi * next_min[tuples[t].next];
    current.emplace(fit(samples, states, actions, config.basis, options));
  }
  return {std::move(current->q), std::move(current->diagnostics)};
}

StateMeasure empirical_next_measure(const StateMeasure& mu, const DeterministicPolicy& policy,
                                    const MFGSampler& sampler, std::size_t M, Rng& rng) {
  if (M == 0) throw ConfigError("M must be >= 1");
  const std::size_t n = sampler.states().size();
  if (mu.size() != n || policy.num_states() != n) throw DimensionError("inputs do not match the state space");
  std::vector<double> out(n, 0.0);
  std::vector<std::size_t> counts(n);
  for (State x = 0; x < n; ++x) {
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t t = 0; t < M; ++t) ++counts[sampler.sample_next(x, policy.action(x), mu, rng)];
    for (State y = 0; y < n; ++y) out[y] += mu[x] * static_cast<double>(counts[y]) / static_cast<double>(M);
  }
  return StateMeasure(std::move(out));
}

StateMeasure empirical_next_measure(const StateMeasure& mu, const QFunction& q, const MFGSampler& sampler,
                                    std::size_t M, Rng& rng) {
  return empirical_next_measure(mu, greedy_policy(q), sampler, M, rng);
}

void learn_mfe(const StateMeasure& mu0, const MFGSampler& sampler, const LearnerConfig& config,
               LearningTrace& trace) {
  config.validate(sampler);
  if (mu0.size() != sampler.states().size()) throw DimensionError("initial measure does not match the state space");
  trace = LearningTrace{};
  trace.measures.push_back(mu0);

  for (std::size_t k = 0; k < config.K; ++k) {
    const StateMeasure& mu = trace.measures.back();
    Rng fit_rng = make_stream(config.seed, {k, 0});
    FittedQ fq = fitted_q_iteration(mu, sampler, config, fit_rng);
    Rng kernel_rng = make_stream(config.seed, {k, 1});
    StateMeasure next = empirical_next_measure(mu, fq.q, sampler, config.M, kernel_rng);
    trace.fit_residuals.push_back(fq.diagnostics.weighted_rms_residual);
    trace.steps.push_back(l1_distance(next, mu));
    trace.measures.push_back(std::move(next));
  }
  if (config.K == 0) return;

  Rng final_rng = make_stream(config.seed, {config.K, 0});
  FittedQ fq = fitted_q_iteration(trace.measures.back(), sampler, config, final_rng);
  trace.policy = greedy_policy(fq.q);
  trace.q_final.emplace(std::move(fq.q));
}

LearningTrace learn_mfe(const StateMeasure& mu0, const MFGSampler& sampler, const LearnerConfig& config) {
  LearningTrace trace;
  learn_mfe(mu0, sampler, config, trace);
  return trace;
}

namespace {

void check_unit_open(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) throw ConfigError(std::string(name) + " must lie in (0,1)");
}

double log_factorial(std::size_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

}  // namespace

SampleSizeBound sample_size_m1(double eps, double delta, std::size_t L, const LipschitzProfile& profile,
                               const ClassConstants& k, Criterion criterion) {
  check_unit_open(eps, "eps");
  check_unit_open(delta, "delta");
  if (L == 0) throw ConfigError("L must be >= 1");
  if (!(k.action_volume > 0.0) || !(k.min_density > 0.0) || !(k.zeta0 > 0.0) || !(k.alpha > 0.0) ||
      k.action_dim == 0 || k.vc_dim < 0.0 || k.vc_dim_min < 0.0)
    throw ConfigError("class constants out of range");

  const double d1 = static_cast<double>(k.action_dim) + 1.0;
  const double cm = profile.cost_bound;
  const double V = k.vc_dim + k.vc_dim_min;

  double q_m = 0.0, l_m = 0.0, upsilon_base = 0.0, lambda_scale = 0.0, q_lip = 0.0;
  if (criterion == Criterion::discounted) {
    check_unit_open(profile.beta, "beta");
    q_m = profile.q_max();
    l_m = (1.0 + profile.beta) * q_m + cm;
    upsilon_base = 64.0 * std::exp(1.0) * q_m * l_m * (1.0 + profile.beta) / (k.action_volume * k.min_density);
    lambda_scale = 1.0 / (1.0 - profile.beta);
    q_lip = profile.q_lip();
  } else {
    if (!(profile.lambda_mass > 0.0 && profile.lambda_mass <= 1.0))
      throw ConfigError("average-cost bound needs lambda(X) in (0,1]");
    q_m = profile.q_max_av();
    l_m = 2.0 * q_m + cm;
    upsilon_base = 128.0 * std::exp(1.0) * q_m * l_m / (k.action_volume * k.min_density);
    lambda_scale = 2.0 / (1.0 - profile.beta_tilde());
    q_lip = profile.q_lip_av();
  }
  if (!(q_lip > 0.0)) throw ConfigError("Q_Lip must be positive");

  const double log_c = 2.0 * std::log(l_m) - std::log(k.action_volume * k.min_density);
  const double log_gamma = std::log(512.0) + 2.0 * log_c;
  const double log_base = std::log(k.action_volume) + log_factorial(k.action_dim + 1) + std::log(k.zeta0) -
                          std::log(k.alpha) - static_cast<double>(k.action_dim) * std::log(2.0 / q_lip);
  const double log_2lambda = std::log(2.0 * lambda_scale) + log_base / d1;
  const double log_upsilon = std::log(8.0) + 2.0 + std::log(k.vc_dim + 1.0) + std::log(k.vc_dim_min + 1.0) +
                             V * std::log(upsilon_base);

  SampleSizeBound out;
  const double log_leading = log_gamma + 4.0 * d1 * log_2lambda - 4.0 * d1 * std::log(eps);
  out.leading_log10 = log_leading / std::log(10.0);
  out.log_term = log_upsilon + 2.0 * V * d1 * log_2lambda + std::log(static_cast<double>(L)) - std::log(delta) -
                 2.0 * V * d1 * std::log(eps);
  if (out.log_term > 0.0) {
    out.log10_value = out.leading_log10 + std::log10(out.log_term);
    out.value = out.log10_value > std::log10(std::numeric_limits<double>::max())
                    ? std::numeric_limits<double>::infinity()
                    : std::pow(10.0, out.log10_value);
  } else {
    out.value = std::exp(log_leading) * out.log_term;
    out.log10_value = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

std::uint64_t sample_size_m2(double eps, double delta, std::size_t n_states) {
  check_unit_open(eps, "eps");
  check_unit_open(delta, "delta");
  if (n_states == 0) throw ConfigError("state count must be >= 1");
  const double n2 = static_cast<double>(n_states) * static_cast<double>(n_states);
  return static_cast<std::uint64_t>(std::ceil(n2 / (eps * eps) * std::log(2.0 * n2 / delta)));
}

}  // namespace mfg
