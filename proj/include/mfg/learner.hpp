#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mfg/basis.hpp"
#include "mfg/core.hpp"
#include "mfg/lipschitz.hpp"

namespace mfg {

/// Exploration density pi_b(a|x) over the action box.
struct BehaviorPolicy {
  using Sampler = std::function<Action(State, Rng&)>;
  using Density = std::function<double(State, std::span<const double>)>;

  Sampler sample;
  Density density;
  /// pi_0 = inf over (x, a) of the density; must be positive.
  double min_density = 0.0;

  static BehaviorPolicy uniform(const ActionSpace& actions);
};

struct LearnerConfig {
  Criterion criterion = Criterion::discounted;
  double beta = 0.5;
  std::size_t N = 1000;
  std::size_t L = 20;
  std::size_t M = 1000;
  std::size_t K = 20;
  /// Defaults to the uniform density on A.
  std::optional<BehaviorPolicy> behavior;
  /// nu; defaults to uniform on X.
  std::optional<StateMeasure> sampling_measure;
  BasisSpec basis = BasisSpec::polynomial(1, 2);
  std::uint64_t seed = 1;
  MinimizerOptions minimizer;
  double ridge = 1e-10;
  /// Worker threads for sample generation; results do not depend on it.
  std::size_t threads = 1;

  void validate(const MFGSampler& sampler) const;
  BehaviorPolicy behavior_or_default(const ActionSpace& actions) const;
  StateMeasure sampling_measure_or_default(std::size_t n_states) const;
};

struct FittedQ {
  BasisQFunction q;
  /// Diagnostics of the last regression.
  FitDiagnostics diagnostics;
};

/// Fitted Q-iteration at a frozen mean field: N tuples (x ~ nu, a ~ pi_b,
/// c, y ~ p), then L weighted regressions of c + xi * min_a' Q_l(y, a')
/// starting from Q_0 = 0, with xi = beta (discounted) or 1 (average).
/// Discounted targets use min Q_l clamped to [-Q_m, Q_m].
FittedQ fitted_q_iteration(const StateMeasure& mu, const MFGSampler& sampler, const LearnerConfig& config,
                           Rng& rng);

/// sum_x mu(x) * (empirical law of M draws from p(.|x, argmin Q(x,.), mu)).
StateMeasure empirical_next_measure(const StateMeasure& mu, const QFunction& q, const MFGSampler& sampler,
                                    std::size_t M, Rng& rng);
StateMeasure empirical_next_measure(const StateMeasure& mu, const DeterministicPolicy& policy,
                                    const MFGSampler& sampler, std::size_t M, Rng& rng);

struct LearningTrace {
  /// mu_0, ..., mu_k for the iterations completed so far.
  std::vector<StateMeasure> measures;
  /// Weighted RMS residual of the last regression in iteration k.
  std::vector<double> fit_residuals;
  /// |mu_{k+1} - mu_k|_1.
  std::vector<double> steps;
  /// Final pass at mu_K; absent when K = 0.
  std::optional<BasisQFunction> q_final;
  std::optional<DeterministicPolicy> policy;

  const StateMeasure& final_measure() const { return measures.back(); }
};

/// mu_{k+1} = empirical_next_measure(mu_k, fitted_q_iteration(mu_k)) for
/// k < K, then one more fitted pass at mu_K for the policy. Streams are
/// keyed by (seed, k, stage), so a rerun with the same seed is identical.
///
/// The overload taking `trace` fills it in place; after an exception it
/// holds every completed iteration.
LearningTrace learn_mfe(const StateMeasure& mu0, const MFGSampler& sampler, const LearnerConfig& config);
void learn_mfe(const StateMeasure& mu0, const MFGSampler& sampler, const LearnerConfig& config,
               LearningTrace& trace);

/// Constants of the function class and sampling design entering m1.
struct ClassConstants {
  /// Pseudo-dimensions of F and F_min.
  double vc_dim = 0.0;
  double vc_dim_min = 0.0;
  double action_volume = 1.0;
  std::size_t action_dim = 1;
  /// pi_0.
  double min_density = 1.0;
  /// zeta_0 = 1 / sqrt(min_x nu(x)).
  double zeta0 = 1.0;
  /// Cone constant of the action set; 2^-dim for a box.
  double alpha = 0.5;
};

struct SampleSizeBound {
  /// log10 of gamma (2 Lambda)^{4(d+1)} / eps^{4(d+1)}.
  double leading_log10 = 0.0;
  /// The logarithm factor (natural log).
  double log_term = 0.0;
  /// leading * log_term; +inf when it overflows a double.
  double value = 0.0;
  /// log10(value); NaN when value <= 0.
  double log10_value = 0.0;
};

/// Fitted-Q sample size. Discounted uses the profile's beta, Q_m and Q_Lip;
/// average uses Q_m^av, Q_Lip^av and beta-tilde from lambda_mass.
SampleSizeBound sample_size_m1(double eps, double delta, std::size_t L, const LipschitzProfile& profile,
                               const ClassConstants& constants, Criterion criterion = Criterion::discounted);

/// ceil(|X|^2 / eps^2 * ln(2 |X|^2 / delta)).
std::uint64_t sample_size_m2(double eps, double delta, std::size_t n_states);

}  // namespace mfg
