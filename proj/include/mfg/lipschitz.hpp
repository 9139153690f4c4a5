#pragma once

#include <cstdint>

#include "mfg/core.hpp"

namespace mfg {

/// Regularity constants of a model and the contraction constants derived
/// from them.
///
/// L1: Lipschitz constant of c in (x, a, mu) under d_X + |a-a'| + |mu-mu'|_1.
/// K1: same for the kernel in l1.
/// KF: Lipschitz constant of grad_a F(x, v, mu, a) in (x, v, mu), where
///     F = c + xi * sum_y v(y) p(y|x,a,mu).
/// rho: strong-convexity modulus of F in a.
struct LipschitzProfile {
  double L1 = 0.0;
  double K1 = 0.0;
  double KF = 0.0;
  double rho = 0.0;
  double beta = 0.0;
  /// lambda(X); zero when the model has no minorization.
  double lambda_mass = 0.0;
  double cost_bound = 0.0;

  void validate() const;

  double q_max() const { return cost_bound / (1.0 - beta); }
  double q_lip() const { return L1 / (1.0 - beta * K1 / 2.0); }
  double k_h1() const { return q_lip() / (1.0 - beta); }
  /// Lipschitz modulus of the discounted MFE operator; < 1 means contraction.
  double k_h() const;

  double beta_av() const { return 1.0 - lambda_mass; }
  double beta_tilde() const { return 1.0 - lambda_mass / 2.0; }
  double q_max_av() const { return cost_bound / (1.0 - beta_av()); }
  double q_lip_av() const { return L1 / (1.0 - K1 / 2.0); }
  double k_h1_av() const { return q_lip_av() / (1.0 - beta_av()); }
  double k_h_av() const;
};

struct ProfileMeasurementOptions {
  std::size_t action_points = 65;
  std::size_t random_measures = 16;
  std::uint64_t seed = 7;
};

/// Estimates a LipschitzProfile by difference quotients over an action grid,
/// the Dirac/uniform measures and a few random measures. The sup over a
/// finite set can only under-estimate the true constants; rho is the smallest
/// per-axis second difference of F, which equals the modulus for dim 1.
LipschitzProfile measure_lipschitz_profile(const MFGModel& model, Criterion criterion, double beta,
                                           const ProfileMeasurementOptions& options = {});

}  // namespace mfg
