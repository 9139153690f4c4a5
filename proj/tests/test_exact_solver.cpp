#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "mfg/exact_solver.hpp"
#include "mfg/lipschitz.hpp"
#include "mfg/models.hpp"
#include "oracles.hpp"

using namespace mfg;

namespace {

std::vector<double> at(double a) { return {a}; }

/// Model given by closures on A = [0, 1].
class ClosureModel final : public MFGModel {
 public:
  using Cost = std::function<double(State, double, const StateMeasure&)>;
  using Kernel = std::function<std::vector<double>(State, double, const StateMeasure&)>;

  ClosureModel(std::size_t n, Cost cost, Kernel kernel, double bound,
               std::optional<std::vector<double>> lambda = std::nullopt)
      : states_(n), cost_(std::move(cost)), kernel_(std::move(kernel)), bound_(bound), lambda_(std::move(lambda)) {}

  std::string name() const override { return "closure"; }
  const StateSpace& states() const override { return states_; }
  const ActionSpace& actions() const override { return actions_; }
  double cost(State x, std::span<const double> a, const StateMeasure& mu) const override { return cost_(x, a[0], mu); }
  double cost_bound() const override { return bound_; }
  std::vector<double> transition_probs(State x, std::span<const double> a, const StateMeasure& mu) const override {
    return kernel_(x, a[0], mu);
  }
  std::optional<std::vector<double>> minorization() const override { return lambda_; }

 private:
  StateSpace states_;
  ActionSpace actions_ = ActionSpace::interval(0.0, 1.0);
  Cost cost_;
  Kernel kernel_;
  double bound_;
  std::optional<std::vector<double>> lambda_;
};

std::shared_ptr<ClosureModel> constant_model(double c, std::vector<std::vector<double>> rows) {
  const std::size_t n = rows.size();
  return std::make_shared<ClosureModel>(
      n, [c](State, double, const StateMeasure&) { return c; },
      [rows](State x, double, const StateMeasure&) { return rows[x]; }, c);
}

DecoupledSpec three_state_spec() {
  DecoupledSpec s;
  s.rows = {{0.5, 0.25, 0.25}, {0.2, 0.6, 0.2}, {0.1, 0.1, 0.8}};
  s.state_cost = {0.1, 0.3, 0.0};
  s.action_target = {0.4};
  return s;
}

SolverConfig discounted(double beta) {
  SolverConfig c;
  c.criterion = Criterion::discounted;
  c.beta = beta;
  return c;
}

SolverConfig average() {
  SolverConfig c;
  c.criterion = Criterion::average;
  return c;
}

/// Q tabulated on 33 nodes with random values: sup |Q1 - Q2| is attained at a node.
GridQFunction random_grid_q(std::mt19937_64& g, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<std::vector<double>> table(2, std::vector<double>(33));
  for (auto& row : table) {
    for (auto& v : row) v = u(g);
  }
  return GridQFunction(StateSpace(2), ActionSpace::interval(0.0, 1.0), 33, std::move(table));
}

double sup_over_nodes(const QFunction& a, const QFunction& b) { return sup_distance(a, b, 33); }

double span_over_nodes(const QFunction& a, const QFunction& b) { return span_distance(a, b, 33); }

}  // namespace

TEST_CASE("discounted Bellman operator examples") {
  const auto model = build_twostate_discounted();
  const LambdaQFunction zero(StateSpace(2), model->actions(), [](State, std::span<const double>) { return 0.0; });
  const StateMeasure dirac0 = StateMeasure::dirac(2, 0);
  const auto out = bellman_discounted(zero, dirac0, model, 0.2);
  for (State x = 0; x < 2; ++x) {
    for (double a : {0.0, 0.3, 1.0})
      CHECK(out.value(x, at(a)) == doctest::Approx(0.2 * (1 - a) + 0.15 * a * a).epsilon(1e-14));
  }

  std::mt19937_64 g(1);
  const auto q = random_grid_q(g, 1.0);
  const StateMeasure mu({0.3, 0.7});
  const auto myopic = bellman_discounted(q, mu, model, 0.0);
  for (State x = 0; x < 2; ++x) CHECK(myopic.value(x, at(0.6)) == doctest::Approx(model->cost(x, at(0.6), mu)));
}

TEST_CASE("backup gradient matches finite differences") {
  const auto model = build_twostate_discounted();
  const BackupQFunction q(model, StateMeasure({0.4, 0.6}), {0.3, -0.2}, 0.5, {0.0, 0.0});
  CHECK(q.has_gradient());
  for (double a : {0.1, 0.5, 0.9}) {
    std::vector<double> grad(1);
    q.gradient(1, at(a), grad);
    CHECK(grad[0] == doctest::Approx((q.value(1, at(a + 1e-6)) - q.value(1, at(a - 1e-6))) / 2e-6).epsilon(1e-7));
  }
}

TEST_CASE("Bellman contraction over 500 random pairs") {
  std::mt19937_64 g(77);
  const auto disc = build_twostate_discounted();
  const auto avg = build_twostate_average();
  const std::vector<double> lambda{0.3, 0.5};
  int violations_disc = 0, violations_avg = 0, violations_span = 0;
  for (int i = 0; i < 500; ++i) {
    const auto q1 = random_grid_q(g, 2.0);
    const auto q2 = random_grid_q(g, 2.0);
    const StateMeasure mu(oracle::random_simplex(g, 2));
    const double dist = sup_over_nodes(q1, q2);

    const auto t1 = bellman_discounted(q1, mu, disc, 0.2);
    const auto t2 = bellman_discounted(q2, mu, disc, 0.2);
    if (sup_distance(t1, t2, 257) > 0.2 * dist + 1e-15) ++violations_disc;

    const auto a1 = bellman_average(q1, mu, avg, lambda);
    const auto a2 = bellman_average(q2, mu, avg, lambda);
    if (sup_distance(a1, a2, 257) > (1.0 - 0.8) * dist + 1e-15) ++violations_avg;

    const auto r1 = span_operator(q1, mu, avg);
    const auto r2 = span_operator(q2, mu, avg);
    if (span_distance(r1, r2, 257) > (1.0 - 0.8 / 2.0) * span_over_nodes(q1, q2) + 1e-15) ++violations_span;
  }
  CHECK(violations_disc == 0);
  CHECK(violations_avg == 0);
  CHECK(violations_span == 0);
}

TEST_CASE("average Bellman operator") {
  SUBCASE("degenerate minorization: lambda equals every row") {
    const std::vector<double> r{0.25, 0.75};
    const auto model = std::make_shared<ClosureModel>(
        2, [](State x, double a, const StateMeasure&) { return 0.1 * x + a * a; },
        [r](State, double, const StateMeasure&) { return r; }, 1.1, r);
    std::mt19937_64 g(3);
    const auto q = random_grid_q(g, 1.0);
    const StateMeasure mu({0.5, 0.5});
    const auto out = bellman_average(q, mu, model, r);
    for (State x = 0; x < 2; ++x) CHECK(out.value(x, at(0.7)) == doctest::Approx(0.1 * x + 0.49).epsilon(1e-14));
  }
  SUBCASE("violated minorization is detected") {
    const auto model = build_twostate_average();
    std::mt19937_64 g(4);
    const auto q = random_grid_q(g, 1.0);
    CHECK_THROWS_AS(bellman_average(q, StateMeasure({0.5, 0.5}), model, {0.35, 0.5}), MinorizationError);
  }
  SUBCASE("computed minorization of the average model") {
    const auto lam = effective_minorization(*build_twostate_average());
    CHECK(lam == std::vector<double>{0.3, 0.5});
    const auto computed = effective_minorization(*build_twostate_discounted());
    CHECK(computed[0] == doctest::Approx(0.3 - 1e-9).epsilon(1e-12));
    CHECK(computed[1] == doctest::Approx(0.6 - 1e-9).epsilon(1e-12));
    CHECK(bellman_modulus(average(), {0.3, 0.5}) == doctest::Approx(0.2));
    CHECK(bellman_modulus(discounted(0.2), {}) == 0.2);
  }
}

TEST_CASE("solve_q_star examples") {
  SUBCASE("zero cost gives zero Q") {
    const auto model = constant_model(0.0, {{0.5, 0.5}, {0.1, 0.9}});
    const auto q = solve_q_star(StateMeasure::uniform(2), model, discounted(0.9));
    for (State x = 0; x < 2; ++x) CHECK(std::abs(q.value(x, at(0.3))) < 1e-14);
  }
  SUBCASE("uniform kernel: Q* = c + const and argmin of c") {
    DecoupledSpec s = three_state_spec();
    s.rows = {{1.0 / 3, 1.0 / 3, 1.0 / 3}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, {1.0 / 3, 1.0 / 3, 1.0 / 3}};
    const auto model = build_synthetic_decoupled(s);
    const StateMeasure mu = StateMeasure::uniform(3);
    const auto q = solve_q_star(mu, model, discounted(0.5));
    const double shift = q.value(0, at(0.0)) - model->cost(0, at(0.0), mu);
    for (State x = 0; x < 3; ++x) {
      for (double a : {0.0, 0.4, 1.0}) CHECK(q.value(x, at(a)) - model->cost(x, at(a), mu) == doctest::Approx(shift));
      CHECK(std::abs(q_argmin(q, x)[0] - 0.4) < 1e-8);
    }
  }
  SUBCASE("two-state model at mu = (0.5, 0.5) against closed-form and grid oracles") {
    const auto model = build_twostate_discounted();
    const auto M = oracle::discounted_model();
    const auto q = solve_q_star(StateMeasure({0.5, 0.5}), model, discounted(0.2));
    const auto exact = oracle::solve_fixed_mu(M, 0.5, 0.2, {0, 0});
    const auto grid = oracle::grid_q_star(M, 0.5, 0.2, {0, 0}, 1025);
    const auto profile = measure_lipschitz_profile(*model, Criterion::discounted, 0.2);
    for (int x = 0; x < 2; ++x) {
      CHECK(q_min(q, x) == doctest::Approx(exact.values[x]).epsilon(1e-11));
      CHECK(std::abs(q_argmin(q, x)[0] - exact.actions[x]) < 1e-8);
      double worst = 0.0;
      for (std::size_t i = 0; i < 1025; ++i)
        worst = std::max(worst, std::abs(q.value(x, at(i / 1024.0)) - grid[x][i]));
      CHECK(worst <= profile.q_lip() / 1024.0);
    }
  }
  SUBCASE("residual bound and non-convergence") {
    const auto model = build_twostate_discounted();
    const StateMeasure mu({0.2, 0.8});
    SolverConfig cfg = discounted(0.2);
    const auto q = solve_q_star(mu, model, cfg);
    CHECK(bellman_residual(q, mu, model, cfg, {}) < cfg.q_iter_tol * 1.2 / 0.8);

    cfg.q_iter_max = 1;
    try {
      solve_q_star(mu, model, cfg);
      FAIL("expected non-convergence");
    } catch (const NonConvergenceError& e) {
      CHECK(e.last_residual() > 0.0);
    }
  }
}

TEST_CASE("next_measure examples") {
  SUBCASE("deterministic kernel moves a Dirac to the successor") {
    const auto model = constant_model(1.0, {{0, 1, 0}, {0, 0, 1}, {1, 0, 0}});
    const LambdaQFunction q(StateSpace(3), model->actions(), [](State, std::span<const double> a) { return a[0]; });
    CHECK(next_measure(StateMeasure::dirac(3, 1), q, *model) == StateMeasure::dirac(3, 2));
  }
  SUBCASE("two-state model with a forced to zero") {
    const auto model = build_twostate_discounted();
    const LambdaQFunction q(StateSpace(2), model->actions(), [](State, std::span<const double> a) { return a[0]; });
    const auto out = next_measure(StateMeasure({0.5, 0.5}), q, *model);
    CHECK(out[0] == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(out[1] == doctest::Approx(0.7).epsilon(1e-14));
  }
  SUBCASE("kernel independent of state and action") {
    const auto model = constant_model(1.0, {{0.2, 0.8}, {0.2, 0.8}});
    const LambdaQFunction q(StateSpace(2), model->actions(), [](State, std::span<const double> a) { return -a[0]; });
    std::mt19937_64 g(2);
    for (int i = 0; i < 20; ++i) {
      const auto out = next_measure(StateMeasure(oracle::random_simplex(g, 2)), q, *model);
      CHECK(out[1] == doctest::Approx(0.8).epsilon(1e-14));
    }
  }
}

TEST_CASE("discounted two-state equilibrium") {
  const auto model = build_twostate_discounted();
  const SolverConfig cfg = discounted(0.2);
  const auto r = solve_mfe(StateMeasure::uniform(2), model, cfg);
  // Frozen from the closed-form oracle (vertex formula + Picard on mu(1)).
  CHECK(r.mu_star[1] == doctest::Approx(0.693450536107578).epsilon(1e-9));
  CHECK(r.policy.action(0)[0] == doctest::Approx(0.213651128573511).epsilon(1e-9));
  CHECK(r.policy.action(1)[0] == doctest::Approx(0.204366309261615).epsilon(1e-9));
  CHECK(r.values[0] == doctest::Approx(0.092451240777945).epsilon(1e-9));
  CHECK(r.values[1] == doctest::Approx(0.231723530456389).epsilon(1e-9));

  CHECK(r.residual_measure < 1e-8);
  CHECK(r.residual_bellman < 1e-6);
  CHECK(r.iterations < 100);
  for (double ratio : r.contraction_estimates) CHECK(ratio < 1.0);
  CHECK(r.contraction_estimates.size() + 1 == r.steps.size());

  // Consistency of the two equilibrium equations.
  CHECK(l1_distance(next_measure(r.mu_star, *r.q_star, *model), r.mu_star) < cfg.picard_tol);
  CHECK(bellman_residual(*r.q_star, r.mu_star, model, cfg, {}) < cfg.q_iter_tol * 1.2 / 0.8);
  CHECK(greedy_policy(*r.q_star) == r.policy);

  // Exact policy evaluation at mu* reproduces the optimal values.
  const auto v = policy_value_discounted(r.policy, r.mu_star, *model, 0.2);
  for (State x = 0; x < 2; ++x) CHECK(v[x] == doctest::Approx(r.values[x]).epsilon(1e-10));
  CHECK(l1_distance(policy_stationary_measure(r.policy, *model), r.mu_star) < 1e-10);
}

TEST_CASE("average two-state equilibrium") {
  const auto model = build_twostate_average();
  const auto r = solve_mfe(StateMeasure::uniform(2), model, average());
  CHECK(r.mu_star[1] == doctest::Approx(0.629774012105548).epsilon(1e-9));
  CHECK(r.policy.action(0)[0] == doctest::Approx(0.151534610451098).epsilon(1e-9));
  CHECK(r.policy.action(1)[0] == doctest::Approx(0.063067440234871).epsilon(1e-9));
  CHECK(r.values[0] == doctest::Approx(0.070026620684408).epsilon(1e-9));
  CHECK(r.values[1] == doctest::Approx(0.187982847639377).epsilon(1e-9));
  REQUIRE(r.average_cost.has_value());
  CHECK(*r.average_cost == doctest::Approx(0.114999410025011).epsilon(1e-9));
  CHECK(r.lambda == std::vector<double>{0.3, 0.5});

  CHECK(acoe_residual(*r.q_star, r.mu_star, model, r.lambda) < 1e-6);
  CHECK(optimal_average_cost(*r.q_star, r.lambda) == doctest::Approx(*r.average_cost));
  CHECK(policy_average_cost(r.policy, r.mu_star, *model) == doctest::Approx(*r.average_cost).epsilon(1e-10));
}

TEST_CASE("optimal average cost of constant costs") {
  for (double c : {0.0, 0.37}) {
    const auto model = constant_model(c, {{0.6, 0.4}, {0.3, 0.7}});
    const auto lambda = effective_minorization(*model);
    const auto q = solve_q_star(StateMeasure::uniform(2), model, average());
    CHECK(optimal_average_cost(q, lambda) == doctest::Approx(c).epsilon(1e-10));
  }
}

TEST_CASE("decoupled equilibria") {
  SUBCASE("mu* is the invariant law and ratios stay below the kernel coefficient") {
    const auto model = build_synthetic_decoupled(three_state_spec());
    const auto r = solve_mfe(StateMeasure::uniform(3), model, discounted(0.5));
    // Invariant law by long power iteration.
    std::vector<double> pi{1.0, 0.0, 0.0};
    const auto& P = model->spec().rows;
    for (int k = 0; k < 5000; ++k) {
      std::vector<double> next(3, 0.0);
      for (int x = 0; x < 3; ++x) {
        for (int y = 0; y < 3; ++y) next[y] += pi[x] * P[x][y];
      }
      pi = next;
    }
    for (State y = 0; y < 3; ++y) CHECK(r.mu_star[y] == doctest::Approx(pi[y]).epsilon(1e-9));
    const double theta = kernel_contraction_coefficient(P);
    for (std::size_t k = 0; k + 3 < r.contraction_estimates.size(); ++k) CHECK(r.contraction_estimates[k] <= theta + 1e-9);
  }
  SUBCASE("rank-one kernel") {
    DecoupledSpec s = three_state_spec();
    s.rows = {{0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}};
    const auto r = solve_mfe(StateMeasure::uniform(3), build_synthetic_decoupled(s), discounted(0.5));
    CHECK(r.mu_star == StateMeasure({0.2, 0.3, 0.5}));
  }
  SUBCASE("policy does not depend on beta") {
    for (double beta : {0.1, 0.5, 0.9}) {
      DecoupledSpec s = three_state_spec();
      s.beta = beta;
      const auto r = solve_mfe(StateMeasure::uniform(3), build_synthetic_decoupled(s), discounted(beta));
      for (State x = 0; x < 3; ++x) CHECK(std::abs(r.policy.action(x)[0] - 0.4) < 1e-8);
    }
  }
}

TEST_CASE("solver diagnostics") {
  const auto model = build_twostate_discounted();
  SolverConfig cfg = discounted(0.2);
  cfg.picard_max = 0;
  CHECK_THROWS_WITH_AS(solve_mfe(StateMeasure::uniform(2), model, cfg), "picard_max = 0: no iterations", ConfigError);
  cfg.picard_max = 2;
  CHECK_THROWS_AS(solve_mfe(StateMeasure::uniform(2), model, cfg), NonConvergenceError);
  cfg = discounted(1.0);
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  // Kernel that reflects deviations from m = 1/2 with gain 1.5.
  const auto expanding = std::make_shared<ClosureModel>(
      2, [](State, double a, const StateMeasure&) { return a * a; },
      [](State, double, const StateMeasure& mu) {
        const double p1 = std::clamp(0.5 - 1.5 * (mu[1] - 0.5), 0.0, 1.0);
        return std::vector<double>{1.0 - p1, p1};
      },
      1.0);
  CHECK_THROWS_AS(solve_mfe(StateMeasure({0.49, 0.51}), expanding, discounted(0.5)), NonContractionError);
}

TEST_CASE("Lipschitz profile of the two-state models") {
  const auto disc = measure_lipschitz_profile(*build_twostate_discounted(), Criterion::discounted, 0.2);
  // Hand derivation: |dc/da| <= max(lambda, 2 gamma - lambda), l1 kernel slope 2|eta - kappa|.
  CHECK(disc.L1 == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(disc.K1 == doctest::Approx(0.2).epsilon(1e-6));
  CHECK(disc.q_lip() == doctest::Approx(0.3 / 0.98).epsilon(1e-6));
  CHECK(disc.q_max() == doctest::Approx(0.55 / 0.8));
  CHECK(disc.k_h1() == doctest::Approx(disc.q_lip() / 0.8));

  auto avg_model = build_twostate_average();
  const auto avg = measure_lipschitz_profile(*avg_model, Criterion::average, 0.5);
  CHECK(avg.L1 == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(avg.K1 == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(avg.lambda_mass == doctest::Approx(0.8));
  CHECK(avg.beta_av() == doctest::Approx(0.2));
  CHECK(avg.beta_tilde() == doctest::Approx(0.6));
  CHECK(avg.q_lip_av() == doctest::Approx(0.5).epsilon(1e-6));

  LipschitzProfile bad = disc;
  bad.rho = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("optimal values are Q_Lip-Lipschitz in the state") {
  const auto model = build_twostate_discounted();
  const auto profile = measure_lipschitz_profile(*model, Criterion::discounted, 0.2);
  std::mt19937_64 g(10);
  for (int i = 0; i < 20; ++i) {
    const auto q = solve_q_star(StateMeasure(oracle::random_simplex(g, 2)), model, discounted(0.2));
    CHECK(std::abs(q_min(q, 0) - q_min(q, 1)) <= profile.q_lip());
  }
}

TEST_CASE("H1 is K_H1-Lipschitz in the measure over 200 random pairs") {
  const auto model = build_twostate_discounted();
  const auto profile = measure_lipschitz_profile(*model, Criterion::discounted, 0.2);
  std::mt19937_64 g(11);
  int violations = 0;
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const StateMeasure mu(oracle::random_simplex(g, 2));
    const StateMeasure nu(oracle::random_simplex(g, 2));
    const double d = l1_distance(mu, nu);
    if (d < 1e-6) continue;
    const auto q1 = solve_q_star(mu, model, discounted(0.2));
    const auto q2 = solve_q_star(nu, model, discounted(0.2));
    const double ratio = sup_distance(q1, q2, 65) / d;
    worst = std::max(worst, ratio);
    if (ratio > profile.k_h1()) ++violations;
  }
  CHECK(violations == 0);
  CHECK(worst > 0.0);
}
