#include <doctest.h>

#include <cmath>
#include <random>

#include "mfg/basis.hpp"
#include "mfg/models.hpp"
#include "mfg/qfunction.hpp"
#include "oracles.hpp"

using namespace mfg;

namespace {

const ActionSpace kUnit = ActionSpace::interval(0.0, 1.0);

LambdaQFunction one_state(std::function<double(double)> f, bool with_gradient = false,
                          std::function<double(double)> df = nullptr) {
  LambdaQFunction::GradientFn g;
  if (with_gradient) g = [df](State, std::span<const double> a, std::span<double> out) { out[0] = df(a[0]); };
  return LambdaQFunction(StateSpace(1), kUnit, [f](State, std::span<const double> a) { return f(a[0]); }, g);
}

std::vector<RegressionSample> samples_of(std::function<double(State, double)> target, std::size_t n_states,
                                         std::size_t per_state, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<RegressionSample> out;
  for (State x = 0; x < n_states; ++x) {
    for (std::size_t i = 0; i < per_state; ++i) {
      const double a = u(g);
      out.push_back({x, {a}, 1.0, target(x, a)});
    }
  }
  return out;
}

double weighted_rss(const std::vector<RegressionSample>& s, const std::function<double(const RegressionSample&)>& f) {
  double r = 0.0;
  for (const auto& e : s) r += e.weight * (e.target - f(e)) * (e.target - f(e));
  return r;
}

}  // namespace

TEST_CASE("basis layout") {
  CHECK(BasisSpec::polynomial(1, 2).size() == 3);
  CHECK(BasisSpec::polynomial(2, 2).size() == 6);
  CHECK(BasisSpec::polynomial(3, 1).size() == 4);
  CHECK(BasisSpec::radial({{0.0}, {0.5}, {1.0}}, 0.3).size() == 4);
  CHECK_THROWS_AS(BasisSpec::radial({}, 0.3).validate(), ConfigError);
  CHECK_THROWS_AS(BasisSpec::radial({{0.0}}, 0.0).validate(), ConfigError);

  std::vector<double> phi(3);
  BasisSpec::polynomial(1, 2).features(std::vector<double>{0.5}, phi);
  CHECK(phi == std::vector<double>{1.0, 0.5, 0.25});

  std::vector<double> phi2(6);
  BasisSpec::polynomial(2, 2).features(std::vector<double>{2.0, 3.0}, phi2);
  // 1, a1, a0, a1^2, a0 a1, a0^2 in some fixed order: check the multiset.
  std::sort(phi2.begin(), phi2.end());
  CHECK(phi2 == std::vector<double>{1.0, 2.0, 3.0, 4.0, 6.0, 9.0});
}

TEST_CASE("basis jacobian matches finite differences") {
  for (const BasisSpec& b : {BasisSpec::polynomial(2, 3), BasisSpec::radial({{0.2, 0.1}, {0.7, 0.9}}, 0.4)}) {
    const std::vector<double> a{0.31, 0.67};
    std::vector<double> jac(b.size() * 2), plus(b.size()), minus(b.size());
    b.feature_jacobian(a, jac);
    for (std::size_t i = 0; i < 2; ++i) {
      auto ap = a, am = a;
      ap[i] += 1e-6;
      am[i] -= 1e-6;
      b.features(ap, plus);
      b.features(am, minus);
      for (std::size_t k = 0; k < b.size(); ++k)
        CHECK(jac[k * 2 + i] == doctest::Approx((plus[k] - minus[k]) / 2e-6).epsilon(1e-6));
    }
  }
}

TEST_CASE("fit recovers representable targets") {
  const auto s = samples_of([](State x, double a) { return 1.0 + x + 2.0 * a - 3.0 * a * a; }, 2, 40, 1);
  const auto r = fit(s, StateSpace(2), kUnit, BasisSpec::polynomial(1, 2));
  for (const auto& e : s) CHECK(r.q.value(e.x, e.a) == doctest::Approx(e.target).epsilon(1e-9));
  CHECK(r.diagnostics.weighted_rms_residual < 1e-9);
  CHECK(r.diagnostics.samples_per_state == std::vector<std::size_t>{40, 40});
}

TEST_CASE("constant targets give a constant fit") {
  const auto s = samples_of([](State, double) { return 7.0; }, 1, 30, 2);
  const auto r = fit(s, StateSpace(1), kUnit, BasisSpec::polynomial(1, 2));
  for (double a : {0.0, 0.3, 1.0}) CHECK(r.q.value(0, std::vector<double>{a}) == doctest::Approx(7.0).epsilon(1e-10));
}

TEST_CASE("fit reproduces the two-state cost, which is quadratic in a") {
  const auto model = build_twostate_discounted();
  const auto M = oracle::discounted_model();
  const StateMeasure mu({0.4, 0.6});
  std::vector<RegressionSample> s;
  for (State x = 0; x < 2; ++x) {
    for (int i = 0; i <= 64; ++i) {
      const double a = i / 64.0;
      s.push_back({x, {a}, 1.0, model->cost(x, std::vector<double>{a}, mu)});
    }
  }
  const auto r = fit(s, StateSpace(2), kUnit, BasisSpec::polynomial(1, 2));
  for (int x = 0; x < 2; ++x) {
    for (double a : {0.0, 0.123, 0.5, 0.877, 1.0})
      CHECK(std::abs(r.q.value(x, std::vector<double>{a}) - M.cost(x, a, 0.6)) < 1e-8);
  }
}

TEST_CASE("fit is invariant to a common weight scale") {
  std::mt19937_64 g(8);
  std::uniform_real_distribution<double> w(0.1, 3.0);
  auto s = samples_of([](State x, double a) { return std::sin(3 * a) + 0.1 * x; }, 2, 50, 3);
  for (auto& e : s) e.weight = w(g);
  auto scaled = s;
  for (auto& e : scaled) e.weight *= 1234.5;
  const auto a = fit(s, StateSpace(2), kUnit, BasisSpec::polynomial(1, 2));
  const auto b = fit(scaled, StateSpace(2), kUnit, BasisSpec::polynomial(1, 2));
  for (State x = 0; x < 2; ++x) {
    for (std::size_t k = 0; k < 3; ++k)
      CHECK(b.q.coeffs()[x][k] == doctest::Approx(a.q.coeffs()[x][k]).epsilon(1e-9));
  }
}

TEST_CASE("fitted residual is no worse than any single basis element") {
  const auto s = samples_of([](State, double a) { return std::exp(a) - 0.5 * std::cos(5 * a); }, 1, 80, 4);
  const BasisSpec basis = BasisSpec::polynomial(1, 3);
  const auto r = fit(s, StateSpace(1), kUnit, basis);
  const double fitted = weighted_rss(s, [&](const RegressionSample& e) { return r.q.value(0, e.a); });
  std::vector<double> phi(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    // Best scalar multiple of phi_k.
    double num = 0.0, den = 0.0;
    for (const auto& e : s) {
      basis.features(e.a, phi);
      num += e.weight * phi[k] * e.target;
      den += e.weight * phi[k] * phi[k];
    }
    const double c = num / den;
    const double single = weighted_rss(s, [&](const RegressionSample& e) {
      basis.features(e.a, phi);
      return c * phi[k];
    });
    CHECK(fitted <= single);
  }
}

TEST_CASE("fit diagnostics and errors") {
  SUBCASE("unvisited state gets zero coefficients") {
    const auto s = samples_of([](State, double a) { return a; }, 1, 20, 5);
    const auto r = fit(s, StateSpace(3), kUnit, BasisSpec::polynomial(1, 2));
    CHECK(r.diagnostics.empty_states == std::vector<State>{1, 2});
    CHECK(r.q.coeffs()[2] == std::vector<double>{0.0, 0.0, 0.0});
  }
  SUBCASE("duplicated samples survive") {
    auto s = samples_of([](State, double a) { return a * a; }, 1, 10, 6);
    const auto copy = s;
    s.insert(s.end(), copy.begin(), copy.end());
    CHECK_NOTHROW(fit(s, StateSpace(1), kUnit, BasisSpec::polynomial(1, 2)));
  }
  SUBCASE("a single distinct action cannot determine a quadratic") {
    std::vector<RegressionSample> s(10, RegressionSample{0, {0.5}, 1.0, 1.0});
    CHECK_THROWS_AS(fit(s, StateSpace(1), kUnit, BasisSpec::polynomial(1, 2)), SingularFitError);
  }
  SUBCASE("bad inputs") {
    std::vector<RegressionSample> s{{0, {0.5}, 0.0, 1.0}};
    CHECK_THROWS_AS(fit(s, StateSpace(1), kUnit, BasisSpec::polynomial(1, 2)), ConfigError);
    s = {{3, {0.5}, 1.0, 1.0}};
    CHECK_THROWS_AS(fit(s, StateSpace(1), kUnit, BasisSpec::polynomial(1, 2)), DimensionError);
    s = {{0, {0.5}, 1.0, NAN}};
    CHECK_THROWS_AS(fit(s, StateSpace(1), kUnit, BasisSpec::polynomial(1, 2)), ConfigError);
  }
  SUBCASE("clamp is carried, not applied to coefficients") {
    const auto s = samples_of([](State, double a) { return 100.0 * a; }, 1, 20, 7);
    FitOptions opt;
    opt.clamp = 2.0;
    const auto r = fit(s, StateSpace(1), kUnit, BasisSpec::polynomial(1, 2), opt);
    CHECK(r.q.clamp() == 2.0);
    CHECK(r.q.value(0, std::vector<double>{1.0}) == doctest::Approx(100.0).epsilon(1e-8));
  }
}

TEST_CASE("q_min examples") {
  CHECK(std::abs(q_min(one_state([](double a) { return a * a; }), 0)) < 1e-12);
  const auto lin_quad = one_state([](double a) { return 0.2 * (1 - a) + 0.15 * a * a; });
  CHECK(q_min(lin_quad, 0) == doctest::Approx(0.2 - 0.2 * (2.0 / 3.0) + 0.15 * (4.0 / 9.0)).epsilon(1e-12));
  CHECK(q_min(one_state([](double) { return 5.0; }), 0) == 5.0);
}

TEST_CASE("q_argmin examples") {
  CHECK(std::abs(q_argmin(one_state([](double a) { return (a - 0.3) * (a - 0.3); }), 0)[0] - 0.3) < 1e-8);
  CHECK(std::abs(q_argmin(one_state([](double a) { return 0.2 * (1 - a) + 0.15 * a * a; }), 0)[0] - 2.0 / 3.0) <
        1e-8);
  CHECK(q_argmin(one_state([](double a) { return -a; }), 0)[0] == 1.0);
}

TEST_CASE("ties go to the lexicographically smallest minimizer") {
  CHECK(q_argmin(one_state([](double) { return 1.0; }), 0)[0] == 0.0);
  const auto wells = one_state([](double a) { return (a - 0.25) * (a - 0.25) * (a - 0.75) * (a - 0.75); });
  CHECK(std::abs(q_argmin(wells, 0)[0] - 0.25) < 1e-6);

  const LambdaQFunction flat(StateSpace(1), ActionSpace({0.0, 0.0}, {1.0, 1.0}),
                             [](State, std::span<const double>) { return 3.0; });
  CHECK(q_argmin(flat, 0) == Action{0.0, 0.0});
}

TEST_CASE("greedy policy examples") {
  const LambdaQFunction q(StateSpace(2), kUnit, [](State x, std::span<const double> a) {
    const double t = static_cast<double>(x) / 10.0;
    return (a[0] - t) * (a[0] - t);
  });
  const auto pi = greedy_policy(q);
  CHECK(std::abs(pi.action(0)[0]) < 1e-8);
  CHECK(std::abs(pi.action(1)[0] - 0.1) < 1e-8);

  const LambdaQFunction same(StateSpace(3), kUnit,
                             [](State, std::span<const double> a) { return std::cos(4 * a[0]); });
  const auto p2 = greedy_policy(same);
  CHECK(p2.action(0) == p2.action(1));
  CHECK(p2.action(1) == p2.action(2));
}

TEST_CASE("argmin is invariant under adding a constant") {
  std::mt19937_64 g(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double c1 = u(g), c2 = std::abs(u(g)) + 0.05, shift = 50.0 * u(g);
    const auto base = one_state([=](double a) { return c1 * a + c2 * a * a + std::sin(3 * a) * 0.01; });
    const auto moved = one_state([=](double a) { return c1 * a + c2 * a * a + std::sin(3 * a) * 0.01 + shift; });
    CHECK(std::abs(q_argmin(base, 0)[0] - q_argmin(moved, 0)[0]) < 1e-8);
  }
}

TEST_CASE("1000 random strictly convex quadratics: argmin is the clamped vertex") {
  std::mt19937_64 g(31);
  std::uniform_real_distribution<double> curv(0.05, 5.0), vert(-0.5, 1.5), off(-3.0, 3.0);
  int worst_basis = 0, worst_plain = 0;
  for (int i = 0; i < 1000; ++i) {
    const double k = curv(g), v = vert(g), c = off(g);
    const double expected = std::clamp(v, 0.0, 1.0);
    // Basis representation with analytic gradient.
    const BasisQFunction q(StateSpace(1), kUnit, BasisSpec::polynomial(1, 2), {{k * v * v + c, -2 * k * v, k}});
    if (std::abs(q_argmin(q, 0)[0] - expected) > 1e-8) ++worst_basis;
    // Closure without gradient (golden section path).
    const auto plain = one_state([=](double a) { return k * (a - v) * (a - v) + c; });
    if (std::abs(q_argmin(plain, 0)[0] - expected) > 1e-8) ++worst_plain;
  }
  CHECK(worst_basis == 0);
  CHECK(worst_plain == 0);
}

TEST_CASE("multi-dimensional minimization") {
  const ActionSpace box({0.0, 0.0}, {1.0, 2.0});
  std::mt19937_64 g(12);
  std::uniform_real_distribution<double> u(-0.5, 2.5);
  for (int i = 0; i < 50; ++i) {
    const double t0 = u(g), t1 = u(g);
    const LambdaQFunction q(StateSpace(1), box, [=](State, std::span<const double> a) {
      return (a[0] - t0) * (a[0] - t0) + 2.0 * (a[1] - t1) * (a[1] - t1) + 0.5 * (a[0] - t0) * (a[1] - t1);
    });
    const auto m = q.minimize(0);
    // Brute-force reference on a fine grid.
    double best = 1e300;
    for (const auto& a : action_grid(box, 401)) best = std::min(best, q.value(0, a));
    CHECK(m.value <= best + 1e-9);
    CHECK(box.contains(m.action));
  }
}

TEST_CASE("grid Q-functions") {
  const auto g = action_grid(kUnit, 5);
  REQUIRE(g.size() == 5);
  CHECK(g[1][0] == 0.25);
  CHECK(action_grid(ActionSpace({0.0, 0.0}, {1.0, 1.0}), 3).size() == 9);
  CHECK_THROWS_AS(action_grid(kUnit, 1), ConfigError);

  const GridQFunction q(StateSpace(1), kUnit, 3, {{1.0, 0.0, 4.0}});
  CHECK(q.value(0, std::vector<double>{0.25}) == doctest::Approx(0.5));
  CHECK(q.value(0, std::vector<double>{0.75}) == doctest::Approx(2.0));
  CHECK(q_min(q, 0) == 0.0);
  CHECK(q_argmin(q, 0)[0] == 0.5);
  CHECK_THROWS_AS(GridQFunction(StateSpace(1), kUnit, 3, {{1.0, 0.0}}), DimensionError);

  const auto smooth = one_state([](double a) { return a * a; });
  const auto tab = GridQFunction::tabulate(smooth, 101);
  CHECK(sup_distance(tab, smooth, 101) < 1e-15);
  CHECK(sup_distance(tab, smooth, 1001) <= 0.25 * 0.01 * 0.01 + 1e-15);
}

TEST_CASE("sup and span distances") {
  const auto a = one_state([](double x) { return x; });
  const auto b = one_state([](double x) { return x + 3.0; });
  CHECK(sup_distance(a, b, 11) == doctest::Approx(3.0));
  CHECK(span_distance(a, b, 11) == doctest::Approx(0.0));
}
