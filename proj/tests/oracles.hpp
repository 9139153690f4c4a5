#pragma once

// Independent reference computations for the tests. Nothing here calls the
// solver code under test; the two-state model is re-derived from its formulas.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

struct TwoState {
  double eta, alpha, kappa, xi, tau, lam, gamma;

  double p1(int x, double a) const {
    return x == 0 ? eta * a + kappa * (1.0 - a) : (1.0 - alpha) * a + (1.0 - xi) * (1.0 - a);
  }
  double dp1(int x) const { return x == 0 ? eta - kappa : (1.0 - alpha) - (1.0 - xi); }
  double cost(int x, double a, double m) const {
    return tau * m * x + lam * (1.0 - m) * (1.0 - a) + gamma * a * a;
  }
};

inline TwoState discounted_model() { return {0.6, 0.3, 0.7, 0.3, 0.2, 0.2, 0.15}; }
inline TwoState average_model() { return {0.5, 0.3, 0.7, 0.4, 0.2, 0.1, 0.2}; }

/// Q(x, a) = c(x, a, m) + s * (v0 p0 + v1 p1 - off) is quadratic in a with
/// leading coefficient gamma, so its minimizer over [0, 1] is a clamped vertex.
inline double vertex(const TwoState& M, int x, double m, double s, std::array<double, 2> v) {
  const double b = -M.lam * (1.0 - m) + s * (v[1] - v[0]) * M.dp1(x);
  return std::clamp(-b / (2.0 * M.gamma), 0.0, 1.0);
}

inline double backup(const TwoState& M, int x, double a, double m, double s, std::array<double, 2> v,
                     std::array<double, 2> off) {
  const double p1 = M.p1(x, a);
  return M.cost(x, a, m) + s * (v[0] * (1.0 - p1) + v[1] * p1 - v[0] * off[0] - v[1] * off[1]);
}

struct Solution {
  std::array<double, 2> values{};
  std::array<double, 2> actions{};
};

/// Closed-form value iteration at mean field m = mu(1). Discounted: s = beta,
/// off = 0. Average: s = 1, off = lambda.
inline Solution solve_fixed_mu(const TwoState& M, double m, double s, std::array<double, 2> off) {
  std::array<double, 2> v{0.0, 0.0};
  for (int it = 0; it < 100000; ++it) {
    std::array<double, 2> next{};
    for (int x = 0; x < 2; ++x) next[x] = backup(M, x, vertex(M, x, m, s, v), m, s, v, off);
    const double step = std::max(std::abs(next[0] - v[0]), std::abs(next[1] - v[1]));
    v = next;
    if (step < 1e-16) break;
  }
  return {v, {vertex(M, 0, m, s, v), vertex(M, 1, m, s, v)}};
}

struct Equilibrium {
  double mu1;
  Solution solution;
};

/// Picard iteration on m = mu(1).
inline Equilibrium solve_equilibrium(const TwoState& M, double s, std::array<double, 2> off) {
  double m = 0.5;
  Solution sol{};
  for (int k = 0; k < 10000; ++k) {
    sol = solve_fixed_mu(M, m, s, off);
    const double next = (1.0 - m) * M.p1(0, sol.actions[0]) + m * M.p1(1, sol.actions[1]);
    const double step = std::abs(next - m);
    m = next;
    if (step < 1e-15) break;
  }
  return {m, solve_fixed_mu(M, m, s, off)};
}

/// Brute-force value iteration restricted to a uniform grid of actions.
/// Returns the grid values of Q*(x, .) for both states.
inline std::array<std::vector<double>, 2> grid_q_star(const TwoState& M, double m, double s,
                                                      std::array<double, 2> off, std::size_t points) {
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) grid[i] = static_cast<double>(i) / static_cast<double>(points - 1);
  std::array<double, 2> v{0.0, 0.0};
  std::array<std::vector<double>, 2> q;
  for (int it = 0; it < 100000; ++it) {
    std::array<double, 2> next{1e300, 1e300};
    for (int x = 0; x < 2; ++x) {
      q[x].assign(points, 0.0);
      for (std::size_t i = 0; i < points; ++i) {
        q[x][i] = backup(M, x, grid[i], m, s, v, off);
        next[x] = std::min(next[x], q[x][i]);
      }
    }
    const double step = std::max(std::abs(next[0] - v[0]), std::abs(next[1] - v[1]));
    v = next;
    if (step < 1e-15) break;
  }
  return q;
}

// ---------------------------------------------------------------------------
// Random draws for property tests

inline std::vector<double> random_simplex(std::mt19937_64& g, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(n);
  double s = 0.0;
  for (auto& v : p) s += (v = e(g));
  for (auto& v : p) v /= s;
  return p;
}

inline std::vector<std::vector<double>> random_stochastic(std::mt19937_64& g, std::size_t n) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < n; ++i) rows.push_back(random_simplex(g, n));
  return rows;
}

}  // namespace oracle
