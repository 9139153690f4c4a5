#include "mfg/lipschitz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfg/qfunction.hpp"

namespace mfg {

void LipschitzProfile::validate() const {
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!(L1 > 0.0) || !std::isfinite(L1)) throw ConfigError("profile: L1 must be positive");
  if (!finite_nonneg(K1) || !finite_nonneg(KF)) throw ConfigError("profile: K1 and KF must be finite and >= 0");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("profile: rho must be positive");
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("profile: beta must lie in (0,1)");
  if (!(lambda_mass >= 0.0 && lambda_mass <= 1.0)) throw ConfigError("profile: lambda mass must lie in [0,1]");
  if (!finite_nonneg(cost_bound)) throw ConfigError("profile: cost bound must be finite and >= 0");
  if (!(1.0 - beta * K1 / 2.0 > 0.0)) throw ConfigError("profile: Q_Lip is not finite (beta*K1 >= 2)");
}

double LipschitzProfile::k_h() const {
  return 1.5 * K1 * (1.0 + KF / rho) + K1 * KF * k_h1() / rho;
}

double LipschitzProfile::k_h_av() const {
  return 1.5 * K1 * (1.0 + KF / rho) + K1 * KF * k_h1_av() / rho;
}

namespace {

std::vector<StateMeasure> probe_measures(std::size_t n, std::size_t random_count, Rng& rng) {
  std::vector<StateMeasure> out;
  for (State x = 0; x < n; ++x) out.push_back(StateMeasure::dirac(n, x));
  out.push_back(StateMeasure::uniform(n));
  for (std::size_t r = 0; r < random_count; ++r) {
    std::vector<double> w(n);
    double total = 0.0;
    for (auto& v : w) {
      v = -std::log(1.0 - rng.uniform());
      total += v;
    }
    for (auto& v : w) v /= total;
    out.emplace_back(std::move(w));
  }
  return out;
}

double row_l1(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return s;
}

}  // namespace

LipschitzProfile measure_lipschitz_profile(const MFGModel& model, Criterion criterion, double beta,
                                           const ProfileMeasurementOptions& options) {
  const std::size_t n = model.states().size();
  const ActionSpace& box = model.actions();
  const std::size_t dim = box.dim();
  Rng rng(options.seed);
  const auto measures = probe_measures(n, options.random_measures, rng);
  const auto grid = action_grid(box, options.action_points);

  LipschitzProfile profile;
  profile.beta = beta;
  profile.cost_bound = model.cost_bound();
  if (auto lam = model.minorization()) {
    for (double v : *lam) profile.lambda_mass += v;
  }
  const double xi = criterion == Criterion::discounted ? beta : 1.0;
  const double v_bound = criterion == Criterion::discounted
                             ? profile.cost_bound / (1.0 - beta)
                             : (profile.lambda_mass > 0.0 ? profile.cost_bound / profile.lambda_mass
                                                          : profile.cost_bound);

  double l_x = 0.0, l_a = 0.0, l_mu = 0.0;
  double k_x = 0.0, k_a = 0.0, k_mu = 0.0;
  double f_x = 0.0, f_v = 0.0, f_mu = 0.0;
  double rho = std::numeric_limits<double>::infinity();

  auto cost_grad = [&](State x, const Action& a, const StateMeasure& mu) {
    std::vector<double> out(dim);
    model.cost_gradient(x, a, mu, out);
    return out;
  };
  auto norm = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return std::sqrt(s);
  };

  for (const Action& a : grid) {
    for (std::size_t mi = 0; mi < measures.size(); ++mi) {
      const StateMeasure& mu = measures[mi];
      std::vector<std::vector<double>> rows(n);
      std::vector<std::vector<std::vector<double>>> jacs(n);
      std::vector<std::vector<double>> cgrads(n);
      for (State x = 0; x < n; ++x) {
        rows[x] = model.transition_probs(x, a, mu);
        jacs[x] = model.transition_jacobian(x, a, mu);
        cgrads[x] = cost_grad(x, a, mu);

        l_a = std::max(l_a, norm(cgrads[x]));
        double jac_sum = 0.0;
        for (const auto& jy : jacs[x]) jac_sum += norm(jy);
        k_a = std::max(k_a, jac_sum);
        f_v = std::max(f_v, xi * jac_sum);
      }
      for (State x = 0; x < n; ++x) {
        for (State z = x + 1; z < n; ++z) {
          l_x = std::max(l_x, std::abs(model.cost(x, a, mu) - model.cost(z, a, mu)));
          k_x = std::max(k_x, row_l1(rows[x], rows[z]));
          std::vector<double> dc(dim);
          for (std::size_t i = 0; i < dim; ++i) dc[i] = cgrads[x][i] - cgrads[z][i];
          double dp = 0.0;
          for (State y = 0; y < n; ++y) {
            std::vector<double> d(dim);
            for (std::size_t i = 0; i < dim; ++i) d[i] = jacs[x][y][i] - jacs[z][y][i];
            dp += norm(d);
          }
          f_x = std::max(f_x, norm(dc) + xi * v_bound * dp);
        }
      }
      for (std::size_t mj = mi + 1; mj < measures.size(); ++mj) {
        const StateMeasure& nu = measures[mj];
        const double dist = l1_distance(mu, nu);
        if (dist <= 0.0) continue;
        for (State x = 0; x < n; ++x) {
          l_mu = std::max(l_mu, std::abs(model.cost(x, a, mu) - model.cost(x, a, nu)) / dist);
          k_mu = std::max(k_mu, row_l1(rows[x], model.transition_probs(x, a, nu)) / dist);
          const auto cg = cost_grad(x, a, nu);
          const auto jn = model.transition_jacobian(x, a, nu);
          std::vector<double> dc(dim);
          for (std::size_t i = 0; i < dim; ++i) dc[i] = cgrads[x][i] - cg[i];
          double dp = 0.0;
          for (State y = 0; y < n; ++y) {
            std::vector<double> d(dim);
            for (std::size_t i = 0; i < dim; ++i) d[i] = jacs[x][y][i] - jn[y][i];
            dp += norm(d);
          }
          f_mu = std::max(f_mu, (norm(dc) + xi * v_bound * dp) / dist);
        }
      }
    }
  }

  // Strong convexity: second differences of F along each axis at the grid
  // nodes, for value vectors at the corners of [-v_bound, v_bound]^X.
  const double h = 1e-4;
  const std::size_t corners = n <= 12 ? (std::size_t{1} << n) : 2;
  for (const StateMeasure& mu : measures) {
    for (State x = 0; x < n; ++x) {
      for (std::size_t mask = 0; mask < corners; ++mask) {
        std::vector<double> v(n);
        for (State y = 0; y < n; ++y) v[y] = ((mask >> y) & 1U) ? v_bound : -v_bound;
        auto F = [&](const Action& a) {
          double s = model.cost(x, a, mu);
          const auto p = model.transition_probs(x, a, mu);
          for (State y = 0; y < n; ++y) s += xi * v[y] * p[y];
          return s;
        };
        for (const Action& a : grid) {
          for (std::size_t i = 0; i < dim; ++i) {
            Action lo = a, hi = a;
            lo[i] = std::max(box.lower(i), a[i] - h);
            hi[i] = std::min(box.upper(i), a[i] + h);
            Action mid = a;
            mid[i] = 0.5 * (lo[i] + hi[i]);
            const double step = 0.5 * (hi[i] - lo[i]);
            const double second = (F(hi) - 2.0 * F(mid) + F(lo)) / (step * step);
            rho = std::min(rho, second);
          }
        }
      }
    }
  }

  profile.L1 = std::max({l_x, l_a, l_mu});
  profile.K1 = std::max({k_x, k_a, k_mu});
  profile.KF = std::max({f_x, f_v, f_mu});
  profile.rho = rho;
  return profile;
}

}  // namespace mfg
