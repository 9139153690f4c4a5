#include "mfg/basis.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <functional>

namespace mfg {

namespace {

// Exponent vectors of total degree `total` in `dim` variables, descending
// lexicographic order.
void exponents_of_degree(std::size_t dim, unsigned total, std::vector<unsigned>& current,
                         std::size_t axis, std::vector<std::vector<unsigned>>& out) {
  if (axis + 1 == dim) {
    current[axis] = total;
    out.push_back(current);
    return;
  }
  for (unsigned e = total + 1; e-- > 0;) {
    current[axis] = e;
    exponents_of_degree(dim, total - e, current, axis + 1, out);
  }
}

double int_pow(double base, unsigned e) {
  double r = 1.0;
  for (unsigned i = 0; i < e; ++i) r *= base;
  return r;
}

}  // namespace

BasisSpec BasisSpec::polynomial(std::size_t dim, std::size_t degree) {
  BasisSpec spec;
  spec.kind = BasisKind::polynomial;
  spec.dim = dim;
  spec.degree = degree;
  spec.validate();
  return spec;
}

BasisSpec BasisSpec::radial(std::vector<Action> centers, double width) {
  BasisSpec spec;
  spec.kind = BasisKind::radial;
  spec.dim = centers.empty() ? 0 : centers.front().size();
  spec.centers = std::move(centers);
  spec.width = width;
  spec.validate();
  return spec;
}

std::vector<std::vector<unsigned>> BasisSpec::exponents() const {
  std::vector<std::vector<unsigned>> out;
  std::vector<unsigned> current(dim, 0);
  for (unsigned t = 0; t <= degree; ++t) exponents_of_degree(dim, t, current, 0, out);
  return out;
}

std::size_t BasisSpec::size() const {
  if (kind == BasisKind::radial) return 1 + centers.size();
  // C(dim + degree, degree)
  std::size_t n = 1;
  for (std::size_t k = 1; k <= degree; ++k) n = n * (dim + k) / k;
  return n;
}

void BasisSpec::validate() const {
  if (dim == 0) throw ConfigError("basis dimension must be >= 1");
  if (kind == BasisKind::radial) {
    if (centers.empty()) throw ConfigError("radial basis needs at least one center");
    if (!(width > 0.0)) throw ConfigError("radial basis width must be positive");
    for (const Action& c : centers) {
      if (c.size() != dim) throw DimensionError("radial center has wrong dimension");
    }
  }
}

void BasisSpec::features(std::span<const double> a, std::span<double> out) const {
  if (kind == BasisKind::radial) {
    out[0] = 1.0;
    for (std::size_t j = 0; j < centers.size(); ++j) {
      double r2 = 0.0;
      for (std::size_t i = 0; i < dim; ++i) r2 += (a[i] - centers[j][i]) * (a[i] - centers[j][i]);
      out[j + 1] = std::exp(-r2 / (2.0 * width * width));
    }
    return;
  }
  const auto exps = exponents();
  for (std::size_t k = 0; k < exps.size(); ++k) {
    double v = 1.0;
    for (std::size_t i = 0; i < dim; ++i) v *= int_pow(a[i], exps[k][i]);
    out[k] = v;
  }
}

void BasisSpec::feature_jacobian(std::span<const double> a, std::span<double> jac) const {
  if (kind == BasisKind::radial) {
    for (std::size_t i = 0; i < dim; ++i) jac[i] = 0.0;
    for (std::size_t j = 0; j < centers.size(); ++j) {
      double r2 = 0.0;
      for (std::size_t i = 0; i < dim; ++i) r2 += (a[i] - centers[j][i]) * (a[i] - centers[j][i]);
      const double phi = std::exp(-r2 / (2.0 * width * width));
      for (std::size_t i = 0; i < dim; ++i)
        jac[(j + 1) * dim + i] = -phi * (a[i] - centers[j][i]) / (width * width);
    }
    return;
  }
  const auto exps = exponents();
  for (std::size_t k = 0; k < exps.size(); ++k) {
    for (std::size_t i = 0; i < dim; ++i) {
      if (exps[k][i] == 0) {
        jac[k * dim + i] = 0.0;
        continue;
      }
      double v = static_cast<double>(exps[k][i]) * int_pow(a[i], exps[k][i] - 1);
      for (std::size_t j = 0; j < dim; ++j) {
        if (j != i) v *= int_pow(a[j], exps[k][j]);
      }
      jac[k * dim + i] = v;
    }
  }
}

BasisQFunction::BasisQFunction(StateSpace states, ActionSpace actions, BasisSpec basis,
                               std::vector<std::vector<double>> coeffs, std::optional<double> clamp,
                               MinimizerOptions options)
    : QFunction(states, std::move(actions), options),
      basis_(std::move(basis)),
      coeffs_(std::move(coeffs)),
      clamp_(clamp) {
  basis_.validate();
  if (basis_.dim != this->actions().dim()) throw DimensionError("basis and action box disagree on dimension");
  if (coeffs_.size() != states.size()) throw DimensionError("coefficient matrix has wrong number of states");
  for (const auto& row : coeffs_) {
    if (row.size() != basis_.size()) throw DimensionError("coefficient row has wrong length");
  }
}

double BasisQFunction::value(State x, std::span<const double> a) const {
  std::vector<double> phi(basis_.size());
  basis_.features(a, phi);
  const auto& c = coeffs_.at(x);
  double v = 0.0;
  for (std::size_t k = 0; k < phi.size(); ++k) v += c[k] * phi[k];
  return v;
}

void BasisQFunction::gradient(State x, std::span<const double> a, std::span<double> out) const {
  const std::size_t dim = basis_.dim;
  std::vector<double> jac(basis_.size() * dim);
  basis_.feature_jacobian(a, jac);
  const auto& c = coeffs_.at(x);
  for (std::size_t i = 0; i < dim; ++i) {
    double g = 0.0;
    for (std::size_t k = 0; k < basis_.size(); ++k) g += c[k] * jac[k * dim + i];
    out[i] = g;
  }
}

FitResult fit(std::span<const RegressionSample> samples, const StateSpace& states,
              const ActionSpace& actions, const BasisSpec& basis, const FitOptions& options) {
  basis.validate();
  if (basis.dim != actions.dim()) throw DimensionError("basis and action box disagree on dimension");
  const std::size_t n_states = states.size();
  const std::size_t B = basis.size();

  std::vector<std::vector<std::size_t>> by_state(n_states);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.x >= n_states) throw DimensionError("regression sample state out of range");
    if (s.a.size() != actions.dim()) throw DimensionError("regression sample action has wrong dimension");
    if (!(s.weight > 0.0) || !std::isfinite(s.weight)) throw ConfigError("regression weight must be positive");
    if (!std::isfinite(s.target)) throw ConfigError("regression target is not finite");
    by_state[s.x].push_back(i);
  }

  FitDiagnostics diag;
  diag.samples_per_state.resize(n_states);
  std::vector<std::vector<double>> coeffs(n_states, std::vector<double>(B, 0.0));
  double weighted_sq = 0.0;
  double weight_total = 0.0;
  std::vector<double> phi(B);

  for (State x = 0; x < n_states; ++x) {
    const auto& idx = by_state[x];
    diag.samples_per_state[x] = idx.size();
    if (idx.empty()) {
      diag.empty_states.push_back(x);
      continue;
    }
    Eigen::MatrixXd design(idx.size(), B);
    Eigen::VectorXd weights(idx.size());
    Eigen::VectorXd targets(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const auto& s = samples[idx[r]];
      basis.features(s.a, phi);
      for (std::size_t k = 0; k < B; ++k) design(r, k) = phi[k];
      weights(r) = s.weight;
      targets(r) = s.target;
    }

    const Eigen::MatrixXd scaled = weights.cwiseSqrt().asDiagonal() * design;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
    qr.setThreshold(1e-12);
    if (static_cast<std::size_t>(qr.rank()) < B) {
      throw SingularFitError("design matrix for state " + std::to_string(x) + " has rank " +
                             std::to_string(qr.rank()) + " < " + std::to_string(B));
    }

    const Eigen::MatrixXd normal = design.transpose() * weights.asDiagonal() * design;
    const Eigen::VectorXd rhs = design.transpose() * weights.cwiseProduct(targets);
    Eigen::MatrixXd damped = normal;
    damped.diagonal().array() += options.ridge * normal.trace() / static_cast<double>(B);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
    if (ldlt.info() != Eigen::Success) throw SingularFitError("normal equations could not be factored");
    // The damped solve is the starting point; refinement against the undamped
    // system removes the ridge bias once the rank check has passed.
    Eigen::VectorXd c = ldlt.solve(rhs);
    for (int step = 0; step < 3; ++step) c += ldlt.solve(rhs - normal * c);
    if (!c.allFinite()) throw SingularFitError("regression produced non-finite coefficients");

    for (std::size_t k = 0; k < B; ++k) coeffs[x][k] = c(k);
    const Eigen::VectorXd residual = design * c - targets;
    weighted_sq += weights.dot(residual.cwiseProduct(residual));
    weight_total += weights.sum();
  }
  diag.weighted_rms_residual = weight_total > 0.0 ? std::sqrt(weighted_sq / weight_total) : 0.0;

  return {BasisQFunction(states, actions, basis, std::move(coeffs), options.clamp, options.minimizer),
          std::move(diag)};
}

}  // namespace mfg
