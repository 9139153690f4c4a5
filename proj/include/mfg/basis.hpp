#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mfg/qfunction.hpp"

namespace mfg {

enum class BasisKind { polynomial, radial };

/// Per-state feature map over the action box.
///
/// polynomial: every monomial of total degree <= `degree` in the raw action
/// coordinates, ordered by degree and then lexicographically by exponent
/// (dim 1, degree 2 gives 1, a, a^2).
/// radial: a constant plus one Gaussian bump exp(-|a-c|^2 / (2 w^2)) per center.
struct BasisSpec {
  BasisKind kind = BasisKind::polynomial;
  std::size_t dim = 1;
  std::size_t degree = 2;
  std::vector<Action> centers;
  double width = 0.25;

  static BasisSpec polynomial(std::size_t dim, std::size_t degree);
  static BasisSpec radial(std::vector<Action> centers, double width);

  /// Coefficient count B per state.
  std::size_t size() const;
  void validate() const;

  void features(std::span<const double> a, std::span<double> out) const;
  /// jac[k * dim + i] = d phi_k / d a_i.
  void feature_jacobian(std::span<const double> a, std::span<double> jac) const;

  bool operator==(const BasisSpec&) const = default;

 private:
  std::vector<std::vector<unsigned>> exponents() const;
};

/// Q(x, a) = sum_k coeffs[x][k] phi_k(a).
class BasisQFunction final : public QFunction {
 public:
  BasisQFunction(StateSpace states, ActionSpace actions, BasisSpec basis,
                 std::vector<std::vector<double>> coeffs, std::optional<double> clamp = std::nullopt,
                 MinimizerOptions options = {});

  const BasisSpec& basis() const { return basis_; }
  const std::vector<std::vector<double>>& coeffs() const { return coeffs_; }
  /// Q_m bound applied by consumers of Bellman targets; never to coefficients.
  std::optional<double> clamp() const { return clamp_; }

  double value(State x, std::span<const double> a) const override;
  bool has_gradient() const override { return true; }
  void gradient(State x, std::span<const double> a, std::span<double> out) const override;

 private:
  BasisSpec basis_;
  std::vector<std::vector<double>> coeffs_;
  std::optional<double> clamp_;
};

struct RegressionSample {
  State x = 0;
  Action a;
  /// 1 / (m(A) pi_b(a|x)); must be positive.
  double weight = 1.0;
  double target = 0.0;
};

struct FitDiagnostics {
  std::vector<std::size_t> samples_per_state;
  /// States with no samples; their coefficients are zero.
  std::vector<State> empty_states;
  /// sqrt(sum w r^2 / sum w) over all samples.
  double weighted_rms_residual = 0.0;
};

struct FitResult {
  BasisQFunction q;
  FitDiagnostics diagnostics;
};

struct FitOptions {
  /// Relative ridge: lambda * trace(Phi^T W Phi) / B is added to the diagonal
  /// of the factored system; refinement steps then remove its bias.
  double ridge = 1e-10;
  std::optional<double> clamp;
  MinimizerOptions minimizer;
};

/// Weighted least squares per state over the linear span of `basis`.
/// Throws SingularFitError when a visited state's design matrix has numerical
/// rank below B.
FitResult fit(std::span<const RegressionSample> samples, const StateSpace& states,
              const ActionSpace& actions, const BasisSpec& basis, const FitOptions& options = {});

}  // namespace mfg
