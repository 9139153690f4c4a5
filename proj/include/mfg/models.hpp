#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mfg/core.hpp"

namespace mfg {

/// Two-state example: X = {0, 1}, A = [0, 1],
///   p(1|x,a) = l0(1|x) a + l1(1|x) (1 - a),
///   c(x,a,mu) = tau m x + lambda_c (1 - m)(1 - a) + gamma a^2,  m = mu(1).
struct TwoStateParams {
  double eta = 0.6;    // l0(1|0)
  double alpha = 0.3;  // l0(1|1) = 1 - alpha
  double kappa = 0.7;  // l1(1|0)
  double xi = 0.3;     // l1(1|1) = 1 - xi
  double tau = 0.2;
  double lambda_c = 0.2;
  double gamma = 0.15;
  /// Present for the discounted variant only.
  std::optional<double> beta = 0.2;

  void validate() const;
};

TwoStateParams twostate_discounted_params();
TwoStateParams twostate_average_params();

class TwoStateModel final : public MFGModel {
 public:
  TwoStateModel(TwoStateParams params, std::string name,
                std::optional<std::vector<double>> minorization = std::nullopt);

  const TwoStateParams& params() const { return params_; }
  std::optional<double> beta() const { return params_.beta; }

  std::string name() const override { return name_; }
  const StateSpace& states() const override { return states_; }
  const ActionSpace& actions() const override { return actions_; }
  double cost(State x, std::span<const double> a, const StateMeasure& mu) const override;
  double cost_bound() const override;
  std::vector<double> transition_probs(State x, std::span<const double> a,
                                       const StateMeasure& mu) const override;
  std::optional<std::vector<double>> minorization() const override { return minorization_; }
  void cost_gradient(State x, std::span<const double> a, const StateMeasure& mu,
                     std::span<double> out) const override;
  std::vector<std::vector<double>> transition_jacobian(State x, std::span<const double> a,
                                                       const StateMeasure& mu) const override;

 private:
  TwoStateParams params_;
  std::string name_;
  std::optional<std::vector<double>> minorization_;
  StateSpace states_{2};
  ActionSpace actions_ = ActionSpace::interval(0.0, 1.0);
};

std::shared_ptr<TwoStateModel> build_twostate_discounted();
/// Carries the minorization (0.3, 0.5); construction re-checks it on a
/// 256-point action grid.
std::shared_ptr<TwoStateModel> build_twostate_average();

/// Kernel independent of (a, mu); cost c1(x) + weight |a - target|^2.
struct DecoupledSpec {
  std::vector<std::vector<double>> rows;
  std::vector<double> state_cost;
  std::vector<double> action_lower{0.0};
  std::vector<double> action_upper{1.0};
  std::vector<double> action_target{0.5};
  double action_weight = 1.0;
  double beta = 0.5;
  std::optional<std::vector<double>> minorization;

  void validate() const;
};

/// Parses the flat key = value format:
///
///   states = 2
///   row.0 = 0.9 0.1
///   row.1 = 0.2 0.8
///   state_cost = 0.1 0.3
///   action_lower = 0        (optional, default 0)
///   action_upper = 1        (optional, default 1)
///   action_target = 0.4
///   action_weight = 1       (optional)
///   beta = 0.5              (optional)
///   minorization = 0.2 0.1  (optional)
///
/// '#' starts a comment.
DecoupledSpec parse_decoupled_spec(const std::string& text);
DecoupledSpec load_decoupled_spec(const std::filesystem::path& path);

class DecoupledModel final : public MFGModel {
 public:
  explicit DecoupledModel(DecoupledSpec spec, std::string name = "decoupled");

  const DecoupledSpec& spec() const { return spec_; }
  /// Projection of the target onto the box: the optimal action at every state.
  Action optimal_action() const;

  std::string name() const override { return name_; }
  const StateSpace& states() const override { return states_; }
  const ActionSpace& actions() const override { return actions_; }
  double cost(State x, std::span<const double> a, const StateMeasure& mu) const override;
  double cost_bound() const override;
  std::vector<double> transition_probs(State x, std::span<const double> a,
                                       const StateMeasure& mu) const override;
  std::optional<std::vector<double>> minorization() const override { return spec_.minorization; }
  void cost_gradient(State x, std::span<const double> a, const StateMeasure& mu,
                     std::span<double> out) const override;
  std::vector<std::vector<double>> transition_jacobian(State x, std::span<const double> a,
                                                       const StateMeasure& mu) const override;

 private:
  DecoupledSpec spec_;
  std::string name_;
  StateSpace states_;
  ActionSpace actions_;
};

std::shared_ptr<DecoupledModel> build_synthetic_decoupled(DecoupledSpec spec);

/// twostate-discounted | twostate-average | decoupled:<spec-file>
std::shared_ptr<MFGModel> make_model(const std::string& name);

/// Discount attached to a named model, if it has one.
std::optional<double> model_discount(const MFGModel& model);

}  // namespace mfg
