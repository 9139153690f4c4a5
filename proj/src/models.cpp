#include "mfg/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "mfg/qfunction.hpp"

namespace mfg {

namespace {

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

void check_open_unit(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) throw ConfigError(std::string("two-state parameter ") + name + " must lie in (0,1)");
}

}  // namespace

void TwoStateParams::validate() const {
  check_open_unit(eta, "eta");
  check_open_unit(alpha, "alpha");
  check_open_unit(kappa, "kappa");
  check_open_unit(xi, "xi");
  if (!(tau >= 0.0) || !(lambda_c >= 0.0)) throw ConfigError("two-state cost coefficients must be >= 0");
  if (!(gamma > 0.0)) throw ConfigError("two-state gamma must be positive");
  if (beta && !(*beta > 0.0 && *beta < 1.0)) throw ConfigError("two-state beta must lie in (0,1)");
  // Rows are affine in a, so checking the endpoints covers [0,1].
  for (double a : {0.0, 1.0}) {
    if (!in_unit(eta * a + kappa * (1.0 - a)) || !in_unit((1.0 - alpha) * a + (1.0 - xi) * (1.0 - a)))
      throw ConfigError("two-state kernel rows leave [0,1]");
  }
}

TwoStateParams twostate_discounted_params() {
  return TwoStateParams{0.6, 0.3, 0.7, 0.3, 0.2, 0.2, 0.15, 0.2};
}

TwoStateParams twostate_average_params() {
  return TwoStateParams{0.5, 0.3, 0.7, 0.4, 0.2, 0.1, 0.2, std::nullopt};
}

TwoStateModel::TwoStateModel(TwoStateParams params, std::string name,
                             std::optional<std::vector<double>> minorization)
    : params_(params), name_(std::move(name)), minorization_(std::move(minorization)) {
  params_.validate();
  if (minorization_) {
    const auto& lam = *minorization_;
    if (lam.size() != 2) throw DimensionError("two-state minorization needs two entries");
    const double mass = lam[0] + lam[1];
    if (lam[0] < 0.0 || lam[1] < 0.0 || !(mass > 0.0) || mass > 1.0)
      throw MinorizationError("minorization must be a nonzero sub-probability");
    const StateMeasure mu = StateMeasure::uniform(2);  // kernel ignores mu
    for (const Action& a : action_grid(actions_, 256)) {
      for (State x = 0; x < 2; ++x) {
        const auto p = transition_probs(x, a, mu);
        for (State y = 0; y < 2; ++y) {
          if (p[y] < lam[y]) throw MinorizationError("kernel falls below the attached minorization");
        }
      }
    }
  }
}

double TwoStateModel::cost(State x, std::span<const double> a, const StateMeasure& mu) const {
  const double m = mu[1];
  const double u = a[0];
  return params_.tau * m * static_cast<double>(x) + params_.lambda_c * (1.0 - m) * (1.0 - u) +
         params_.gamma * u * u;
}

double TwoStateModel::cost_bound() const { return params_.tau + params_.lambda_c + params_.gamma; }

std::vector<double> TwoStateModel::transition_probs(State x, std::span<const double> a,
                                                    const StateMeasure&) const {
  const double u = a[0];
  const double l0 = x == 0 ? params_.eta : 1.0 - params_.alpha;
  const double l1 = x == 0 ? params_.kappa : 1.0 - params_.xi;
  return {(1.0 - l0) * u + (1.0 - l1) * (1.0 - u), l0 * u + l1 * (1.0 - u)};
}

void TwoStateModel::cost_gradient(State, std::span<const double> a, const StateMeasure& mu,
                                  std::span<double> out) const {
  out[0] = -params_.lambda_c * (1.0 - mu[1]) + 2.0 * params_.gamma * a[0];
}

std::vector<std::vector<double>> TwoStateModel::transition_jacobian(State x, std::span<const double>,
                                                                    const StateMeasure&) const {
  const double l0 = x == 0 ? params_.eta : 1.0 - params_.alpha;
  const double l1 = x == 0 ? params_.kappa : 1.0 - params_.xi;
  return {{l1 - l0}, {l0 - l1}};
}

std::shared_ptr<TwoStateModel> build_twostate_discounted() {
  return std::make_shared<TwoStateModel>(twostate_discounted_params(), "twostate-discounted");
}

std::shared_ptr<TwoStateModel> build_twostate_average() {
  return std::make_shared<TwoStateModel>(twostate_average_params(), "twostate-average",
                                         std::vector<double>{0.3, 0.5});
}

// ---------------------------------------------------------------------------

void DecoupledSpec::validate() const {
  const std::size_t n = rows.size();
  if (n == 0) throw ConfigError("decoupled model needs at least one state");
  for (const auto& r : rows) {
    if (r.size() != n) throw DimensionError("decoupled kernel must be square");
    try {
      StateMeasure check{r};
    } catch (const InvalidMeasure& e) {
      throw ConfigError(std::string("decoupled kernel row is not a probability vector: ") + e.what());
    }
  }
  if (state_cost.size() != n) throw DimensionError("state_cost must have one entry per state");
  for (double c : state_cost) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("state_cost entries must be finite and >= 0");
  }
  const std::size_t dim = action_lower.size();
  if (action_upper.size() != dim || action_target.size() != dim)
    throw DimensionError("action_lower, action_upper and action_target must share a dimension");
  if (!(action_weight > 0.0)) throw ConfigError("action_weight must be positive");
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must lie in (0,1)");
  if (minorization) {
    if (minorization->size() != n) throw DimensionError("minorization must have one entry per state");
    double mass = 0.0;
    for (State y = 0; y < n; ++y) {
      const double l = (*minorization)[y];
      if (l < 0.0) throw MinorizationError("minorization entries must be >= 0");
      for (State x = 0; x < n; ++x) {
        if (rows[x][y] < l) throw MinorizationError("kernel falls below the given minorization");
      }
      mass += l;
    }
    if (!(mass > 0.0) || mass > 1.0) throw MinorizationError("minorization mass must lie in (0,1]");
  }
}

namespace {

std::vector<double> parse_numbers(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  std::vector<double> out;
  std::string token;
  while (in >> token) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw ConfigError("spec key '" + key + "': cannot parse number '" + token + "'");
    }
  }
  if (out.empty()) throw ConfigError("spec key '" + key + "' has no value");
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

DecoupledSpec parse_decoupled_spec(const std::string& text) {
  std::map<std::string, std::vector<double>> entries;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("spec line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (entries.count(key)) throw ConfigError("spec key '" + key + "' given twice");
    entries[key] = parse_numbers(key, line.substr(eq + 1));
  }

  auto take = [&](const std::string& key) -> std::optional<std::vector<double>> {
    auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    auto v = std::move(it->second);
    entries.erase(it);
    return v;
  };
  auto require = [&](const std::string& key) {
    auto v = take(key);
    if (!v) throw ConfigError("spec is missing '" + key + "'");
    return *v;
  };
  auto scalar = [](const std::string& key, const std::vector<double>& v) {
    if (v.size() != 1) throw ConfigError("spec key '" + key + "' must be a single number");
    return v[0];
  };

  DecoupledSpec spec;
  const double n_raw = scalar("states", require("states"));
  if (!(n_raw >= 1.0) || n_raw != std::floor(n_raw)) throw ConfigError("spec 'states' must be a positive integer");
  const auto n = static_cast<std::size_t>(n_raw);
  for (std::size_t x = 0; x < n; ++x) spec.rows.push_back(require("row." + std::to_string(x)));
  spec.state_cost = require("state_cost");
  if (auto v = take("action_lower")) spec.action_lower = *v;
  if (auto v = take("action_upper")) spec.action_upper = *v;
  spec.action_target = require("action_target");
  if (auto v = take("action_weight")) spec.action_weight = scalar("action_weight", *v);
  if (auto v = take("beta")) spec.beta = scalar("beta", *v);
  spec.minorization = take("minorization");
  if (!entries.empty()) throw ConfigError("spec has unknown key '" + entries.begin()->first + "'");
  spec.validate();
  return spec;
}

DecoupledSpec load_decoupled_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model spec " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_decoupled_spec(buffer.str());
}

DecoupledModel::DecoupledModel(DecoupledSpec spec, std::string name)
    : spec_((spec.validate(), std::move(spec))),
      name_(std::move(name)),
      states_(spec_.rows.size()),
      actions_(spec_.action_lower, spec_.action_upper) {}

Action DecoupledModel::optimal_action() const { return actions_.project(spec_.action_target); }

double DecoupledModel::cost(State x, std::span<const double> a, const StateMeasure&) const {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - spec_.action_target[i]) * (a[i] - spec_.action_target[i]);
  return spec_.state_cost.at(x) + spec_.action_weight * d2;
}

double DecoupledModel::cost_bound() const {
  double d2 = 0.0;
  for (std::size_t i = 0; i < actions_.dim(); ++i) {
    const double t = spec_.action_target[i];
    d2 += std::max((actions_.lower(i) - t) * (actions_.lower(i) - t), (actions_.upper(i) - t) * (actions_.upper(i) - t));
  }
  return *std::max_element(spec_.state_cost.begin(), spec_.state_cost.end()) + spec_.action_weight * d2;
}

std::vector<double> DecoupledModel::transition_probs(State x, std::span<const double>,
                                                     const StateMeasure&) const {
  return spec_.rows.at(x);
}

void DecoupledModel::cost_gradient(State, std::span<const double> a, const StateMeasure&,
                                   std::span<double> out) const {
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = 2.0 * spec_.action_weight * (a[i] - spec_.action_target[i]);
}

std::vector<std::vector<double>> DecoupledModel::transition_jacobian(State, std::span<const double>,
                                                                     const StateMeasure&) const {
  return std::vector<std::vector<double>>(states_.size(), std::vector<double>(actions_.dim(), 0.0));
}

std::shared_ptr<DecoupledModel> build_synthetic_decoupled(DecoupledSpec spec) {
  return std::make_shared<DecoupledModel>(std::move(spec));
}

std::shared_ptr<MFGModel> make_model(const std::string& name) {
  if (name == "twostate-discounted") return build_twostate_discounted();
  if (name == "twostate-average") return build_twostate_average();
  const std::string prefix = "decoupled:";
  if (name.rfind(prefix, 0) == 0) {
    const std::string path = name.substr(prefix.size());
    if (path.empty()) throw ConfigError("decoupled model needs a spec file: decoupled:<path>");
    return std::make_shared<DecoupledModel>(load_decoupled_spec(path), name);
  }
  throw ConfigError("unknown model '" + name + "' (expected twostate-discounted, twostate-average or decoupled:<file>)");
}

std::optional<double> model_discount(const MFGModel& model) {
  if (const auto* m = dynamic_cast<const TwoStateModel*>(&model)) return m->beta();
  if (const auto* m = dynamic_cast<const DecoupledModel*>(&model)) return m->spec().beta;
  return std::nullopt;
}

}  // namespace mfg
