#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mfg/basis.hpp"
#include "mfg/exact_solver.hpp"
#include "mfg/learner.hpp"
#include "mfg/nagent.hpp"

namespace mfg::io {

/// Shortest text that reads back to the same double.
std::string format_double(double v);

// Text records. Each starts with "<kind> v1", continues with one
// "key value..." line per field in a fixed order and ends with "end".

void write_qfunction(std::ostream& out, const BasisQFunction& q);
BasisQFunction read_qfunction(std::istream& in);

void write_policy(std::ostream& out, const DeterministicPolicy& policy, const ActionSpace& actions);
DeterministicPolicy read_policy(std::istream& in);

/// What an equilibrium record stores; the exact Q-function is recoverable
/// from (model, mu_star, values, criterion) via solve_q_star.
struct EquilibriumRecord {
  std::string model;
  Criterion criterion = Criterion::discounted;
  std::optional<double> beta;
  std::vector<double> mu_star;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<Action> policy;
  std::vector<double> values;
  double residual_measure = 0.0;
  double residual_bellman = 0.0;
  std::size_t iterations = 0;
  std::vector<double> contraction_estimates;
  std::vector<double> lambda;
  std::optional<double> average_cost;

  DeterministicPolicy deterministic_policy() const;
};

EquilibriumRecord make_record(const EquilibriumResult& result, const std::string& model, std::optional<double> beta,
                              const ActionSpace& actions);
void write_equilibrium(std::ostream& out, const EquilibriumRecord& record);
EquilibriumRecord read_equilibrium(std::istream& in);

/// Reads a policy from an mfg-policy, mfg-equilibrium or mfg-qfunction
/// record (the last one via its greedy policy).
DeterministicPolicy load_any_policy(const std::filesystem::path& path);

// CSV writers. Rows are emitted in a fixed order; no timestamps.

/// iteration,l1_step,ratio
void write_contraction_csv(std::ostream& out, const EquilibriumResult& result);
/// k,l1_step,fit_residual,mu_0,...  (row k holds mu_k; the last row has empty step/residual)
void write_trace_csv(std::ostream& out, const LearningTrace& trace);
/// k,l1_gap
void write_measure_comparison_csv(std::ostream& out, const LearningTrace& trace, const StateMeasure& mu_star);
/// state,axis,learned,exact,gap
void write_policy_comparison_csv(std::ostream& out, const DeterministicPolicy& learned,
                                 const DeterministicPolicy& exact);
/// state,action_0,...,q  on a tensor grid
void write_q_table_csv(std::ostream& out, const QFunction& q, std::size_t points_per_axis);

/// One row per (policy, N); `significant` is 1 when gain > 3 * gain_stderr.
inline constexpr int kDeviationSchemaVersion = 1;
void write_deviation_header(std::ostream& out);
void write_deviation_row(std::ostream& out, const DeviationReport& report, const std::string& policy_id);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace mfg::io
