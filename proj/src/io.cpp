#include "mfg/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace mfg::io {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

void write_numbers(std::ostream& out, const std::vector<double>& v) {
  for (double x : v) out << ' ' << format_double(x);
}

class RecordReader {
 public:
  RecordReader(std::istream& in, std::string kind) : in_(in), kind_(std::move(kind)) {
    const auto header = next_line();
    if (header != kind_ + " v1") throw IoError("expected '" + kind_ + " v1' header, got '" + header + "'");
  }

  /// Tokens after `key` on the next line.
  std::vector<std::string> field(const std::string& key) {
    const std::string line = next_line();
    std::istringstream ss(line);
    std::string first;
    ss >> first;
    if (first != key) throw IoError(kind_ + ": expected field '" + key + "', got '" + line + "'");
    std::vector<std::string> tokens;
    std::string t;
    while (ss >> t) tokens.push_back(t);
    return tokens;
  }

  std::vector<double> numbers(const std::string& key) { return to_numbers(field(key)); }

  double number(const std::string& key) {
    const auto v = numbers(key);
    if (v.size() != 1) throw IoError(kind_ + ": field '" + key + "' must hold one number");
    return v[0];
  }

  std::optional<double> optional_number(const std::string& key) {
    const auto t = field(key);
    if (t.size() == 1 && t[0] == "none") return std::nullopt;
    const auto v = to_numbers(t);
    if (v.size() != 1) throw IoError(kind_ + ": field '" + key + "' must hold one number or none");
    return v[0];
  }

  std::string word(const std::string& key) {
    const auto t = field(key);
    if (t.size() != 1) throw IoError(kind_ + ": field '" + key + "' must hold one word");
    return t[0];
  }

  std::size_t count(const std::string& key) {
    const double v = number(key);
    if (v < 0.0 || v != static_cast<double>(static_cast<std::size_t>(v)))
      throw IoError(kind_ + ": field '" + key + "' must be a count");
    return static_cast<std::size_t>(v);
  }

  /// "key index values..." with the expected index.
  std::vector<double> indexed(const std::string& key, std::size_t index) {
    const auto v = numbers(key);
    if (v.empty() || v[0] != static_cast<double>(index))
      throw IoError(kind_ + ": expected '" + key + " " + std::to_string(index) + "'");
    return {v.begin() + 1, v.end()};
  }

  void finish() {
    if (next_line() != "end") throw IoError(kind_ + ": missing 'end'");
    for (std::string rest; std::getline(in_, rest);) {
      if (rest.find_first_not_of(" \t\r") != std::string::npos) throw IoError(kind_ + ": content after 'end'");
    }
  }

  /// Runs `f`, reporting invalid contents as a malformed record.
  template <class F>
  auto build(F&& f) const {
    try {
      return f();
    } catch (const IoError&) {
      throw;
    } catch (const Error& e) {
      throw IoError(kind_ + ": " + e.what());
    }
  }

  std::vector<double> to_numbers(const std::vector<std::string>& tokens) const {
    std::vector<double> out;
    for (const auto& t : tokens) {
      try {
        std::size_t used = 0;
        out.push_back(std::stod(t, &used));
        if (used != t.size()) throw std::invalid_argument(t);
      } catch (const std::exception&) {
        throw IoError(kind_ + ": cannot parse number '" + t + "'");
      }
    }
    return out;
  }

 private:
  std::string next_line() {
    std::string line;
    while (std::getline(in_, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return line;
    }
    throw IoError(kind_ + ": unexpected end of input");
  }

  std::istream& in_;
  std::string kind_;
};

const char* basis_kind_name(BasisKind k) { return k == BasisKind::polynomial ? "polynomial" : "radial"; }

void write_box(std::ostream& out, const ActionSpace& actions) {
  out << "action_lower";
  write_numbers(out, actions.lower());
  out << "\naction_upper";
  write_numbers(out, actions.upper());
  out << '\n';
}

}  // namespace

void write_qfunction(std::ostream& out, const BasisQFunction& q) {
  const BasisSpec& b = q.basis();
  out << "mfg-qfunction v1\n";
  out << "states " << q.num_states() << '\n';
  write_box(out, q.actions());
  out << "basis " << basis_kind_name(b.kind) << '\n';
  out << "dim " << b.dim << '\n';
  out << "degree " << b.degree << '\n';
  out << "width " << format_double(b.width) << '\n';
  out << "centers " << b.centers.size() << '\n';
  for (std::size_t j = 0; j < b.centers.size(); ++j) {
    out << "center " << j;
    write_numbers(out, b.centers[j]);
    out << '\n';
  }
  out << "clamp " << (q.clamp() ? format_double(*q.clamp()) : std::string("none")) << '\n';
  for (State x = 0; x < q.num_states(); ++x) {
    out << "coeffs " << x;
    write_numbers(out, q.coeffs()[x]);
    out << '\n';
  }
  out << "end\n";
}

BasisQFunction read_qfunction(std::istream& in) {
  RecordReader r(in, "mfg-qfunction");
  const std::size_t n = r.count("states");
  const auto lower = r.numbers("action_lower");
  const auto upper = r.numbers("action_upper");
  BasisSpec spec;
  const std::string kind = r.word("basis");
  if (kind == "polynomial") {
    spec.kind = BasisKind::polynomial;
  } else if (kind == "radial") {
    spec.kind = BasisKind::radial;
  } else {
    throw IoError("mfg-qfunction: unknown basis '" + kind + "'");
  }
  spec.dim = r.count("dim");
  spec.degree = r.count("degree");
  spec.width = r.number("width");
  const std::size_t k = r.count("centers");
  for (std::size_t j = 0; j < k; ++j) spec.centers.push_back(r.indexed("center", j));
  const auto clamp = r.optional_number("clamp");
  std::vector<std::vector<double>> coeffs;
  for (State x = 0; x < n; ++x) coeffs.push_back(r.indexed("coeffs", x));
  r.finish();
  return r.build([&] { return BasisQFunction(StateSpace(n), ActionSpace(lower, upper), spec, std::move(coeffs), clamp); });
}

void write_policy(std::ostream& out, const DeterministicPolicy& policy, const ActionSpace& actions) {
  out << "mfg-policy v1\n";
  out << "states " << policy.num_states() << '\n';
  write_box(out, actions);
  for (State x = 0; x < policy.num_states(); ++x) {
    out << "action " << x;
    write_numbers(out, policy.action(x));
    out << '\n';
  }
  out << "end\n";
}

DeterministicPolicy read_policy(std::istream& in) {
  RecordReader r(in, "mfg-policy");
  const std::size_t n = r.count("states");
  const auto lower = r.numbers("action_lower");
  const auto upper = r.numbers("action_upper");
  std::vector<Action> actions;
  for (State x = 0; x < n; ++x) actions.push_back(r.indexed("action", x));
  r.finish();
  return r.build([&] { return DeterministicPolicy(ActionSpace(lower, upper), std::move(actions)); });
}

DeterministicPolicy EquilibriumRecord::deterministic_policy() const {
  return DeterministicPolicy(ActionSpace(lower, upper), policy);
}

EquilibriumRecord make_record(const EquilibriumResult& result, const std::string& model, std::optional<double> beta,
                              const ActionSpace& actions) {
  EquilibriumRecord rec;
  rec.model = model;
  rec.criterion = result.criterion;
  rec.beta = result.criterion == Criterion::discounted ? beta : std::nullopt;
  rec.mu_star.assign(result.mu_star.probs().begin(), result.mu_star.probs().end());
  rec.lower = actions.lower();
  rec.upper = actions.upper();
  rec.policy = result.policy.actions();
  rec.values = result.values;
  rec.residual_measure = result.residual_measure;
  rec.residual_bellman = result.residual_bellman;
  rec.iterations = result.iterations;
  rec.contraction_estimates = result.contraction_estimates;
  rec.lambda = result.lambda;
  rec.average_cost = result.average_cost;
  return rec;
}

void write_equilibrium(std::ostream& out, const EquilibriumRecord& rec) {
  out << "mfg-equilibrium v1\n";
  out << "model " << rec.model << '\n';
  out << "criterion " << to_string(rec.criterion) << '\n';
  out << "beta " << (rec.beta ? format_double(*rec.beta) : std::string("none")) << '\n';
  out << "states " << rec.mu_star.size() << '\n';
  out << "action_lower";
  write_numbers(out, rec.lower);
  out << "\naction_upper";
  write_numbers(out, rec.upper);
  out << "\nmu_star";
  write_numbers(out, rec.mu_star);
  out << "\nvalues";
  write_numbers(out, rec.values);
  out << '\n';
  for (std::size_t x = 0; x < rec.policy.size(); ++x) {
    out << "action " << x;
    write_numbers(out, rec.policy[x]);
    out << '\n';
  }
  out << "residual_measure " << format_double(rec.residual_measure) << '\n';
  out << "residual_bellman " << format_double(rec.residual_bellman) << '\n';
  out << "iterations " << rec.iterations << '\n';
  out << "contraction_estimates " << rec.contraction_estimates.size();
  write_numbers(out, rec.contraction_estimates);
  out << "\nlambda";
  if (rec.lambda.empty()) out << " none";
  write_numbers(out, rec.lambda);
  out << "\naverage_cost " << (rec.average_cost ? format_double(*rec.average_cost) : std::string("none")) << '\n';
  out << "end\n";
}

EquilibriumRecord read_equilibrium(std::istream& in) {
  RecordReader r(in, "mfg-equilibrium");
  EquilibriumRecord rec;
  rec.model = r.word("model");
  const std::string criterion = r.word("criterion");
  rec.criterion = r.build([&] { return parse_criterion(criterion); });
  rec.beta = r.optional_number("beta");
  const std::size_t n = r.count("states");
  rec.lower = r.numbers("action_lower");
  rec.upper = r.numbers("action_upper");
  rec.mu_star = r.numbers("mu_star");
  rec.values = r.numbers("values");
  if (rec.mu_star.size() != n || rec.values.size() != n) throw IoError("mfg-equilibrium: state count mismatch");
  for (State x = 0; x < n; ++x) rec.policy.push_back(r.indexed("action", x));
  rec.residual_measure = r.number("residual_measure");
  rec.residual_bellman = r.number("residual_bellman");
  rec.iterations = r.count("iterations");
  const auto ratios = r.numbers("contraction_estimates");
  if (ratios.empty() || ratios[0] != static_cast<double>(ratios.size() - 1))
    throw IoError("mfg-equilibrium: contraction_estimates count mismatch");
  rec.contraction_estimates.assign(ratios.begin() + 1, ratios.end());
  const auto lam = r.field("lambda");
  if (!(lam.size() == 1 && lam[0] == "none")) rec.lambda = r.to_numbers(lam);
  rec.average_cost = r.optional_number("average_cost");
  r.finish();
  r.build([&] { return rec.deterministic_policy(); });
  return rec;
}

DeterministicPolicy load_any_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  in.seekg(0);
  if (header.rfind("mfg-policy", 0) == 0) return read_policy(in);
  if (header.rfind("mfg-equilibrium", 0) == 0) return read_equilibrium(in).deterministic_policy();
  if (header.rfind("mfg-qfunction", 0) == 0) return greedy_policy(read_qfunction(in));
  throw IoError(path.string() + " is not a policy, equilibrium or Q-function record");
}

void write_contraction_csv(std::ostream& out, const EquilibriumResult& result) {
  out << "iteration,l1_step,ratio\n";
  for (std::size_t k = 0; k < result.steps.size(); ++k) {
    out << k + 1 << ',' << format_double(result.steps[k]) << ',';
    if (k > 0 && k - 1 < result.contraction_estimates.size()) out << format_double(result.contraction_estimates[k - 1]);
    out << '\n';
  }
}

void write_trace_csv(std::ostream& out, const LearningTrace& trace) {
  const std::size_t n = trace.measures.front().size();
  out << "k,l1_step,fit_residual";
  for (std::size_t x = 0; x < n; ++x) out << ",mu_" << x;
  out << '\n';
  for (std::size_t k = 0; k < trace.measures.size(); ++k) {
    out << k << ',';
    if (k < trace.steps.size()) out << format_double(trace.steps[k]);
    out << ',';
    if (k < trace.fit_residuals.size()) out << format_double(trace.fit_residuals[k]);
    for (double p : trace.measures[k].probs()) out << ',' << format_double(p);
    out << '\n';
  }
}

void write_measure_comparison_csv(std::ostream& out, const LearningTrace& trace, const StateMeasure& mu_star) {
  out << "k,l1_gap\n";
  for (std::size_t k = 0; k < trace.measures.size(); ++k)
    out << k << ',' << format_double(l1_distance(trace.measures[k], mu_star)) << '\n';
}

void write_policy_comparison_csv(std::ostream& out, const DeterministicPolicy& learned,
                                 const DeterministicPolicy& exact) {
  if (learned.num_states() != exact.num_states()) throw DimensionError("policies differ in state count");
  out << "state,axis,learned,exact,gap\n";
  for (State x = 0; x < learned.num_states(); ++x) {
    for (std::size_t i = 0; i < learned.action(x).size(); ++i) {
      const double a = learned.action(x)[i];
      const double b = exact.action(x)[i];
      out << x << ',' << i << ',' << format_double(a) << ',' << format_double(b) << ',' << format_double(std::abs(a - b))
          << '\n';
    }
  }
}

void write_q_table_csv(std::ostream& out, const QFunction& q, std::size_t points_per_axis) {
  const auto grid = action_grid(q.actions(), points_per_axis);
  out << "state";
  for (std::size_t i = 0; i < q.actions().dim(); ++i) out << ",action_" << i;
  out << ",q\n";
  for (State x = 0; x < q.num_states(); ++x) {
    for (const Action& a : grid) {
      out << x;
      for (double v : a) out << ',' << format_double(v);
      out << ',' << format_double(q.value(x, a)) << '\n';
    }
  }
}

void write_deviation_header(std::ostream& out) {
  out << "schema_version,policy_id,seed,N,criterion,horizon,replications,baseline_cost,baseline_stderr,"
         "deviated_cost,deviated_stderr,gain,gain_stderr,median_gain,tail_bound,significant\n";
}

void write_deviation_row(std::ostream& out, const DeviationReport& r, const std::string& policy_id) {
  out << kDeviationSchemaVersion << ',' << policy_id << ',' << r.seed << ',' << r.N << ',' << to_string(r.criterion)
      << ',' << r.horizon << ',' << r.replications << ',' << format_double(r.baseline_cost) << ','
      << format_double(r.baseline_stderr) << ',' << format_double(r.deviated_cost) << ','
      << format_double(r.deviated_stderr) << ',' << format_double(r.gain) << ',' << format_double(r.gain_stderr)
      << ',' << format_double(r.median_gain) << ',' << format_double(r.tail_bound) << ','
      << (r.gain > 3.0 * r.gain_stderr ? 1 : 0) << '\n';
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace mfg::io
