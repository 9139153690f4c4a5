#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <utility>

#include "mfg/exact_solver.hpp"
#include "mfg/io.hpp"
#include "mfg/learner.hpp"
#include "mfg/models.hpp"
#include "mfg/nagent.hpp"

#ifndef MFG_VERSION
#define MFG_VERSION "unknown"
#endif

namespace fs = std::filesystem;

namespace mfg::cli {

namespace {

struct Options {
  std::string model = "twostate-discounted";
  std::string criterion;
  double beta = 0.5;
  std::size_t N = 1000;
  std::size_t L = 20;
  std::size_t M = 1000;
  std::size_t K = 20;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::string out_dir = "results";
  double picard_tol = 1e-10;
  std::size_t picard_max = 1000;
  double q_tol = 1e-12;
  std::size_t q_max = 10000;
  std::size_t action_grid = 1025;
  std::string policy;
  std::string exact;
  std::vector<std::size_t> n_list{10, 50, 200};
  std::size_t T = 0;
  std::size_t reps = 200;
  std::string config;

  // Set after parsing.
  bool beta_given = false;
  bool T_given = false;
};

/// Everything a pipeline needs once flags are resolved against the model.
struct Context {
  std::string model_name;
  std::shared_ptr<MFGModel> model;
  Criterion criterion = Criterion::discounted;
  std::optional<double> beta;
  SolverConfig solver;
};

using Snapshot = std::vector<std::pair<std::string, std::string>>;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s + ")";
}

std::vector<double> as_vector(const StateMeasure& mu) { return {mu.probs().begin(), mu.probs().end()}; }

std::string join_counts(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string print_policy(const DeterministicPolicy& policy) {
  std::string s;
  for (State x = 0; x < policy.num_states(); ++x) s += (x ? " " : "") + join(policy.action(x));
  return s;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string render(const std::function<void(std::ostream&)>& writer) {
  std::ostringstream ss;
  writer(ss);
  return ss.str();
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

void write_manifest(const fs::path& dir, const std::string& command, const Snapshot& snapshot,
                    const std::vector<fs::path>& outputs) {
  std::ostringstream m;
  m << "# mfg run manifest; pass it back with --config to rerun\n";
  m << "command = " << command << '\n';
  for (const auto& [k, v] : snapshot) m << k << " = " << v << '\n';
  m << "code_version = " << MFG_VERSION << '\n';
  m << "started_at = " << utc_timestamp() << '\n';
  m << "output = " << (dir / "manifest.txt").generic_string() << '\n';
  for (const auto& p : outputs) m << "output = " << p.generic_string() << '\n';
  ensure_dir(dir);
  io::write_text_file(dir / "manifest.txt", m.str());
}

Context resolve(const Options& o) {
  Context ctx;
  ctx.model_name = o.model;
  ctx.model = make_model(o.model);
  const std::optional<double> model_beta = model_discount(*ctx.model);
  if (o.criterion.empty()) {
    ctx.criterion = model_beta ? Criterion::discounted : Criterion::average;
  } else {
    ctx.criterion = parse_criterion(o.criterion);
  }
  if (ctx.criterion == Criterion::discounted) {
    if (o.beta_given) {
      ctx.beta = o.beta;
    } else if (model_beta) {
      ctx.beta = model_beta;
    } else {
      throw ConfigError("model " + o.model + " has no discount factor; pass --beta");
    }
    if (!(*ctx.beta > 0.0 && *ctx.beta < 1.0)) throw ConfigError("beta = " + num(*ctx.beta) + ": must lie in (0,1)");
  }
  ctx.solver.criterion = ctx.criterion;
  ctx.solver.beta = ctx.beta.value_or(0.5);
  ctx.solver.picard_tol = o.picard_tol;
  ctx.solver.picard_max = o.picard_max;
  ctx.solver.q_iter_tol = o.q_tol;
  ctx.solver.q_iter_max = o.q_max;
  ctx.solver.action_grid = o.action_grid;
  ctx.solver.validate();
  return ctx;
}

Snapshot model_snapshot(const Context& ctx, const Options& o) {
  Snapshot s{{"model", ctx.model_name}, {"criterion", to_string(ctx.criterion)}};
  if (ctx.beta) s.emplace_back("beta", io::format_double(*ctx.beta));
  s.emplace_back("picard-tol", io::format_double(o.picard_tol));
  s.emplace_back("picard-max", std::to_string(o.picard_max));
  s.emplace_back("q-tol", io::format_double(o.q_tol));
  s.emplace_back("q-max", std::to_string(o.q_max));
  s.emplace_back("action-grid", std::to_string(o.action_grid));
  return s;
}

void add_learn_snapshot(Snapshot& s, const Options& o) {
  s.emplace_back("N", std::to_string(o.N));
  s.emplace_back("L", std::to_string(o.L));
  s.emplace_back("M", std::to_string(o.M));
  s.emplace_back("K", std::to_string(o.K));
}

std::size_t nash_horizon(const Context& ctx, const Options& o) {
  if (o.T_given) return o.T;
  return ctx.criterion == Criterion::discounted ? discounted_horizon(*ctx.beta, ctx.model->cost_bound(), 1e-4) : 500;
}

// ---------------------------------------------------------------------------
// Pipelines

std::vector<std::string> solve_outputs() { return {"equilibrium.txt", "contraction.csv", "q_table.csv"}; }

std::vector<std::string> learn_outputs(const Options& o) {
  std::vector<std::string> files{"trace.csv", "comparison_measure.csv"};
  if (o.K > 0) {
    files.push_back("policy.txt");
    files.push_back("qfunction.txt");
    files.push_back("comparison_policy.csv");
  }
  return files;
}

io::EquilibriumRecord solve_pipeline(const Context& ctx, const fs::path& dir, std::ostream& out, bool full) {
  const ActionSpace& actions = ctx.model->actions();
  const EquilibriumResult result = solve_mfe(StateMeasure::uniform(ctx.model->states().size()), ctx.model, ctx.solver);
  const io::EquilibriumRecord record = io::make_record(result, ctx.model_name, ctx.beta, actions);
  io::write_text_file(dir / "equilibrium.txt", render([&](std::ostream& s) { io::write_equilibrium(s, record); }));

  out << "equilibrium (" << ctx.model_name << ", " << to_string(ctx.criterion) << ")\n";
  out << "  mu*              " << join(record.mu_star) << '\n';
  out << "  pi*              " << print_policy(result.policy) << '\n';
  out << "  residual_measure " << num(result.residual_measure) << '\n';
  out << "  residual_bellman " << num(result.residual_bellman) << '\n';
  out << "  iterations       " << result.iterations << '\n';
  if (result.average_cost) {
    const double acoe = acoe_residual(*result.q_star, result.mu_star, ctx.model, result.lambda, ctx.solver.minimizer());
    out << "  average_cost     " << num(*result.average_cost) << '\n';
    out << "  acoe_residual    " << num(acoe) << '\n';
  }
  if (!full) return record;

  io::write_text_file(dir / "contraction.csv", render([&](std::ostream& s) { io::write_contraction_csv(s, result); }));
  const std::size_t points = actions.dim() == 1 ? 101 : 11;
  io::write_text_file(dir / "q_table.csv",
                      render([&](std::ostream& s) { io::write_q_table_csv(s, *result.q_star, points); }));
  return record;
}

std::optional<DeterministicPolicy> learn_pipeline(const Context& ctx, const Options& o,
                                                  const io::EquilibriumRecord& exact, const fs::path& dir,
                                                  std::ostream& out) {
  const std::size_t n = ctx.model->states().size();
  if (exact.mu_star.size() != n) throw DimensionError("exact equilibrium does not match the model's state space");
  if (exact.criterion != ctx.criterion) throw ConfigError("exact equilibrium was solved for another criterion");
  const StateMeasure mu_star(exact.mu_star);

  LearnerConfig lc;
  lc.criterion = ctx.criterion;
  lc.beta = ctx.beta.value_or(0.5);
  lc.N = o.N;
  lc.L = o.L;
  lc.M = o.M;
  lc.K = o.K;
  lc.seed = o.seed;
  lc.threads = o.threads;
  lc.basis = BasisSpec::polynomial(ctx.model->actions().dim(), 2);

  auto write_partial = [&](const LearningTrace& trace) {
    io::write_text_file(dir / "trace.csv", render([&](std::ostream& s) { io::write_trace_csv(s, trace); }));
    io::write_text_file(dir / "comparison_measure.csv",
                        render([&](std::ostream& s) { io::write_measure_comparison_csv(s, trace, mu_star); }));
  };

  LearningTrace trace;
  try {
    learn_mfe(StateMeasure::uniform(n), *ctx.model, lc, trace);
  } catch (...) {
    if (!trace.measures.empty()) write_partial(trace);
    throw;
  }
  write_partial(trace);

  out << "learned (" << ctx.model_name << ", K = " << o.K << ", seed = " << o.seed << ")\n";
  out << "  mu_K             " << join(as_vector(trace.final_measure())) << '\n';
  out << "  |mu_K - mu*|_1   " << num(l1_distance(trace.final_measure(), mu_star)) << '\n';
  if (!trace.policy) return std::nullopt;

  const DeterministicPolicy exact_policy = exact.deterministic_policy();
  io::write_text_file(dir / "policy.txt", render([&](std::ostream& s) {
                        io::write_policy(s, *trace.policy, ctx.model->actions());
                      }));
  io::write_text_file(dir / "qfunction.txt", render([&](std::ostream& s) { io::write_qfunction(s, *trace.q_final); }));
  io::write_text_file(dir / "comparison_policy.csv", render([&](std::ostream& s) {
                        io::write_policy_comparison_csv(s, *trace.policy, exact_policy);
                      }));
  out << "  pi_K             " << print_policy(*trace.policy) << '\n';
  out << "  sup |pi_K - pi*| " << num(policy_distance(*trace.policy, exact_policy)) << '\n';
  return trace.policy;
}

void nash_rows(const Context& ctx, const Options& o, const DeterministicPolicy& policy, const std::string& policy_id,
               std::ostream& csv, std::ostream& out) {
  if (policy.num_states() != ctx.model->states().size()) throw DimensionError("policy does not match the state space");
  for (State x = 0; x < policy.num_states(); ++x) {
    if (policy.action(x).size() != ctx.model->actions().dim())
      throw DimensionError("policy action does not match the action space");
  }
  DeviationConfig cfg;
  cfg.criterion = ctx.criterion;
  cfg.beta = ctx.beta.value_or(0.5);
  cfg.T = nash_horizon(ctx, o);
  cfg.replications = o.reps;
  cfg.seed = o.seed;
  cfg.solver = ctx.solver;
  cfg.threads = o.threads;
  for (std::size_t N : o.n_list) {
    cfg.N = N;
    const DeviationReport r = deviation_gain(policy, ctx.model, cfg);
    io::write_deviation_row(csv, r, policy_id);
    out << "  " << policy_id << " N = " << N << ": gain " << num(r.gain) << " +- " << num(r.gain_stderr)
        << " (median " << num(r.median_gain) << ")" << (r.gain > 3.0 * r.gain_stderr ? "  significant" : "") << '\n';
  }
}

void check_nash_options(const Options& o) {
  if (o.reps < 2) throw ConfigError("reps = " + std::to_string(o.reps) + ": need at least 2 (stderr undefined)");
  if (o.n_list.empty()) throw ConfigError("empty --n-list");
}

// ---------------------------------------------------------------------------
// Commands

std::vector<fs::path> in_dir(const fs::path& dir, const std::vector<std::string>& names) {
  std::vector<fs::path> paths;
  for (const auto& n : names) paths.push_back(dir / n);
  return paths;
}

void cmd_solve(const Options& o, std::ostream& out) {
  const Context ctx = resolve(o);
  const fs::path dir(o.out_dir);
  write_manifest(dir, "solve", model_snapshot(ctx, o), in_dir(dir, solve_outputs()));
  solve_pipeline(ctx, dir, out, true);
}

void cmd_learn(const Options& o, std::ostream& out) {
  const Context ctx = resolve(o);
  const fs::path dir(o.out_dir);
  std::vector<std::string> names = learn_outputs(o);
  if (o.exact.empty()) names.insert(names.begin(), "equilibrium.txt");
  Snapshot snap = model_snapshot(ctx, o);
  add_learn_snapshot(snap, o);
  snap.emplace_back("seed", std::to_string(o.seed));
  snap.emplace_back("threads", std::to_string(o.threads));
  if (!o.exact.empty()) snap.emplace_back("exact", o.exact);
  write_manifest(dir, "learn", snap, in_dir(dir, names));

  io::EquilibriumRecord exact;
  if (o.exact.empty()) {
    exact = solve_pipeline(ctx, dir, out, false);
  } else {
    std::istringstream in(read_file(o.exact));
    exact = io::read_equilibrium(in);
  }
  learn_pipeline(ctx, o, exact, dir, out);
}

void cmd_nash(const Options& o, std::ostream& out) {
  check_nash_options(o);
  const Context ctx = resolve(o);
  const fs::path dir(o.out_dir);
  const DeterministicPolicy policy = io::load_any_policy(o.policy);
  Snapshot snap = model_snapshot(ctx, o);
  snap.emplace_back("policy", o.policy);
  snap.emplace_back("n-list", join_counts(o.n_list));
  snap.emplace_back("T", std::to_string(nash_horizon(ctx, o)));
  snap.emplace_back("reps", std::to_string(o.reps));
  snap.emplace_back("seed", std::to_string(o.seed));
  snap.emplace_back("threads", std::to_string(o.threads));
  write_manifest(dir, "nash", snap, {dir / "deviation.csv"});

  std::ostringstream csv;
  io::write_deviation_header(csv);
  out << "deviation gains (" << ctx.model_name << ", T = " << nash_horizon(ctx, o) << ", " << o.reps
      << " replications)\n";
  nash_rows(ctx, o, policy, fs::path(o.policy).stem().string(), csv, out);
  io::write_text_file(dir / "deviation.csv", csv.str());
}

const std::vector<std::string> kPaperModels{"twostate-discounted", "twostate-average"};

void cmd_reproduce(const Options& o, std::ostream& out) {
  check_nash_options(o);
  const fs::path root(o.out_dir);
  Snapshot snap;
  add_learn_snapshot(snap, o);
  snap.emplace_back("n-list", join_counts(o.n_list));
  snap.emplace_back("reps", std::to_string(o.reps));
  snap.emplace_back("seed", std::to_string(o.seed));
  snap.emplace_back("threads", std::to_string(o.threads));
  std::vector<fs::path> outputs;
  for (const auto& name : kPaperModels) {
    const fs::path dir = root / name;
    for (auto& p : in_dir(dir, solve_outputs())) outputs.push_back(p);
    for (auto& p : in_dir(dir, learn_outputs(o))) outputs.push_back(p);
    outputs.push_back(dir / "deviation.csv");
  }
  write_manifest(root, "reproduce-paper", snap, outputs);

  for (const auto& name : kPaperModels) {
    Options mo = o;
    mo.model = name;
    mo.criterion.clear();
    mo.beta_given = false;
    mo.T_given = false;
    const Context ctx = resolve(mo);
    const fs::path dir = root / name;
    ensure_dir(dir);
    const io::EquilibriumRecord exact = solve_pipeline(ctx, dir, out, true);
    const std::optional<DeterministicPolicy> learned = learn_pipeline(ctx, mo, exact, dir, out);

    std::ostringstream csv;
    io::write_deviation_header(csv);
    out << "deviation gains (" << name << ", T = " << nash_horizon(ctx, mo) << ", " << mo.reps
        << " replications)\n";
    nash_rows(ctx, mo, exact.deterministic_policy(), "exact", csv, out);
    if (learned) nash_rows(ctx, mo, *learned, "learned", csv, out);
    io::write_text_file(dir / "deviation.csv", csv.str());
  }
}

// ---------------------------------------------------------------------------
// Argument handling

void add_model_options(CLI::App* sub, Options& o) {
  sub->add_option("--model", o.model, "twostate-discounted | twostate-average | decoupled:<spec-file>")
      ->capture_default_str();
  sub->add_option("--criterion", o.criterion, "discounted | average (default: by model)");
  sub->add_option("--beta", o.beta, "discount factor (default: the model's)");
  sub->add_option("--picard-tol", o.picard_tol, "l1 tolerance of the outer fixed-point loop")->capture_default_str();
  sub->add_option("--picard-max", o.picard_max, "outer iteration cap")->capture_default_str();
  sub->add_option("--q-tol", o.q_tol, "sup-norm tolerance of value iteration")->capture_default_str();
  sub->add_option("--q-max", o.q_max, "value iteration cap")->capture_default_str();
  sub->add_option("--action-grid", o.action_grid, "grid nodes per action axis")->capture_default_str();
}

void add_learn_options(CLI::App* sub, Options& o) {
  sub->add_option("--N", o.N, "regression samples per fitted-Q pass")->capture_default_str();
  sub->add_option("--L", o.L, "fitted-Q iterations")->capture_default_str();
  sub->add_option("--M", o.M, "next-state samples per state")->capture_default_str();
  sub->add_option("--K", o.K, "outer iterations")->capture_default_str();
}

void add_nash_options(CLI::App* sub, Options& o) {
  sub->add_option("--n-list", o.n_list, "population sizes")->delimiter(',')->capture_default_str();
  sub->add_option("--reps", o.reps, "replications per population size")->capture_default_str();
}

void add_run_options(CLI::App* sub, Options& o) {
  sub->add_option("--seed", o.seed, "master seed")->capture_default_str();
  sub->add_option("--threads", o.threads, "worker threads")->capture_default_str();
}

void add_common_options(CLI::App* sub, Options& o) {
  sub->add_option("--out-dir", o.out_dir, "output directory")->capture_default_str();
  sub->add_option("--config", o.config, "key = value file; flags override it");
}

bool option_given(const std::vector<std::string>& args, const std::string& name) {
  const std::string flag = "--" + name;
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

std::optional<std::string> config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

/// Prepends "--key value" for every config key the subcommand knows and the
/// command line does not set.
std::vector<std::string> inject_config(const std::vector<std::string>& args, CLI::App& app) {
  if (args.empty()) return args;
  CLI::App* sub = nullptr;
  for (CLI::App* s : app.get_subcommands({})) {
    if (s->get_name() == args[0]) sub = s;
  }
  const auto path = config_path(args);
  if (!sub || !path) return args;
  const auto entries = parse_key_values(read_file(*path));
  const auto options = sub->get_options();
  std::vector<std::string> injected{args[0]};
  for (const auto& [key, value] : entries) {
    if (key == "config" || option_given(args, key)) continue;
    const bool known = std::any_of(options.begin(), options.end(), [&](const CLI::Option* opt) {
      const auto& names = opt->get_lnames();
      return std::find(names.begin(), names.end(), key) != names.end();
    });
    if (!known) continue;
    injected.push_back("--" + key);
    injected.push_back(value);
  }
  injected.insert(injected.end(), args.begin() + 1, args.end());
  return injected;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::multimap<std::string, std::string> parse_key_values(const std::string& text) {
  std::multimap<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(number) + ": empty key");
    if (key != "output" && out.count(key)) throw ConfigError("config key '" + key + "' given twice");
    out.emplace(key, value);
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Mean-field game equilibria: exact solver, learner and N-agent checks", "mfg"};
  app.set_version_flag("--version", MFG_VERSION);
  app.require_subcommand(1);

  CLI::App* solve = app.add_subcommand("solve", "exact equilibrium by fixed-point iteration");
  add_model_options(solve, o);
  add_common_options(solve, o);

  CLI::App* learn = app.add_subcommand("learn", "learn the equilibrium from samples and compare with the exact one");
  add_model_options(learn, o);
  add_learn_options(learn, o);
  add_run_options(learn, o);
  learn->add_option("--exact", o.exact, "stored equilibrium record to compare against (default: solve now)");
  add_common_options(learn, o);

  CLI::App* nash = app.add_subcommand("nash", "unilateral deviation gains in the N-agent game");
  add_model_options(nash, o);
  nash->add_option("--policy", o.policy, "policy, equilibrium or Q-function record")->required();
  add_nash_options(nash, o);
  nash->add_option("--T", o.T, "horizon (default: discounted tail < 1e-4, or 500 steps)");
  add_run_options(nash, o);
  add_common_options(nash, o);

  CLI::App* reproduce = app.add_subcommand("reproduce-paper", "solve, learn and check both two-state models");
  add_learn_options(reproduce, o);
  add_nash_options(reproduce, o);
  add_run_options(reproduce, o);
  add_common_options(reproduce, o);

  try {
    std::vector<std::string> argv = inject_config(args, app);
    std::reverse(argv.begin(), argv.end());
    app.parse(argv);
    for (CLI::App* s : {solve, learn, nash}) {
      if (s->parsed()) {
        o.beta_given = s->count("--beta") > 0;
        o.T_given = s == nash && s->count("--T") > 0;
      }
    }
    if (solve->parsed()) cmd_solve(o, out);
    if (learn->parsed()) cmd_learn(o, out);
    if (nash->parsed()) cmd_nash(o, out);
    if (reproduce->parsed()) cmd_reproduce(o, out);
    return kOk;
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InvalidMeasure& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUnexpected;
  }
}

}  // namespace mfg::cli
