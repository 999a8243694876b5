#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "manifest.hpp"
#include "persuade/error.hpp"
#include "persuade/io.hpp"
#include "persuade/oracle.hpp"
#include "persuade/sim.hpp"
#include "persuade/solver.hpp"

namespace persuade::cli {

namespace fs = std::filesystem;

namespace {

struct Exit {
  int code;
  std::string message;
};

bool is_model_error(ErrorKind k) {
  switch (k) {
    case ErrorKind::BadRates:
    case ErrorKind::BadSupport:
    case ErrorKind::NonMonotoneLevels:
    case ErrorKind::EnvelopeViolation:
    case ErrorKind::OutOfRange:
    case ErrorKind::DeltaTooLarge:
    case ErrorKind::AtStationaryBelief:
    case ErrorKind::BadConfig:
    case ErrorKind::PolicyGap:
      return true;
    default:
      return false;
  }
}

// Runs f, translating library errors into the exit code of the stage.
template <class F>
auto stage(int code, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw Exit{kIo, e.what()};
    if (is_model_error(e.kind())) throw Exit{kValidation, e.what()};
    throw Exit{code, e.what()};
  }
}

struct Options {
  std::string config;
  std::string out;
  std::string policy = "sigma_star";
  std::string trace;
  double delta = std::numeric_limits<double>::quiet_NaN();
  double grid_gap = 2.5e-4;
  double tol = 1e-6;
  double p0 = 0.5;
  double max_tail = std::numeric_limits<double>::infinity();
  std::size_t samples = 1001;
  std::size_t paths = 10000;
  std::size_t horizon = 0;
  std::size_t max_iter = 10'000'000;
  std::size_t trace_paths = 1;
  std::size_t bins = 32;
  std::uint64_t seed = 0;
  std::vector<double> deltas{0.1, 0.03, 0.01, 0.003};
  std::vector<double> points{0.1, 0.3, 0.5, 0.62, 0.9};
  std::vector<std::string> policies{"sigma_star", "myopic", "slide_only"};
};

class Run {
 public:
  Run(std::string command, const Options& opt, std::ostream& out)
      : opt_(opt), out_(out) {
    manifest_.command = std::move(command);
    manifest_.version = PERSUADE_VERSION;
    manifest_.started_at = utc_timestamp();
    manifest_.config_path = opt.config;
    const auto text = stage(kIo, [&] { return read_text_file(opt.config); });
    manifest_.config_sha256 = sha256_hex(text);
    spec_ = stage(kValidation, [&] { return parse_problem(text); });
  }

  const ProblemSpec& spec() const { return spec_; }
  std::ostream& out() { return out_; }

  void param(const std::string& key, double v) { manifest_.parameters[key] = format_number(v); }
  void param(const std::string& key, std::size_t v) { manifest_.parameters[key] = std::to_string(v); }
  void param(const std::string& key, const std::string& v) { manifest_.parameters[key] = v; }

  void write(const fs::path& path, const std::string& content) {
    stage(kIo, [&] { write_text_file_atomic(path, content); });
    manifest_.outputs.push_back(path.string());
  }

  void finish() {
    manifest_.finished_at = utc_timestamp();
    const auto path = manifest_path_for(opt_.out);
    stage(kIo, [&] { write_text_file_atomic(path, manifest_to_json(manifest_)); });
  }

 private:
  const Options& opt_;
  std::ostream& out_;
  RunManifest manifest_;
  ProblemSpec spec_;
};

fs::path sibling(const std::string& out, const std::string& suffix) {
  fs::path p(out);
  p.replace_extension(suffix);
  return p;
}

Solution solve_checked(const ProblemSpec& spec) {
  return stage(kSolver, [&] { return solve(spec); });
}

std::vector<double> cutoff_beliefs(const MarkovPolicy& policy) {
  std::vector<double> out;
  for (const auto& c : policy.cutoffs()) out.push_back(c.belief);
  return out;
}

MarkovPolicy resolve_policy(const std::string& name, const ProblemSpec& spec) {
  if (name == "sigma_star") return solve_checked(spec).policy;
  if (name == "myopic") return myopic_policy(spec);
  if (name == "slide_only") return slide_only_policy();
  if (name == "full_disclosure") return full_disclosure_policy();
  const auto text = stage(kIo, [&] { return read_text_file(name); });
  return stage(kValidation, [&] { return parse_policy(text); });
}

SimConfig sim_config(const Options& opt, const ProblemSpec& spec) {
  SimConfig cfg;
  cfg.delta = std::isnan(opt.delta) ? default_delta(spec) : opt.delta;
  if (!(cfg.delta > 0.0)) throw Exit{kUsage, "--delta must be positive"};
  cfg.horizon = opt.horizon;
  if (cfg.horizon == 0) {
    // enough periods for the discounted tail to drop below 1e-12
    cfg.horizon = static_cast<std::size_t>(std::ceil(std::log(1e12) / (spec.discount().r * cfg.delta)));
  }
  cfg.n_paths = opt.paths;
  cfg.seed = opt.seed;
  cfg.initial_belief = opt.p0;
  cfg.calibration_bins = opt.bins;
  cfg.tail_cap = opt.max_tail;
  cfg.trace_paths = opt.trace.empty() ? 0 : opt.trace_paths;
  return cfg;
}

void record_sim(Run& run, const SimConfig& cfg) {
  run.param("delta", cfg.delta);
  run.param("horizon", cfg.horizon);
  run.param("paths", cfg.n_paths);
  run.param("seed", std::to_string(cfg.seed));
  run.param("bins", cfg.calibration_bins);
}

int cmd_validate(const Options& opt, std::ostream& out) {
  const auto text = stage(kIo, [&] { return read_text_file(opt.config); });
  const auto spec = stage(kValidation, [&] { return parse_problem(text); });
  out << "valid\n"
      << "p*=" << format_number(spec.p_star()) << "\n"
      << "mu=" << format_number(spec.mu()) << "\n"
      << "pivot=" << spec.payoff().pivot_index() << "\n"
      << "m=" << spec.payoff().below_count() << "\n"
      << "m'=" << spec.payoff().above_count() << "\n"
      << "stationary_on_cut=" << (spec.stationary_on_cut() ? "true" : "false") << "\n";
  return kOk;
}

int cmd_solve(const Options& opt, std::ostream& out) {
  Run run("solve", opt, out);
  run.param("samples", opt.samples);
  const auto solution = solve_checked(run.spec());
  const auto report = verify_solution(run.spec(), solution.value);
  run.write(opt.out, solution_to_json(run.spec(), solution));
  run.write(sibling(opt.out, ".csv"), solution_samples_csv(run.spec(), solution, opt.samples));
  run.finish();
  out << "segments=" << solution.value.segments().size()
      << " regions=" << solution.policy.regions().size() << " cutoffs=[";
  for (std::size_t i = 0; i < solution.policy.cutoffs().size(); ++i) {
    out << (i ? "," : "") << format_number(solution.policy.cutoffs()[i].belief);
  }
  out << "]\n";
  out << "violations=" << report.violations.size() << "\n";
  for (const auto& v : report.violations) {
    out << "  " << to_string(v.condition) << " at " << format_number(v.belief) << ": " << v.detail << "\n";
  }
  return kOk;
}

int cmd_oracle(const Options& opt, std::ostream& out) {
  Run run("oracle", opt, out);
  const double delta = std::isnan(opt.delta) ? 1e-3 : opt.delta;
  run.param("delta", delta);
  run.param("grid_gap", opt.grid_gap);
  run.param("tol", opt.tol);
  run.param("max_iter", opt.max_iter);
  const auto solution = solve_checked(run.spec());
  const auto result = stage(kOracle, [&] {
    const auto grid = make_belief_grid(run.spec(), opt.grid_gap, cutoff_beliefs(solution.policy));
    return value_iteration(run.spec(), delta, grid, opt.tol, opt.max_iter);
  });
  run.write(opt.out, oracle_csv(run.spec(), result, solution.value));
  run.finish();
  double worst = 0.0;
  for (std::size_t i = 0; i < result.values.size(); ++i) {
    worst = std::max(worst, std::abs(result.values[i] - solution.value.value(result.grid.points[i])));
  }
  out << "iterations=" << result.iterations << " residual=" << format_number(result.residual)
      << " max_abs_error=" << format_number(worst) << "\n";
  if (!result.converged) {
    throw Exit{kOracle, "NoConvergence: residual " + format_number(result.residual) + " after " +
                            std::to_string(result.iterations) + " iterations"};
  }
  return kOk;
}

int cmd_simulate(const Options& opt, std::ostream& out) {
  Run run("simulate", opt, out);
  const auto policy = resolve_policy(opt.policy, run.spec());
  const auto cfg = sim_config(opt, run.spec());
  record_sim(run, cfg);
  run.param("policy", opt.policy);
  run.param("p0", opt.p0);
  const auto result = stage(kSim, [&] { return simulate(run.spec(), policy, cfg); });
  run.write(opt.out, sim_result_to_json(result));
  run.write(sibling(opt.out, ".calibration.csv"), sim_result_csv(result));
  if (!opt.trace.empty()) {
    run.param("trace_paths", cfg.trace_paths);
    run.write(opt.trace, trace_csv(result.trace));
  }
  run.finish();
  out << "mean=" << format_number(result.mean_discounted_payoff)
      << " se=" << format_number(result.std_error) << " tail_bound=" << format_number(result.tail_bound)
      << " calibrated=" << (result.calibrated() ? "yes" : "no") << "\n";
  return kOk;
}

int cmd_compare(const Options& opt, std::ostream& out) {
  Run run("compare", opt, out);
  std::vector<NamedPolicy> policies;
  for (const auto& name : opt.policies) policies.push_back({name, resolve_policy(name, run.spec())});
  const auto cfg = sim_config(opt, run.spec());
  record_sim(run, cfg);
  run.param("grid_gap", opt.grid_gap);
  run.param("tol", opt.tol);
  ComparisonOptions copt;
  copt.grid_gap = opt.grid_gap;
  copt.tol = opt.tol;
  copt.max_iter = opt.max_iter;
  const auto rows = stage(kSim, [&] {
    return compare_policies(run.spec(), policies, cfg, opt.points, copt);
  });
  run.write(opt.out, comparison_csv(rows));
  run.finish();
  std::size_t flagged = 0;
  for (const auto& r : rows) flagged += r.flagged ? 1 : 0;
  out << "rows=" << rows.size() << " flagged=" << flagged << "\n";
  return kOk;
}

int cmd_sweep(const Options& opt, std::ostream& out) {
  Run run("sweep", opt, out);
  run.param("grid_gap", opt.grid_gap);
  run.param("tol", opt.tol);
  std::string list;
  for (double d : opt.deltas) list += (list.empty() ? "" : ",") + format_number(d);
  run.param("deltas", list);
  const auto solution = solve_checked(run.spec());
  std::vector<SweepRow> rows;
  bool all_converged = true;
  stage(kOracle, [&] {
    const auto grid = make_belief_grid(run.spec(), opt.grid_gap, cutoff_beliefs(solution.policy));
    for (double delta : opt.deltas) {
      const auto v = value_iteration(run.spec(), delta, grid, opt.tol, opt.max_iter);
      const auto w = evaluate_policy_discrete(run.spec(), solution.policy, delta, grid, opt.tol,
                                              opt.max_iter);
      SweepRow row{delta, 0.0, 0.0, v.iterations, w.iterations, v.converged && w.converged};
      for (std::size_t i = 0; i < grid.points.size(); ++i) {
        const double ref = solution.value.value(grid.points[i]);
        row.value_error = std::max(row.value_error, std::abs(v.values[i] - ref));
        row.policy_error = std::max(row.policy_error, std::abs(w.values[i] - ref));
      }
      all_converged = all_converged && row.converged;
      rows.push_back(row);
    }
  });
  run.write(opt.out, sweep_csv(rows));
  run.finish();
  for (const auto& r : rows) {
    out << "delta=" << format_number(r.delta) << " value_error=" << format_number(r.value_error)
        << " policy_error=" << format_number(r.policy_error) << "\n";
  }
  if (!all_converged) throw Exit{kOracle, "NoConvergence at some delta"};
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Dynamic persuasion with a two-state Markov chain: solver, DP oracle, simulator",
               "persuade"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PERSUADE_VERSION);

  auto config = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "problem JSON")->required();
  };
  auto output = [&](CLI::App* sub) { sub->add_option("--out", opt.out, "output file")->required(); };
  auto oracle_flags = [&](CLI::App* sub) {
    sub->add_option("--grid-gap", opt.grid_gap, "largest spacing of the belief grid")
        ->check(CLI::PositiveNumber);
    sub->add_option("--tol", opt.tol, "value-iteration tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", opt.max_iter, "value-iteration cap");
  };
  auto sim_flags = [&](CLI::App* sub) {
    sub->add_option("--delta", opt.delta, "period length (default 0.01/(lambda0+lambda1+r))");
    sub->add_option("--paths", opt.paths, "number of simulated paths")->check(CLI::PositiveNumber);
    sub->add_option("--horizon", opt.horizon, "periods per path (default: tail below 1e-12)");
    sub->add_option("--seed", opt.seed, "master seed");
    sub->add_option("--bins", opt.bins, "calibration bins")->check(CLI::PositiveNumber);
    sub->add_option("--max-tail", opt.max_tail, "fail if the discounted tail bound exceeds this");
  };

  auto* validate = app.add_subcommand("validate", "check a problem file and print derived constants");
  config(validate);

  auto* solve_cmd = app.add_subcommand("solve", "closed-form value function and optimal policy");
  config(solve_cmd);
  output(solve_cmd);
  solve_cmd->add_option("--samples", opt.samples, "uniform sample count for the CSV")
      ->check(CLI::PositiveNumber);

  auto* oracle = app.add_subcommand("oracle", "discrete-time value iteration against the solver");
  config(oracle);
  output(oracle);
  oracle->add_option("--delta", opt.delta, "period length (default 1e-3)");
  oracle_flags(oracle);

  auto* simulate_cmd = app.add_subcommand("simulate", "Monte-Carlo payoff of a policy");
  config(simulate_cmd);
  output(simulate_cmd);
  sim_flags(simulate_cmd);
  simulate_cmd->add_option("--policy", opt.policy, "sigma_star | myopic | slide_only | full_disclosure | policy JSON");
  simulate_cmd->add_option("--p0", opt.p0, "initial belief")->check(CLI::Range(0.0, 1.0));
  simulate_cmd->add_option("--trace", opt.trace, "write a per-period trace CSV here");
  simulate_cmd->add_option("--trace-paths", opt.trace_paths, "paths to include in the trace");

  auto* compare = app.add_subcommand("compare", "simulated vs DP vs closed-form payoffs of several policies");
  config(compare);
  output(compare);
  sim_flags(compare);
  oracle_flags(compare);
  compare->add_option("--policy", opt.policies, "policies to compare")->delimiter(',');
  compare->add_option("--points", opt.points, "initial beliefs")->delimiter(',');

  auto* sweep = app.add_subcommand("sweep", "sup-norm error of v_delta and w_delta(sigma*) over delta");
  config(sweep);
  output(sweep);
  oracle_flags(sweep);
  sweep->add_option("--deltas", opt.deltas, "period lengths")->delimiter(',')->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*validate) return cmd_validate(opt, out);
    if (*solve_cmd) return cmd_solve(opt, out);
    if (*oracle) return cmd_oracle(opt, out);
    if (*simulate_cmd) return cmd_simulate(opt, out);
    if (*compare) return cmd_compare(opt, out);
    if (*sweep) return cmd_sweep(opt, out);
  } catch (const Exit& e) {
    err << "error: " << e.message << "\n";
    return e.code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace persuade::cli
