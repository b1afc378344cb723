#include "mmrl/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "mmrl/error.hpp"
#include "mmrl/experiment.hpp"
#include "mmrl/io.hpp"
#include "mmrl/metrics.hpp"
#include "mmrl/oracle.hpp"
#include "mmrl/solvers.hpp"

namespace fs = std::filesystem;

namespace mmrl::cli {

namespace {

/// Bad flag combinations that CLI11 cannot express.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The run finished but its result is not trustworthy; output was written.
class Unconverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

MomdpInstance load_instance(const std::string& path) {
  auto m = io::instance_from_json(io::read_json_file(path));
  require_valid(m);
  return m;
}

MomdpInstance fixture(const std::string& name) {
  if (name == "symmetric") return one_state_symmetric();
  if (name == "asymmetric") return one_state_asymmetric();
  throw UsageError("unknown fixture '" + name + "' (expected symmetric or asymmetric)");
}

Equilibrium load_reference(const std::string& path) {
  const auto j = io::read_json_file(path);
  return io::equilibrium_from_json(j.contains("equilibrium") ? j["equilibrium"] : j);
}

Eigen::VectorXd parse_vector(const std::string& text) {
  std::vector<double> xs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      xs.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("cannot parse '" + item + "' as a number");
    }
  }
  return Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-")
    out << text;
  else
    io::write_text_file(path, text);
}

// ---------------------------------------------------------------- gen

struct GenArgs {
  GeneratorConfig g;
  int count = 1;
  std::string out_dir = ".";
  std::string fixture;
};

void add_gen(CLI::App& app, GenArgs& a) {
  auto* c = app.add_subcommand("gen", "Write random instance files");
  c->add_option("--states", a.g.num_states, "Number of states")->check(CLI::PositiveNumber);
  c->add_option("--actions", a.g.num_actions, "Number of actions")->check(CLI::PositiveNumber);
  c->add_option("--objectives", a.g.num_objectives, "Number of objectives")->check(CLI::PositiveNumber);
  c->add_option("--count", a.count, "Number of instances")->check(CLI::PositiveNumber);
  c->add_option("--seed", a.g.seed, "Seed of the first instance; the rest follow consecutively");
  c->add_option("--gamma", a.g.gamma, "Discount factor")->check(CLI::Range(0.0, 1.0));
  c->add_option("--reward-min", a.g.reward_min, "Lower end of the reward range");
  c->add_option("--reward-max", a.g.reward_max, "Upper end of the reward range");
  c->add_option("--out", a.out_dir, "Output directory");
  c->add_option("--fixture", a.fixture, "Write a fixed instance instead: symmetric or asymmetric");
}

int cmd_gen(const GenArgs& a, std::ostream& out) {
  if (!(a.g.reward_min < a.g.reward_max)) throw UsageError("--reward-min must be below --reward-max");
  if (a.g.gamma >= 1.0) throw UsageError("--gamma must be below 1");
  io::Json files = io::Json::array();
  auto emit = [&](const MomdpInstance& m, const std::string& name, std::optional<std::uint64_t> seed) {
    const fs::path path = fs::path(a.out_dir) / name;
    io::write_text_file(path, io::to_json(m).dump() + "\n");
    io::Json e = {{"path", path.string()}, {"hash", io::instance_hash(m)}};
    e["seed"] = seed ? io::Json(*seed) : io::Json(nullptr);
    files.push_back(e);
  };
  if (!a.fixture.empty()) {
    emit(fixture(a.fixture), a.fixture + ".json", std::nullopt);
  } else {
    for (int i = 0; i < a.count; ++i) {
      GeneratorConfig g = a.g;
      g.seed = a.g.seed + static_cast<std::uint64_t>(i);
      emit(random_instance(g), "instance-" + std::to_string(g.seed) + ".json", g.seed);
    }
  }
  out << io::Json{{"files", files}}.dump(2) << "\n";
  return kOk;
}

// ---------------------------------------------------------------- solve

struct SolveArgs {
  std::string instance;
  std::string config_file;
  std::string reference;
  std::string out = "trace.csv";
  std::string meta;
  std::string algo = "eram";
  std::string eval = "exact";
  double tau = 0.05, tau_w = 0.05, eta = 0.01, lambda = 1e-4;
  long iters = 20000, trace_every = 100;
  int samples = 256;
  std::uint64_t seed = 0;
  double theory_eps = 0;
  bool no_nash_gap = false;
  CLI::App* cmd = nullptr;
};

void add_solve(CLI::App& app, SolveArgs& a) {
  auto* c = a.cmd = app.add_subcommand("solve", "Run a solver and write its trace");
  c->add_option("--instance", a.instance, "Instance JSON file")->required();
  c->add_option("--config", a.config_file, "Solver config JSON; flags override its values");
  c->add_option("--reference", a.reference, "Equilibrium JSON (from `oracle`) for the optimality gaps");
  c->add_option("--out", a.out, "Trace CSV path");
  c->add_option("--meta", a.meta, "Metadata JSON path (default: next to the trace)");
  c->add_option("--algo", a.algo, "eram, aram, onehot or uniform")
      ->check(CLI::IsMember({"eram", "aram", "onehot", "uniform"}));
  c->add_option("--eval", a.eval, "exact or sampled")->check(CLI::IsMember({"exact", "sampled"}));
  c->add_option("--tau", a.tau, "Learner entropy coefficient")->check(CLI::PositiveNumber);
  c->add_option("--tau-w", a.tau_w, "Adversary entropy coefficient")->check(CLI::PositiveNumber);
  c->add_option("--eta", a.eta, "Policy step size")->check(CLI::PositiveNumber);
  c->add_option("--lambda", a.lambda, "Weight step size")->check(CLI::PositiveNumber);
  c->add_option("--theory-eps", a.theory_eps, "Derive eta and lambda from the theory step sizes at this epsilon")
      ->check(CLI::PositiveNumber);
  c->add_option("--iters", a.iters, "Iterations")->check(CLI::NonNegativeNumber);
  c->add_option("--trace-every", a.trace_every, "Record stride")->check(CLI::PositiveNumber);
  c->add_option("--samples", a.samples, "Next-state draws per (s, a) for sampled evaluation")
      ->check(CLI::PositiveNumber);
  c->add_option("--seed", a.seed, "Sampling seed");
  c->add_flag("--no-nash-gap", a.no_nash_gap, "Skip the Nash gap column");
}

bool given(const CLI::App* cmd, const char* name) { return cmd->get_option(name)->count() > 0; }

SolverConfig solver_config(const SolveArgs& a, const MomdpInstance& m) {
  SolverConfig c;
  if (!a.config_file.empty()) io::merge_json(io::read_json_file(a.config_file), c);
  if (a.config_file.empty() || given(a.cmd, "--algo")) c.algorithm = parse_algorithm(a.algo);
  if (a.config_file.empty() || given(a.cmd, "--eval")) c.eval_mode = parse_eval_mode(a.eval);
  if (a.config_file.empty() || given(a.cmd, "--tau")) c.tau = a.tau;
  if (a.config_file.empty() || given(a.cmd, "--tau-w")) c.tau_w = a.tau_w;
  if (a.config_file.empty() || given(a.cmd, "--eta")) c.eta = a.eta;
  if (a.config_file.empty() || given(a.cmd, "--lambda")) c.lambda = a.lambda;
  if (a.config_file.empty() || given(a.cmd, "--iters")) c.iters = a.iters;
  if (a.config_file.empty() || given(a.cmd, "--trace-every")) c.trace_every = a.trace_every;
  if (a.config_file.empty() || given(a.cmd, "--samples")) c.sampling.samples_per_pair = a.samples;
  if (a.config_file.empty() || given(a.cmd, "--seed")) c.sampling.seed = a.seed;
  if (a.no_nash_gap) c.record_nash_gap = false;
  if (given(a.cmd, "--theory-eps")) {
    if (given(a.cmd, "--eta") || given(a.cmd, "--lambda")) throw UsageError("--theory-eps excludes --eta/--lambda");
    try {
      const auto t = theory_stepsizes(m, c.tau, a.theory_eps, c.tau_w);
      c.eta = t.eta;
      c.lambda = t.lambda;
    } catch (const EpsilonOutOfRange& e) {
      throw UsageError(e.what());
    }
  }
  try {
    c.validate(m.gamma());
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  return c;
}

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  const MomdpInstance m = load_instance(a.instance);
  const SolverConfig cfg = solver_config(a, m);
  std::optional<Equilibrium> ref;
  if (!a.reference.empty()) {
    ref = load_reference(a.reference);
    if (std::abs(ref->tau - cfg.tau) > 1e-12 * cfg.tau || std::abs(ref->tau_w - cfg.tau_w) > 1e-12 * cfg.tau_w)
      throw InvalidArgument("reference was computed for tau=" + std::to_string(ref->tau) +
                            ", tau_w=" + std::to_string(ref->tau_w) + ", not the solver's");
  }

  const fs::path csv_path = a.out;
  fs::path meta_path = a.meta;
  if (meta_path.empty()) meta_path = fs::path(csv_path).replace_extension(".meta.json");
  io::Json meta = experiment::run_metadata(m, cfg, ref ? &*ref : nullptr);
  meta["instance"]["path"] = a.instance;

  auto write = [&](const IterationTrace& trace, const std::string& status) {
    std::ostringstream csv;
    io::write_trace_csv(csv, trace);
    io::write_text_file(csv_path, csv.str());
    meta["status"] = status;
    io::write_text_file(meta_path, meta.dump(2) + "\n");
  };

  RunResult result;
  try {
    result = run(m, cfg, ref ? &*ref : nullptr);
  } catch (const NonFiniteIterate& e) {
    write(e.trace(), std::string("aborted: ") + e.what());
    throw;
  }
  write(result.trace, "ok");
  const auto& last = result.trace.rows.back();
  io::Json summary = {{"trace", csv_path.string()}, {"meta", meta_path.string()}, {"rows", result.trace.rows.size()},
                      {"final_iter", last.iter}, {"final_min_value", last.min_value}};
  summary["final_nash_gap"] = last.nash_gap ? io::Json(*last.nash_gap) : io::Json(nullptr);
  out << summary.dump(2) << "\n";
  return kOk;
}

// ---------------------------------------------------------------- gap

struct GapArgs {
  std::string instance, policy, weight, reference, trace;
  std::string field = "log_policy_gap";
  double tau = 0.05;
  double tol = 1e-10;
  bool with_eval = false;
};

void add_gap(CLI::App& app, GapArgs& a) {
  auto* c = app.add_subcommand("gap", "Nash and optimality gaps of a policy/weight pair, or the rate of a trace");
  c->add_option("--instance", a.instance, "Instance JSON file");
  c->add_option("--policy", a.policy, "Policy JSON: an |S| x |A| array (default uniform)");
  c->add_option("--weight", a.weight, "Comma-separated weight (default uniform)");
  c->add_option("--reference", a.reference, "Equilibrium JSON for the optimality gaps");
  c->add_option("--tau", a.tau, "Entropy coefficient of the evaluation")->check(CLI::NonNegativeNumber);
  c->add_option("--tol", a.tol, "Value iteration tolerance")->check(CLI::PositiveNumber);
  c->add_option("--trace", a.trace, "Trace CSV whose decay rate is fitted");
  c->add_option("--field", a.field, "Trace column used by the rate fit");
  c->add_flag("--with-eval", a.with_eval, "Include the full evaluation report");
}

int cmd_gap(const GapArgs& a, std::ostream& out) {
  if (a.instance.empty() && a.trace.empty()) throw UsageError("gap needs --instance and/or --trace");
  io::Json result = io::Json::object();
  GapReport report;
  if (!a.instance.empty()) {
    const MomdpInstance m = load_instance(a.instance);
    Policy pi = Policy::uniform(m.num_states(), m.num_actions());
    if (!a.policy.empty()) {
      const auto j = io::read_json_file(a.policy);
      const auto& pj = j.is_object() ? j.at("policy") : j;
      Eigen::MatrixXd p(pj.size(), pj.empty() ? 0 : pj[0].size());
      for (std::size_t s = 0; s < pj.size(); ++s)
        for (std::size_t b = 0; b < pj[s].size(); ++b) p(s, b) = pj[s][b].get<double>();
      pi.probs = p;
    }
    if (pi.num_states() != m.num_states() || pi.num_actions() != m.num_actions() || !is_row_stochastic(pi))
      throw InvalidArgument("policy does not match the instance or is not row-stochastic");
    Weight w = Weight::uniform(m.num_objectives());
    if (!a.weight.empty()) w.w = parse_vector(a.weight);
    if (w.size() != m.num_objectives() || !in_simplex(w.w))
      throw InvalidArgument("weight must lie in the simplex of dimension " + std::to_string(m.num_objectives()));
    report = nash_gap(m, pi, w, a.tol);
    if (!a.reference.empty()) {
      const auto g = optimality_gaps(m, pi, w, load_reference(a.reference), a.tau);
      report.log_policy_gap = g.log_policy_gap;
      report.w_gap = g.w_gap;
      report.q_gap = g.q_gap;
    }
    if (a.with_eval) result["eval"] = io::to_json(eval_exact(m, pi, w, a.tau));
  }
  if (!a.trace.empty()) {
    std::ifstream in(a.trace);
    if (!in) throw InvalidArgument("cannot open " + a.trace);
    const auto fit = fit_rate(io::read_trace_csv(in), parse_trace_field(a.field));
    report.fitted_rate = fit.rho;
    result["fit"] = {{"field", a.field}, {"rho", fit.rho}, {"r_squared", fit.r_squared}, {"points", fit.points}};
  }
  result["gap"] = io::to_json(report);
  if (a.instance.empty()) result["gap"] = {{"fitted_rate", report.fitted_rate.value()}};
  out << result.dump(2) << "\n";
  return kOk;
}

// ---------------------------------------------------------------- oracle

struct OracleArgs {
  std::string instance, fixture, out;
  double tau = 0.05, tau_w = 0.05;
  EquilibriumOptions eq;
  double reform_tol = 1e-6;
  long reform_budget = 100000;
};

void add_oracle(CLI::App& app, OracleArgs& a) {
  auto* c = app.add_subcommand("oracle", "Compute the regularized equilibrium and the reformulation optimum");
  c->add_option("--instance", a.instance, "Instance JSON file");
  c->add_option("--fixture", a.fixture, "Use a fixed instance: symmetric or asymmetric");
  c->add_option("--tau", a.tau, "Learner entropy coefficient")->check(CLI::PositiveNumber);
  c->add_option("--tau-w", a.tau_w, "Adversary entropy coefficient")->check(CLI::PositiveNumber);
  c->add_option("--tol", a.eq.tol, "Best-response residual tolerance")->check(CLI::PositiveNumber);
  c->add_option("--budget", a.eq.budget, "Newton iteration budget")->check(CLI::PositiveNumber);
  c->add_flag("--cross-check", a.eq.cross_check_eram, "Also run ERAM and fail if it disagrees");
  c->add_option("--reform-tol", a.reform_tol, "Reformulation duality-gap tolerance")->check(CLI::PositiveNumber);
  c->add_option("--reform-budget", a.reform_budget, "Reformulation iteration budget")->check(CLI::PositiveNumber);
  c->add_option("--out", a.out, "Output JSON path (default stdout)");
}

int cmd_oracle(const OracleArgs& a, std::ostream& out) {
  if (a.instance.empty() == a.fixture.empty()) throw UsageError("oracle needs exactly one of --instance, --fixture");
  const MomdpInstance m = a.fixture.empty() ? load_instance(a.instance) : fixture(a.fixture);
  const Equilibrium eq = solve_equilibrium(m, a.tau, a.tau_w, a.eq);
  const Reformulation ref = minimize_reformulation(m, a.tau, a.reform_tol, a.reform_budget);
  const double diff = std::abs(eq.value_star - ref.value_opt);
  const double allowance = 1e-4 + 10 * a.tau_w;
  io::Json j = {{"equilibrium", io::to_json(eq)},
                {"reformulation", io::to_json(ref)},
                {"agreement", {{"abs_diff", diff}, {"allowance", allowance}, {"within", diff <= allowance}}},
                {"converged", eq.converged && ref.converged}};
  write_output(a.out, j.dump(2) + "\n", out);
  if (!eq.converged)
    throw Unconverged("equilibrium residual " + std::to_string(eq.max_residual()) + " above tolerance");
  if (!ref.converged) throw Unconverged("reformulation did not reach its tolerance");
  return kOk;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  std::string preset = "default";
  std::string config_file, out, eval, algo;
  int workers = 0, count = 0, samples = 0;
  long iters = 0, trace_every = 0;
  std::uint64_t master_seed = 0;
  bool reference = false;
  CLI::App* cmd = nullptr;
};

void add_sweep(CLI::App& app, SweepArgs& a) {
  auto* c = a.cmd = app.add_subcommand("sweep", "Run a grid of solver runs over seeded instances");
  c->add_option("--preset", a.preset, "default (ERAM, three sizes) or aram")
      ->check(CLI::IsMember({"default", "aram"}));
  c->add_option("--config", a.config_file, "Sweep config JSON; flags override its values");
  c->add_option("--out", a.out, "Output directory");
  c->add_option("--workers", a.workers, "Worker threads (default MMRL_WORKERS or all cores)")
      ->check(CLI::PositiveNumber);
  c->add_option("--count", a.count, "Instances per size")->check(CLI::PositiveNumber);
  c->add_option("--iters", a.iters, "Iterations per run")->check(CLI::PositiveNumber);
  c->add_option("--trace-every", a.trace_every, "Record stride")->check(CLI::PositiveNumber);
  c->add_option("--algo", a.algo, "Override the algorithm of every solver config")
      ->check(CLI::IsMember({"eram", "aram", "onehot", "uniform"}));
  c->add_option("--eval", a.eval, "Override the evaluation mode")->check(CLI::IsMember({"exact", "sampled"}));
  c->add_option("--samples", a.samples, "Samples per (s, a) for sampled evaluation")->check(CLI::PositiveNumber);
  c->add_option("--master-seed", a.master_seed, "Master seed of the per-run sampling substreams");
  c->add_flag("--reference", a.reference, "Solve each instance's equilibrium and record optimality gaps");
}

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  experiment::SweepConfig c = a.preset == "aram" ? experiment::aram_sweep() : experiment::default_sweep();
  if (!a.config_file.empty()) c = experiment::sweep_from_json(io::read_json_file(a.config_file), c);
  if (!a.out.empty()) c.out_dir = a.out;
  if (a.workers) c.workers = a.workers;
  if (!c.workers) {
    try {
      c.workers = experiment::worker_count();
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
  }
  if (a.reference) c.reference = true;
  if (given(a.cmd, "--master-seed")) c.master_seed = a.master_seed;
  for (auto& s : c.instances)
    if (a.count) s.count = a.count;
  for (auto& s : c.solvers) {
    if (a.iters) s.iters = a.iters;
    if (a.trace_every) s.trace_every = a.trace_every;
    if (!a.algo.empty()) s.algorithm = parse_algorithm(a.algo);
    if (!a.eval.empty()) s.eval_mode = parse_eval_mode(a.eval);
    if (a.samples) s.sampling.samples_per_pair = a.samples;
  }
  try {
    for (const auto& s : c.solvers) s.validate(c.gamma);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }

  const std::size_t total = experiment::expand(c).size();
  std::size_t finished = 0;
  const auto outcome = experiment::run_sweep(c, [&](const experiment::ManifestEntry& e) {
    ++finished;
    err << "[" << finished << "] " << e.id << " " << e.status << (e.error.empty() ? "" : ": " + e.error) << "\n";
  });
  io::Json failed = io::Json::array();
  for (const auto& f : outcome.failed) failed.push_back({{"id", f.id}, {"error", f.error}});
  out << io::Json{{"out_dir", c.out_dir.string()}, {"runs", total}, {"executed", outcome.executed},
                  {"skipped", outcome.skipped}, {"failed", failed}}
             .dump(2)
      << "\n";
  if (!outcome.failed.empty())
    throw Unconverged(std::to_string(outcome.failed.size()) + " run(s) failed; see manifest.jsonl");
  return kOk;
}

// ---------------------------------------------------------------- report

struct ReportArgs {
  std::vector<std::string> sweeps, traces, metrics;
  std::string out = "report";
  bool log_y = false;
};

void add_report(CLI::App& app, ReportArgs& a) {
  auto* c = app.add_subcommand("report", "Aggregate traces into a summary CSV and SVG charts");
  c->add_option("--sweep", a.sweeps, "Sweep output directory (repeatable)");
  c->add_option("--trace", a.traces, "Single trace CSV (repeatable)");
  c->add_option("--metric", a.metrics, "Charted trace column (repeatable, default nash_gap)");
  c->add_option("--out", a.out, "Output directory");
  c->add_flag("--log-y", a.log_y, "Logarithmic y axis");
}

int cmd_report(const ReportArgs& a, std::ostream& out) {
  if (a.sweeps.empty() && a.traces.empty()) throw UsageError("report needs --sweep or --trace");
  std::vector<TraceField> fields;
  for (const auto& name : a.metrics.empty() ? std::vector<std::string>{"nash_gap"} : a.metrics) {
    try {
      fields.push_back(parse_trace_field(name));
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
  }
  std::vector<experiment::LabeledTrace> traces;
  for (const auto& d : a.sweeps)
    for (auto& t : experiment::load_sweep(d)) traces.push_back(std::move(t));
  for (const auto& t : a.traces) traces.push_back(experiment::load_trace(t));
  if (traces.empty()) throw InvalidArgument("no completed traces found");

  const auto rows = experiment::summarize(traces);
  std::ostringstream csv;
  experiment::write_summary_csv(csv, rows);
  const fs::path dir = a.out;
  io::Json written = io::Json::array();
  io::write_text_file(dir / "summary.csv", csv.str());
  written.push_back((dir / "summary.csv").string());
  for (TraceField f : fields) {
    experiment::ChartOptions opt;
    opt.title = to_string(f) + " (mean ± std over instances)";
    opt.log_y = a.log_y;
    const fs::path svg = dir / (to_string(f) + ".svg");
    io::write_text_file(svg, experiment::render_chart(rows, f, opt));
    written.push_back(svg.string());
  }
  out << io::Json{{"traces", traces.size()}, {"rows", rows.size()}, {"written", written}}.dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Max-min fair multi-objective MDP solver"};
  app.name("mmrl");
  app.require_subcommand(1);
  GenArgs gen;
  SolveArgs solve;
  GapArgs gap;
  OracleArgs oracle;
  SweepArgs sweep;
  ReportArgs report;
  add_gen(app, gen);
  add_solve(app, solve);
  add_gap(app, gap);
  add_oracle(app, oracle);
  add_sweep(app, sweep);
  add_report(app, report);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (app.got_subcommand("gen")) return cmd_gen(gen, out);
    if (app.got_subcommand("solve")) return cmd_solve(solve, out);
    if (app.got_subcommand("gap")) return cmd_gap(gap, out);
    if (app.got_subcommand("oracle")) return cmd_oracle(oracle, out);
    if (app.got_subcommand("sweep")) return cmd_sweep(sweep, out, err);
    if (app.got_subcommand("report")) return cmd_report(report, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Unconverged& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const SingularSystem& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const MaxIterExceeded& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const NonFiniteIterate& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const OracleDisagreement& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const DegeneratePolicy& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const DegenerateWeight& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::exception& e) {
    // invalid data, schema problems, unreliable references, IO
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace mmrl::cli
