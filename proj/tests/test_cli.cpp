#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "mmrl/cli.hpp"
#include "mmrl/experiment.hpp"
#include "mmrl/io.hpp"

namespace fs = std::filesystem;
using namespace mmrl;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("mmrl-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::main(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

IterationTrace read_trace(const std::string& path) {
  std::ifstream in(path);
  return io::read_trace_csv(in);
}

/// Every column except wall_ms, which is the one non-deterministic field.
std::string strip_timing(const std::string& csv) {
  std::stringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

}  // namespace

TEST_CASE("gen writes valid, reproducible instances") {
  TempDir d;
  auto r = run_cli({"gen", "--states", "2", "--actions", "2", "--objectives", "2", "--count", "50", "--seed", "100",
                "--out", d / "a"});
  REQUIRE(r.code == cli::kOk);
  const auto manifest = io::Json::parse(r.out);
  REQUIRE(manifest["files"].size() == 50);
  for (const auto& f : manifest["files"]) {
    const auto m = io::instance_from_json(io::read_json_file(f["path"].template get<std::string>()));
    CHECK(validate(m).empty());
  }
  CHECK(manifest["files"][49]["seed"] == 149);
  REQUIRE(run_cli({"gen", "--count", "50", "--seed", "100", "--out", d / "b"}).code == cli::kOk);
  for (int s = 100; s < 150; ++s) {
    const auto name = "instance-" + std::to_string(s) + ".json";
    CHECK(slurp(d / ("a/" + name)) == slurp(d / ("b/" + name)));
  }
}

TEST_CASE("exit codes") {
  TempDir d;
  CHECK(run_cli({"gen", "--count", "0"}).code == cli::kUsage);
  CHECK(run_cli({"frobnicate"}).code == cli::kUsage);
  CHECK(run_cli({}).code == cli::kUsage);
  CHECK(run_cli({"gen", "--reward-min", "5", "--reward-max", "1", "--out", d / "x"}).code == cli::kUsage);
  CHECK(run_cli({"solve", "--instance", d / "missing.json"}).code == cli::kDataError);
  {
    std::ofstream(d / "broken.json") << "{\"gamma\": 0.5, \"mu\": [1]";
  }
  CHECK(run_cli({"solve", "--instance", d / "broken.json"}).code == cli::kDataError);
  {
    std::ofstream(d / "bad_row.json")
        << R"({"gamma":0.5,"mu":[1],"transition":[[[0.6],[1]]],"rewards":[[[1,2]]]})";
  }
  CHECK(run_cli({"oracle", "--instance", d / "bad_row.json"}).code == cli::kDataError);

  REQUIRE(run_cli({"gen", "--out", d.path.string()}).code == cli::kOk);
  const auto inst = d / "instance-0.json";
  CHECK(run_cli({"solve", "--instance", inst, "--theory-eps", "0.5", "--out", d / "t.csv"}).code == cli::kUsage);
  CHECK(run_cli({"solve", "--instance", inst, "--eta", "100", "--out", d / "t.csv"}).code == cli::kUsage);
  const auto budget = run_cli({"oracle", "--instance", inst, "--budget", "1", "--tol", "1e-300", "--out", d / "eq.json"});
  CHECK(budget.code == cli::kNumericalFailure);
  CHECK(io::read_json_file(d / "eq.json")["converged"] == false);
  CHECK(run_cli({"gen", "--help"}).code == cli::kOk);
}

TEST_CASE("the installed binary propagates exit codes") {
  const std::string bin = MMRL_BINARY;
  CHECK(WEXITSTATUS(std::system((bin + " gen --count 0 >/dev/null 2>&1").c_str())) == 1);
  CHECK(WEXITSTATUS(std::system((bin + " solve --instance /nonexistent.json >/dev/null 2>&1").c_str())) == 2);
}

TEST_CASE("solve with the benchmark settings reduces the Nash gap") {
  TempDir d;
  REQUIRE(run_cli({"gen", "--seed", "100", "--out", d.path.string()}).code == cli::kOk);
  const auto r = run_cli({"solve", "--instance", d / "instance-100.json", "--algo", "eram", "--eval", "exact", "--iters",
                      "20000", "--tau", "0.05", "--tau-w", "0.05", "--eta", "0.01", "--lambda", "0.0001", "--out",
                      d / "t.csv"});
  REQUIRE(r.code == cli::kOk);
  const auto t = read_trace(d / "t.csv");
  CHECK(t.rows.back().iter == 20000);
  CHECK(*t.rows.back().nash_gap < *t.rows.front().nash_gap);
  const auto meta = io::read_json_file(d / "t.meta.json");
  CHECK(meta["config"]["lambda"] == 1e-4);
  CHECK(meta["instance"]["hash"].get<std::string>().size() == 16);
  CHECK(meta["status"] == "ok");
}

TEST_CASE("solve flags override the config file") {
  TempDir d;
  REQUIRE(run_cli({"gen", "--out", d.path.string()}).code == cli::kOk);
  std::ofstream(d / "cfg.json") << R"({"algorithm": "aram", "tau": 0.1, "iters": 40, "trace_every": 10})";
  REQUIRE(run_cli({"solve", "--instance", d / "instance-0.json", "--config", d / "cfg.json", "--iters", "30", "--out",
               d / "t.csv"})
              .code == cli::kOk);
  const auto meta = io::read_json_file(d / "t.meta.json");
  CHECK(meta["config"]["algorithm"] == "aram");
  CHECK(meta["config"]["tau"] == 0.1);
  CHECK(meta["config"]["iters"] == 30);
  CHECK(read_trace(d / "t.csv").rows.size() == 4);
}

TEST_CASE("one-hot traces carry vertex weights; sampled traces are reproducible") {
  TempDir d;
  REQUIRE(run_cli({"gen", "--objectives", "3", "--out", d.path.string()}).code == cli::kOk);
  const auto inst = d / "instance-0.json";
  REQUIRE(run_cli({"solve", "--instance", inst, "--algo", "onehot", "--iters", "1000", "--trace-every", "10", "--out",
               d / "oh.csv"})
              .code == cli::kOk);
  for (const auto& row : read_trace(d / "oh.csv").rows)
    for (int k = 0; k < 3; ++k) CHECK((row.weight(k) == 0.0 || row.weight(k) == 1.0));

  for (const char* name : {"s1.csv", "s2.csv"})
    REQUIRE(run_cli({"solve", "--instance", inst, "--eval", "sampled", "--samples", "256", "--seed", "3", "--iters", "300",
                 "--out", d / name})
                .code == cli::kOk);
  CHECK(strip_timing(slurp(d / "s1.csv")) == strip_timing(slurp(d / "s2.csv")));
  REQUIRE(run_cli({"solve", "--instance", inst, "--eval", "sampled", "--samples", "256", "--seed", "4", "--iters", "300",
               "--out", d / "s3.csv"})
              .code == cli::kOk);
  CHECK(strip_timing(slurp(d / "s1.csv")) != strip_timing(slurp(d / "s3.csv")));
}

TEST_CASE("oracle output") {
  TempDir d;
  auto r = run_cli({"oracle", "--fixture", "symmetric", "--tau", "0.1", "--tau-w", "0.1"});
  REQUIRE(r.code == cli::kOk);
  auto j = io::Json::parse(r.out);
  CHECK(std::abs(j["equilibrium"]["weight"][0].get<double>() - 0.5) <= 1e-6);
  CHECK(j["equilibrium"]["residuals"]["policy"].get<double>() <= 1e-8);
  CHECK(j["equilibrium"]["residuals"]["weight"].get<double>() <= 1e-8);

  REQUIRE(run_cli({"gen", "--count", "5", "--seed", "20", "--out", d.path.string()}).code == cli::kOk);
  for (int s = 20; s < 25; ++s) {
    r = run_cli({"oracle", "--instance", d / ("instance-" + std::to_string(s) + ".json"), "--tau-w", "1e-3", "--out",
             d / "eq.json"});
    REQUIRE(r.code == cli::kOk);
    j = io::read_json_file(d / "eq.json");
    CHECK(j["agreement"]["within"] == true);
    CHECK(j["agreement"]["abs_diff"].get<double>() <= 1e-4 + 10 * 1e-3);
    // the equilibrium doubles as a reference for solve and gap
    REQUIRE(run_cli({"solve", "--instance", d / ("instance-" + std::to_string(s) + ".json"), "--tau-w", "1e-3",
                 "--reference", d / "eq.json", "--iters", "200", "--out", d / "t.csv"})
                .code == cli::kOk);
    CHECK(read_trace(d / "t.csv").rows.back().log_policy_gap.has_value());
  }
  CHECK(run_cli({"solve", "--instance", d / "instance-20.json", "--tau-w", "0.5", "--reference", d / "eq.json", "--out",
             d / "t.csv"})
            .code == cli::kDataError);
}

TEST_CASE("gap command") {
  TempDir d;
  REQUIRE(run_cli({"gen", "--fixture", "symmetric", "--out", d.path.string()}).code == cli::kOk);
  auto r = run_cli({"gap", "--instance", d / "symmetric.json", "--weight", "0.5,0.5"});
  REQUIRE(r.code == cli::kOk);
  CHECK(std::abs(io::Json::parse(r.out)["gap"]["nash_gap"].get<double>()) <= 1e-8);
  std::ofstream(d / "a0.json") << "[[1, 0]]";
  r = run_cli({"gap", "--instance", d / "symmetric.json", "--policy", d / "a0.json", "--weight", "1,0", "--with-eval"});
  REQUIRE(r.code == cli::kOk);
  const auto j = io::Json::parse(r.out);
  CHECK(std::abs(j["gap"]["exploit_adversary"].get<double>() - 2.0) <= 1e-9);
  CHECK(j.contains("eval"));
  CHECK(run_cli({"gap", "--instance", d / "symmetric.json", "--weight", "0.7,0.7"}).code == cli::kDataError);
  CHECK(run_cli({"gap"}).code == cli::kUsage);
}

TEST_CASE("sweep is idempotent and report aggregates it") {
  TempDir d;
  std::ofstream(d / "sweep.json") << R"({"instances": [{"states": 2, "actions": 2, "objectives": 2, "count": 3},
                                                        {"states": 3, "actions": 2, "objectives": 3, "count": 2,
                                                         "seed_base": 10}],
                                          "solvers": [{"algorithm": "eram", "iters": 300, "trace_every": 50}]})";
  auto r = run_cli({"sweep", "--config", d / "sweep.json", "--out", d / "run", "--workers", "2"});
  REQUIRE(r.code == cli::kOk);
  CHECK(io::Json::parse(r.out)["executed"] == 5);

  r = run_cli({"sweep", "--config", d / "sweep.json", "--out", d / "run"});
  REQUIRE(r.code == cli::kOk);
  CHECK(io::Json::parse(r.out)["executed"] == 0);
  CHECK(io::Json::parse(r.out)["skipped"] == 5);

  fs::remove(d / "run/2x2x2/eram-0/inst-1.csv");
  r = run_cli({"sweep", "--config", d / "sweep.json", "--out", d / "run"});
  CHECK(io::Json::parse(r.out)["executed"] == 1);

  r = run_cli({"report", "--sweep", d / "run", "--out", d / "rep", "--log-y"});
  REQUIRE(r.code == cli::kOk);
  const auto svg = slurp(d / "rep/nash_gap.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  std::size_t curves = 0;
  for (std::size_t p = 0; (p = svg.find("<polyline", p)) != std::string::npos; ++p) ++curves;
  CHECK(curves == 2);

  // summary against an independent streaming (Welford) pass
  const auto traces = experiment::load_sweep(d / "run");
  REQUIRE(traces.size() == 5);
  std::ifstream in(d / "rep/summary.csv");
  std::string line;
  std::getline(in, line);
  int checked = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
    const std::string group = f[0];
    const long iter = std::stol(f[5]);
    double mean = 0, m2 = 0;
    int n = 0;
    for (const auto& t : traces) {
      if (t.group != group) continue;
      for (const auto& row : t.trace.rows) {
        if (row.iter != iter) continue;
        ++n;
        const double delta = *row.nash_gap - mean;
        mean += delta / n;
        m2 += delta * (*row.nash_gap - mean);
      }
    }
    CHECK(n == std::stoi(f[6]));
    CHECK(std::abs(std::stod(f[7]) - mean) <= 1e-12 * std::max(1.0, std::abs(mean)));
    CHECK(std::abs(std::stod(f[8]) - std::sqrt(m2 / n)) <= 1e-12 * std::max(1.0, mean));
    ++checked;
  }
  CHECK(checked == 2 * 7);
}

TEST_CASE("report over one trace has zero spread; two algorithms give two series") {
  TempDir d;
  REQUIRE(run_cli({"gen", "--out", d.path.string()}).code == cli::kOk);
  for (const char* algo : {"eram", "onehot"})
    REQUIRE(run_cli({"solve", "--instance", d / "instance-0.json", "--algo", algo, "--iters", "500", "--out",
                 d / (std::string(algo) + ".csv")})
                .code == cli::kOk);
  REQUIRE(run_cli({"report", "--trace", d / "eram.csv", "--out", d / "one"}).code == cli::kOk);
  std::ifstream in(d / "one/summary.csv");
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
    CHECK(f[8] == "0");   // nash_gap_std
    CHECK(f[11] == "0");  // min_value_std
  }
  REQUIRE(run_cli({"report", "--trace", d / "eram.csv", "--trace", d / "onehot.csv", "--out", d / "two"}).code ==
          cli::kOk);
  const auto svg = slurp(d / "two/nash_gap.svg");
  CHECK(svg.find("2x2x2 eram") != std::string::npos);
  CHECK(svg.find("2x2x2 onehot") != std::string::npos);
  CHECK(run_cli({"report", "--trace", d / "eram.csv", "--metric", "bogus", "--out", d / "bad"}).code == cli::kUsage);
  std::ofstream(d / "junk.csv") << "iter,what\n1,2\n";
  CHECK(run_cli({"report", "--trace", d / "junk.csv", "--out", d / "bad"}).code == cli::kDataError);
}

TEST_CASE("worker count comes from the environment") {
  ::setenv("MMRL_WORKERS", "3", 1);
  CHECK(experiment::worker_count() == 3);
  ::setenv("MMRL_WORKERS", "zero", 1);
  CHECK_THROWS(experiment::worker_count());
  ::unsetenv("MMRL_WORKERS");
  CHECK(experiment::worker_count() >= 1);
}

TEST_CASE("sweep presets") {
  const auto def = experiment::default_sweep();
  CHECK(experiment::expand(def).size() == 150);
  CHECK(def.solvers.front().eta == 0.01);
  CHECK(def.solvers.front().lambda == 1e-4);
  CHECK(def.gamma == 0.95);
  const auto aram = experiment::aram_sweep();
  const auto runs = experiment::expand(aram);
  CHECK(runs.size() == 100);
  CHECK(runs.front().size.num_objectives == 10);
  CHECK(runs.front().solver.algorithm == Algorithm::aram);
  // per-run substreams do not depend on scheduling
  CHECK(runs[7].solver.sampling.seed == experiment::expand(aram)[7].solver.sampling.seed);
  CHECK(runs[7].solver.sampling.seed != runs[8].solver.sampling.seed);
}
