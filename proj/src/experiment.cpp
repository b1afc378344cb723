#include "mmrl/experiment.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "mmrl/error.hpp"
#include "mmrl/oracle.hpp"
#include "mmrl/rng.hpp"

namespace fs = std::filesystem;

namespace mmrl::experiment {

namespace {

SolverConfig benchmark_solver(Algorithm algorithm) {
  SolverConfig c;
  c.algorithm = algorithm;
  c.tau = 0.05;
  c.tau_w = 0.05;
  c.eta = 0.01;
  c.lambda = 1e-4;
  c.iters = 20000;
  c.trace_every = 100;
  return c;
}

std::string size_label(int S, int A, int K) {
  return std::to_string(S) + "x" + std::to_string(A) + "x" + std::to_string(K);
}

}  // namespace

SweepConfig default_sweep() {
  SweepConfig c;
  c.instances = {{2, 2, 2, 50, 0}, {3, 3, 6, 50, 1000}, {4, 4, 4, 50, 2000}};
  c.solvers = {benchmark_solver(Algorithm::eram)};
  return c;
}

SweepConfig aram_sweep() {
  SweepConfig c;
  c.instances = {{2, 2, 10, 50, 3000}, {4, 4, 10, 50, 4000}};
  c.solvers = {benchmark_solver(Algorithm::aram)};
  c.out_dir = "sweep-aram";
  return c;
}

SweepConfig sweep_from_json(const io::Json& j, SweepConfig c) {
  try {
    if (j.contains("instances")) {
      c.instances.clear();
      for (const auto& e : j["instances"]) {
        InstanceSpec s;
        s.num_states = e.value("states", s.num_states);
        s.num_actions = e.value("actions", s.num_actions);
        s.num_objectives = e.value("objectives", s.num_objectives);
        s.count = e.value("count", s.count);
        s.seed_base = e.value("seed_base", s.seed_base);
        c.instances.push_back(s);
      }
    }
    if (j.contains("solvers")) {
      const SolverConfig base = c.solvers.empty() ? benchmark_solver(Algorithm::eram) : c.solvers.front();
      c.solvers.clear();
      for (const auto& e : j["solvers"]) {
        SolverConfig s = base;
        io::merge_json(e, s);
        c.solvers.push_back(s);
      }
    }
    c.gamma = j.value("gamma", c.gamma);
    c.reward_min = j.value("reward_min", c.reward_min);
    c.reward_max = j.value("reward_max", c.reward_max);
    c.reference = j.value("reference", c.reference);
    c.master_seed = j.value("master_seed", c.master_seed);
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    c.workers = j.value("workers", c.workers);
  } catch (const io::Json::exception& e) {
    throw InvalidArgument(std::string("malformed sweep config: ") + e.what());
  }
  return c;
}

io::Json to_json(const SweepConfig& c) {
  io::Json inst = io::Json::array();
  for (const auto& s : c.instances)
    inst.push_back({{"states", s.num_states}, {"actions", s.num_actions}, {"objectives", s.num_objectives},
                    {"count", s.count}, {"seed_base", s.seed_base}});
  io::Json solvers = io::Json::array();
  for (const auto& s : c.solvers) solvers.push_back(io::to_json(s));
  return {{"instances", inst}, {"solvers", solvers}, {"gamma", c.gamma}, {"reward_min", c.reward_min},
          {"reward_max", c.reward_max}, {"reference", c.reference}, {"master_seed", c.master_seed},
          {"out_dir", c.out_dir.string()}, {"workers", c.workers}};
}

int worker_count() {
  if (const char* env = std::getenv("MMRL_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n >= 1) return static_cast<int>(n);
    throw InvalidArgument("MMRL_WORKERS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<RunSpec> expand(const SweepConfig& c) {
  if (c.instances.empty() || c.solvers.empty()) throw InvalidArgument("sweep needs instances and solvers");
  std::vector<RunSpec> out;
  for (const auto& size : c.instances) {
    if (size.count < 1) throw InvalidArgument("instance count must be positive");
    for (std::size_t si = 0; si < c.solvers.size(); ++si) {
      for (int i = 0; i < size.count; ++i) {
        RunSpec r;
        r.index = out.size();
        r.size = size;
        r.instance_seed = size.seed_base + static_cast<std::uint64_t>(i);
        r.solver_index = si;
        r.solver = c.solvers[si];
        r.solver.sampling.seed = derive_seed(c.master_seed, r.index);
        r.id = size_label(size.num_states, size.num_actions, size.num_objectives) + "/" +
               to_string(r.solver.algorithm) + "-" + std::to_string(si) + "/inst-" + std::to_string(r.instance_seed);
        const io::Json keyed = {{"id", r.id},
                                {"solver", io::to_json(r.solver)},
                                {"gamma", c.gamma},
                                {"rewards", {c.reward_min, c.reward_max}},
                                {"reference", c.reference}};
        r.key = io::fnv1a_hex(keyed.dump());
        out.push_back(std::move(r));
      }
    }
  }
  std::set<std::string> ids;
  for (const auto& r : out)
    if (!ids.insert(r.id).second) throw InvalidArgument("duplicate run path " + r.id);
  return out;
}

std::map<std::string, ManifestEntry> read_manifest(const fs::path& dir) {
  std::map<std::string, ManifestEntry> out;
  std::ifstream in(dir / "manifest.jsonl");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = io::Json::parse(line);
      ManifestEntry e{j.at("id"), j.at("key"), j.at("status"), j.value("error", "")};
      out[e.key] = std::move(e);
    } catch (const io::Json::exception&) {
      // a torn line from an interrupted writer; the run is redone
    }
  }
  return out;
}

namespace {

void append_manifest(const fs::path& dir, const ManifestEntry& e) {
  const io::Json j = {{"id", e.id}, {"key", e.key}, {"status", e.status}, {"error", e.error}};
  const std::string line = j.dump() + "\n";
  const int lock = ::open((dir / "manifest.lock").c_str(), O_CREAT | O_RDWR, 0644);
  if (lock < 0) throw std::runtime_error("cannot open manifest lock in " + dir.string());
  ::flock(lock, LOCK_EX);
  const int fd = ::open((dir / "manifest.jsonl").c_str(), O_CREAT | O_WRONLY | O_APPEND, 0644);
  bool ok = fd >= 0 && ::write(fd, line.data(), line.size()) == static_cast<ssize_t>(line.size());
  if (fd >= 0) ::close(fd);
  ::flock(lock, LOCK_UN);
  ::close(lock);
  if (!ok) throw std::runtime_error("cannot append to manifest in " + dir.string());
}

}  // namespace

io::Json run_metadata(const MomdpInstance& m, const SolverConfig& cfg, const Equilibrium* reference) {
  io::Json inst = {{"hash", io::instance_hash(m)},
                   {"states", m.num_states()},
                   {"actions", m.num_actions()},
                   {"objectives", m.num_objectives()},
                   {"gamma", m.gamma()},
                   {"generator", m.meta().generator},
                   {"mu", m.meta().mu_rule}};
  inst["seed"] = m.meta().seed ? io::Json(*m.meta().seed) : io::Json(nullptr);
  io::Json out = {{"config", io::to_json(cfg)}, {"instance", inst}, {"rng", Rng::kName}};
  if (reference) {
    out["reference"] = {{"residual_policy", reference->residual_policy},
                        {"residual_weight", reference->residual_weight},
                        {"value", reference->value_star},
                        {"method", reference->method}};
  } else {
    out["reference"] = nullptr;
  }
  return out;
}

SweepOutcome run_sweep(const SweepConfig& c, const std::function<void(const ManifestEntry&)>& on_done) {
  const auto runs = expand(c);
  fs::create_directories(c.out_dir);
  io::write_text_file(c.out_dir / "sweep.json", to_json(c).dump(2) + "\n");

  const auto done = read_manifest(c.out_dir);
  std::vector<const RunSpec*> todo;
  SweepOutcome outcome;
  for (const auto& r : runs) {
    auto it = done.find(r.key);
    if (it != done.end() && it->second.status == "ok" && fs::exists(c.out_dir / (r.id + ".csv")))
      ++outcome.skipped;
    else
      todo.push_back(&r);
  }

  std::atomic<std::size_t> next{0};
  std::mutex mu;
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < todo.size();) {
      const RunSpec& r = *todo[i];
      ManifestEntry entry{r.id, r.key, "ok", ""};
      try {
        GeneratorConfig g;
        g.num_states = r.size.num_states;
        g.num_actions = r.size.num_actions;
        g.num_objectives = r.size.num_objectives;
        g.gamma = c.gamma;
        g.reward_min = c.reward_min;
        g.reward_max = c.reward_max;
        g.seed = r.instance_seed;
        const MomdpInstance m = random_instance(g);
        std::optional<Equilibrium> ref;
        if (c.reference) {
          ref = solve_equilibrium(m, r.solver.tau, r.solver.tau_w);
          if (!ref->converged) throw MaxIterExceeded(ref->max_residual());
        }
        const RunResult result = run(m, r.solver, ref ? &*ref : nullptr);
        std::ostringstream csv;
        io::write_trace_csv(csv, result.trace);
        io::Json meta = run_metadata(m, r.solver, ref ? &*ref : nullptr);
        meta["run"] = {{"id", r.id}, {"key", r.key}, {"index", r.index}, {"variant", r.solver_index},
                       {"master_seed", c.master_seed}, {"sampling_seed", r.solver.sampling.seed}};
        io::write_text_file(c.out_dir / (r.id + ".meta.json"), meta.dump(2) + "\n");
        io::write_text_file(c.out_dir / (r.id + ".csv"), csv.str());
      } catch (const std::exception& e) {
        entry.status = "failed";
        entry.error = e.what();
      }
      std::lock_guard<std::mutex> guard(mu);
      append_manifest(c.out_dir, entry);
      ++outcome.executed;
      if (entry.status != "ok") outcome.failed.push_back(entry);
      if (on_done) on_done(entry);
    }
  };

  const int workers = std::max(1, std::min<int>(c.workers > 0 ? c.workers : worker_count(),
                                                static_cast<int>(std::max<std::size_t>(todo.size(), 1))));
  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  std::sort(outcome.failed.begin(), outcome.failed.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.id < b.id; });
  return outcome;
}

LabeledTrace load_trace(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw InvalidArgument("cannot open " + csv.string());
  LabeledTrace out;
  try {
    out.trace = io::read_trace_csv(in);
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(csv.string() + ": " + e.what());
  }
  fs::path meta = csv;
  meta.replace_extension(".meta.json");
  if (fs::exists(meta)) {
    const auto j = io::read_json_file(meta);
    try {
      out.num_states = j.at("instance").at("states");
      out.num_actions = j.at("instance").at("actions");
      out.num_objectives = j.at("instance").at("objectives");
      out.algorithm = j.at("config").at("algorithm");
    } catch (const io::Json::exception& e) {
      throw InvalidArgument(meta.string() + ": " + e.what());
    }
    out.group = size_label(out.num_states, out.num_actions, out.num_objectives) + " " + out.algorithm;
    if (j.contains("run") && j["run"].value("variant", 0) > 0)
      out.group += "#" + std::to_string(j["run"]["variant"].get<int>());
  } else {
    out.num_objectives = out.trace.num_objectives;
    out.group = csv.stem().string();
  }
  return out;
}

std::vector<LabeledTrace> load_sweep(const fs::path& dir) {
  if (!fs::exists(dir / "manifest.jsonl")) throw InvalidArgument("no manifest.jsonl in " + dir.string());
  const auto latest = read_manifest(dir);
  std::vector<LabeledTrace> out;
  std::vector<std::string> ids;
  for (const auto& [key, e] : latest)
    if (e.status == "ok") ids.push_back(e.id);
  // grid order is recoverable from the sweep description when present
  if (fs::exists(dir / "sweep.json")) {
    std::vector<std::string> ordered;
    try {
      std::set<std::string> wanted(ids.begin(), ids.end());
      for (const auto& r : expand(sweep_from_json(io::read_json_file(dir / "sweep.json"))))
        if (wanted.erase(r.id)) ordered.push_back(r.id);
      ordered.insert(ordered.end(), wanted.begin(), wanted.end());
      ids = std::move(ordered);
    } catch (const InvalidArgument&) {
      std::sort(ids.begin(), ids.end());
    }
  } else {
    std::sort(ids.begin(), ids.end());
  }
  for (const auto& id : ids) out.push_back(load_trace(dir / (id + ".csv")));
  return out;
}

namespace {

const std::vector<TraceField> kSummaryFields = {TraceField::nash_gap,         TraceField::min_value,
                                                TraceField::scalar_soft_value, TraceField::log_policy_gap,
                                                TraceField::w_gap,            TraceField::q_gap};

Moments moments(std::vector<double> x) {
  Moments m;
  const double n = static_cast<double>(x.size());
  for (double v : x) m.mean += v;
  m.mean /= n;
  double ss = 0;
  for (double v : x) ss += (v - m.mean) * (v - m.mean);
  m.std = std::sqrt(ss / n);
  std::sort(x.begin(), x.end());
  const std::size_t h = x.size() / 2;
  m.median = x.size() % 2 ? x[h] : 0.5 * (x[h - 1] + x[h]);
  return m;
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<LabeledTrace>& traces) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const LabeledTrace*>> groups;
  for (const auto& t : traces) {
    if (!groups.count(t.group)) order.push_back(t.group);
    groups[t.group].push_back(&t);
  }
  std::vector<SummaryRow> out;
  for (const auto& name : order) {
    const auto& members = groups[name];
    std::set<long> checkpoints;
    for (const auto& row : members.front()->trace.rows) checkpoints.insert(row.iter);
    for (const auto* t : members) {
      std::set<long> mine;
      for (const auto& row : t->trace.rows) mine.insert(row.iter);
      std::set<long> both;
      std::set_intersection(checkpoints.begin(), checkpoints.end(), mine.begin(), mine.end(),
                            std::inserter(both, both.begin()));
      checkpoints = std::move(both);
    }
    for (long iter : checkpoints) {
      SummaryRow s;
      s.group = name;
      s.num_states = members.front()->num_states;
      s.num_actions = members.front()->num_actions;
      s.num_objectives = members.front()->num_objectives;
      s.algorithm = members.front()->algorithm;
      s.iter = iter;
      s.count = static_cast<int>(members.size());
      for (TraceField f : kSummaryFields) {
        std::vector<double> xs;
        for (const auto* t : members) {
          const auto it = std::find_if(t->trace.rows.begin(), t->trace.rows.end(),
                                       [&](const TraceRow& r) { return r.iter == iter; });
          if (auto v = field_value(*it, f)) xs.push_back(*v);
        }
        if (xs.size() == members.size()) s.fields[f] = moments(std::move(xs));
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "group,states,actions,objectives,algorithm,iter,count";
  for (TraceField f : kSummaryFields) {
    const auto n = to_string(f);
    out << ',' << n << "_mean," << n << "_std," << n << "_median";
  }
  out << '\n';
  for (const auto& r : rows) {
    out << r.group << ',' << r.num_states << ',' << r.num_actions << ',' << r.num_objectives << ',' << r.algorithm
        << ',' << r.iter << ',' << r.count;
    for (TraceField f : kSummaryFields) {
      auto it = r.fields.find(f);
      if (it == r.fields.end()) {
        out << ",,,";
      } else {
        out << ',' << io::format_double(it->second.mean) << ',' << io::format_double(it->second.std) << ','
            << io::format_double(it->second.median);
      }
    }
    out << '\n';
  }
}

namespace {

std::string fmt_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  return out;
}

}  // namespace

std::string render_chart(const std::vector<SummaryRow>& rows, TraceField field, const ChartOptions& opt) {
  struct Point {
    double x, mean, lo, hi;
  };
  std::vector<std::string> order;
  std::map<std::string, std::vector<Point>> series;
  for (const auto& r : rows) {
    auto it = r.fields.find(field);
    if (it == r.fields.end()) continue;
    if (!series.count(r.group)) order.push_back(r.group);
    const auto& m = it->second;
    series[r.group].push_back({static_cast<double>(r.iter), m.mean, m.mean - m.std, m.mean + m.std});
  }

  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  double positive_floor = INFINITY;
  for (const auto& [_, pts] : series)
    for (const auto& p : pts)
      if (p.mean > 0) positive_floor = std::min(positive_floor, p.mean);
  positive_floor = std::isfinite(positive_floor) ? positive_floor / 10 : 1e-12;
  auto ty = [&](double y) { return opt.log_y ? std::log10(std::max(y, positive_floor)) : y; };
  for (const auto& [_, pts] : series) {
    for (const auto& p : pts) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, ty(p.lo));
      y1 = std::max(y1, ty(p.hi));
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pad = 0.04 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  const double L = 80, R = 180, T = 40, B = 50;
  const double W = opt.width, H = opt.height;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (ty(y) - y0) / (y1 - y0) * (H - T - B); };
  auto py_raw = [&](double v) { return H - B - (v - y0) / (y1 - y0) * (H - T - B); };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<title>" << escape(opt.title) << "</title>\n";
  s << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  s << "<text class=\"title\" x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << escape(opt.title) << "</text>\n";

  s << "<g class=\"axes\" stroke=\"black\">\n";
  s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\"/>\n";
  s << "</g>\n<g class=\"ticks\">\n";
  for (double t : nice_ticks(x0, x1)) {
    s << "<line x1=\"" << px(t) << "\" y1=\"" << H - B << "\" x2=\"" << px(t) << "\" y2=\"" << H - B + 5
      << "\" stroke=\"black\"/><text x=\"" << px(t) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
      << fmt_num(t) << "</text>\n";
  }
  std::vector<double> yt;
  if (opt.log_y) {
    for (double e = std::ceil(y0); e <= y1; e += 1) yt.push_back(e);
    if (yt.size() > 8) {
      std::vector<double> thin;
      const std::size_t every = (yt.size() + 7) / 8;
      for (std::size_t i = 0; i < yt.size(); i += every) thin.push_back(yt[i]);
      yt = std::move(thin);
    }
  } else {
    yt = nice_ticks(y0, y1);
  }
  for (double t : yt) {
    const double y = py_raw(t);
    s << "<line x1=\"" << L - 5 << "\" y1=\"" << y << "\" x2=\"" << L << "\" y2=\"" << y
      << "\" stroke=\"black\"/><text x=\"" << L - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
      << (opt.log_y ? "1e" + fmt_num(t) : fmt_num(t)) << "</text>\n";
  }
  s << "</g>\n";
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">iteration</text>\n";
  s << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (T + H - B) / 2 << ")\">" << escape(opt.y_label.empty() ? to_string(field) : opt.y_label)
    << (opt.log_y ? " (log)" : "") << "</text>\n";

  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& pts = series[order[i]];
    const char* color = palette[i % 10];
    s << "<g class=\"series\" data-label=\"" << escape(order[i]) << "\">\n";
    s << "<path class=\"band\" fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"none\" d=\"";
    for (std::size_t k = 0; k < pts.size(); ++k) s << (k ? " L" : "M") << px(pts[k].x) << ',' << py(pts[k].hi);
    for (std::size_t k = pts.size(); k-- > 0;) s << " L" << px(pts[k].x) << ',' << py(pts[k].lo);
    s << " Z\"/>\n";
    s << "<polyline class=\"mean\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"";
    for (std::size_t k = 0; k < pts.size(); ++k) s << (k ? " " : "") << px(pts[k].x) << ',' << py(pts[k].mean);
    s << "\"/>\n</g>\n";
    const double ly = T + 10 + 20.0 * static_cast<double>(i);
    s << "<g class=\"legend\"><rect x=\"" << W - R + 15 << "\" y=\"" << ly - 8 << "\" width=\"14\" height=\"10\" fill=\""
      << color << "\"/><text x=\"" << W - R + 35 << "\" y=\"" << ly + 1 << "\">" << escape(order[i])
      << "</text></g>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace mmrl::experiment
