#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mmrl/metrics.hpp"
#include "mmrl/oracle.hpp"
#include "mmrl/rng.hpp"
#include "mmrl/simplex.hpp"
#include "mmrl/solvers.hpp"

using namespace mmrl;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double median(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const auto n = x.size();
  return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

/// Runs `job(i)` for i in [0, n) on all cores.
void parallel_for(int n, const std::function<void(int)>& job) {
  const int workers = std::max(1u, std::thread::hardware_concurrency());
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(workers, n); ++t)
    pool.emplace_back([&] {
      for (int i; (i = next++) < n;) job(i);
    });
  for (auto& th : pool) th.join();
}

MomdpInstance small_instance(int S, int A, int K, double gamma, std::uint64_t seed) {
  GeneratorConfig g;
  g.num_states = S;
  g.num_actions = A;
  g.num_objectives = K;
  g.gamma = gamma;
  g.seed = seed;
  return random_instance(g);
}

double dist_inf(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

Outcome symmetric_equilibrium() {
  const auto m = one_state_symmetric();
  const double tau = 0.1;
  const auto steps = theory_stepsizes(m, tau, 0.1, tau);
  SolverConfig c;
  c.tau = c.tau_w = tau;
  c.eta = steps.eta;
  c.lambda = steps.lambda;
  c.iters = 5000;
  c.trace_every = 5000;
  c.record_nash_gap = false;
  const auto r = run(m, c);
  const double pi_err = (r.policy.probs.array() - 0.5).abs().maxCoeff();
  const double w_err = (r.weight.w.array() - 0.5).abs().maxCoeff();
  return {pi_err <= 1e-6 && w_err <= 1e-6, fmt("|pi-uniform|=%.2e |w-(.5,.5)|=%.2e", pi_err, w_err)};
}

Outcome maxmin_recovery() {
  const auto m = one_state_asymmetric();
  // brute-force oracle: grid over pi(a0) at 1e-5 spacing
  double oracle = -1, argmax = 0;
  for (long i = 0; i <= 100000; ++i) {
    const double p = i * 1e-5;
    const double v = std::min(2 * p, 1 - p);
    if (v > oracle) oracle = v, argmax = p;
  }
  std::string detail = fmt("grid oracle %.6f at p=%.5f;", oracle, argmax);
  bool pass = std::abs(oracle - 2.0 / 3.0) <= 1e-5;
  double previous = INFINITY;
  for (double tau : {0.1, 0.01, 0.001}) {
    SolverConfig c;
    c.tau = c.tau_w = tau;
    c.eta = (1 - m.gamma()) / (2 * tau);
    c.lambda = 0.1 * tau;
    c.iters = 20000;
    c.trace_every = c.iters;
    c.record_nash_gap = false;
    const auto r = run(m, c);
    const double err = std::abs(r.trace.rows.back().min_value - oracle);
    const double bound = tau == 0.1 ? 0.05 : tau == 0.001 ? 0.005 : INFINITY;
    pass = pass && err <= bound && err <= previous + 1e-12;
    previous = err;
    detail += fmt(" tau=%g err=%.2e", tau, err);
  }
  return {pass, detail};
}

Outcome gap_reduction() {
  struct Size {
    int S, A, K;
  };
  const std::vector<Size> sizes{{2, 2, 2}, {3, 3, 6}, {4, 4, 4}};
  const int n = 50;
  std::vector<double> initial(sizes.size() * n), final(sizes.size() * n);
  parallel_for(static_cast<int>(initial.size()), [&](int i) {
    const auto& z = sizes[i / n];
    const auto m = small_instance(z.S, z.A, z.K, 0.95, 1000 * (i / n) + i % n);
    SolverConfig c;  // defaults are the benchmark settings
    c.trace_every = c.iters;
    const auto r = run(m, c);
    initial[i] = *r.trace.rows.front().nash_gap;
    final[i] = *r.trace.rows.back().nash_gap;
  });
  bool pass = true;
  std::string detail;
  for (std::size_t z = 0; z < sizes.size(); ++z) {
    int decreased = 0;
    std::vector<double> a, b;
    for (int j = 0; j < n; ++j) {
      decreased += final[z * n + j] < initial[z * n + j];
      a.push_back(initial[z * n + j]);
      b.push_back(final[z * n + j]);
    }
    const double ratio = median(b) / median(a);
    pass = pass && decreased >= 48 && ratio <= 0.1;
    detail += fmt("%s%dx%dx%d: %d/50 decreased, median ratio %.3f", z ? "; " : "", sizes[z].S, sizes[z].A,
                  sizes[z].K, decreased, ratio);
  }
  return {pass, detail};
}

Outcome geometric_decay() {
  const int n = 10;
  std::vector<RateFit> fits(n);
  std::vector<double> rate_bound(n);
  std::vector<bool> reference_ok(n);
  parallel_for(n, [&](int i) {
    const auto m = small_instance(2, 2, 2, 0.7, 500 + i);
    const double tau = 0.05, tau_w = 10;
    EquilibriumOptions opt;
    opt.tol = 1e-10;
    const auto eq = solve_equilibrium(m, tau, tau_w, opt);
    reference_ok[i] = eq.converged && eq.max_residual() <= 1e-10;
    const auto steps = theory_stepsizes(m, tau, 0.1, tau_w);
    rate_bound[i] = steps.rate_bound;
    SolverConfig c;
    c.tau = tau;
    c.tau_w = tau_w;
    c.eta = steps.eta;
    c.lambda = steps.lambda;
    c.iters = 1500;
    c.trace_every = 1;
    c.record_nash_gap = false;
    // below the reference accuracy the gap only measures reference error
    std::vector<double> t, gap;
    for (const auto& row : run(m, c, &eq).trace.rows) {
      if (*row.log_policy_gap < 1e-10) break;
      t.push_back(static_cast<double>(row.iter));
      gap.push_back(*row.log_policy_gap);
    }
    fits[i] = fit_rate(t, gap);
  });
  int contracting = 0, linear = 0, references = 0;
  double worst_rho = 0, worst_r2 = 1;
  for (int i = 0; i < n; ++i) {
    references += reference_ok[i];
    contracting += fits[i].rho < 1;
    linear += fits[i].r_squared >= 0.95;
    worst_rho = std::max(worst_rho, fits[i].rho);
    worst_r2 = std::min(worst_r2, fits[i].r_squared);
  }
  return {references == n && contracting == n && linear == n,
          fmt("references %d/10, rho<1 on %d/10 (max %.4f), R^2>=0.95 on %d/10 (min %.3f); theoretical 1-eps^2/2=%.4f",
              references, contracting, worst_rho, linear, worst_r2, rate_bound[0])};
}

double total_variation_tail(const IterationTrace& trace, double fraction) {
  const auto& rows = trace.rows;
  const std::size_t start = rows.size() - static_cast<std::size_t>(fraction * (rows.size() - 1)) - 1;
  double tv = 0;
  for (std::size_t i = start + 1; i < rows.size(); ++i)
    tv += std::abs(rows[i].scalar_soft_value - rows[i - 1].scalar_soft_value);
  return tv;
}

Outcome last_iterate() {
  const int n = 50;
  std::vector<double> eram_tv(n), onehot_tv(n);
  std::vector<bool> switching(n);
  parallel_for(n, [&](int i) {
    const auto m = small_instance(2, 2, 2, 0.95, i);
    SolverConfig c;
    c.trace_every = 1;
    c.record_nash_gap = false;
    eram_tv[i] = total_variation_tail(run(m, c).trace, 0.1);
    c.algorithm = Algorithm::onehot;
    const auto r = run(m, c);
    onehot_tv[i] = total_variation_tail(r.trace, 0.1);
    const auto& rows = r.trace.rows;
    for (std::size_t t = rows.size() - 100; t < rows.size(); ++t)
      if (rows[t].weight != rows[t - 1].weight) switching[i] = true;
  });
  int witnesses = 0, switches = 0, eram_stable = 0;
  for (int i = 0; i < n; ++i) {
    switches += switching[i];
    eram_stable += eram_tv[i] <= 1e-3;
    witnesses += switching[i] && eram_tv[i] <= 1e-3 && onehot_tv[i] > 1e-2;
  }
  return {witnesses >= 1, fmt("%d/50 seeds switch; %d show ERAM TV<=1e-3 with one-hot TV>1e-2; ERAM stable on %d/50",
                              switches, witnesses, eram_stable)};
}

Outcome invariants() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-20, 20);
  auto random_simplex = [&](int k) {
    Eigen::VectorXd x(k);
    for (int i = 0; i < k; ++i) x(i) = u(rng) / 4;
    return Eigen::VectorXd(softmax(x));
  };
  double shift = 0, aram = 0, soft = 0, duality = 0;
  bool log_bound = true;
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = small_instance(3, 2, 4, 0.9, 9000 + trial);
    const Weight w{random_simplex(4)};
    Eigen::MatrixXd logits(3, 2);
    for (int s = 0; s < 3; ++s)
      for (int a = 0; a < 2; ++a) logits(s, a) = u(rng) / 5;
    Policy pi{Eigen::MatrixXd(3, 2)};
    for (int s = 0; s < 3; ++s) pi.probs.row(s) = softmax(Eigen::VectorXd(logits.row(s).transpose())).transpose();
    const auto e = eval_exact(m, pi, w, 0.05);
    const double beta = 0.3 + 0.6 * (trial % 7) / 7.0, tau_w = 0.05 + trial % 3;
    const auto base = adversary_step_eram(w, e.v_init_vec, beta, tau_w);
    const auto shifted = adversary_step_eram(w, e.v_init_vec + Eigen::VectorXd::Constant(4, u(rng)), beta, tau_w);
    shift = std::max(shift, dist_inf(base.w, shifted.w));
    const auto soft_input = adversary_step_eram(w, e.v_soft_vec, beta, tau_w);
    soft = std::max(soft, dist_inf(base.w, soft_input.w));
    AramState uniform_c{Eigen::VectorXd::Constant(4, 0.25), Eigen::VectorXd::Constant(4, std::log(0.25)), 0};
    aram = std::max(aram, dist_inf(base.w, adversary_step_aram(w, e.v_init_vec, uniform_c, beta, tau_w).w));
    for (int k = 0; k < 4; ++k) {
      double flow = 0;
      for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a) flow += e.occupancy(s, a) * m.reward(k, s, a);
      duality = std::max(duality, std::abs(flow - (1 - m.gamma()) * e.v_init_vec(k)));
    }
  }
  for (int trial = 0; trial < 10000; ++trial) {
    const int k = 2 + trial % 9;
    const auto a = random_simplex(k), b = random_simplex(k);
    log_bound = log_bound && dist_inf(a, b) <= dist_inf(a.array().log().matrix(), b.array().log().matrix());
  }
  const bool pass = shift <= 1e-12 && aram <= 1e-12 && soft <= 1e-12 && log_bound && duality <= 1e-8;
  return {pass, fmt("shift %.1e, aram(uniform c) %.1e, V vs V_tau %.1e, |w-w'| <= |log w-log w'| on 1e4 pairs %s, duality %.1e", shift,
                    aram, soft, log_bound ? "holds" : "violated", duality)};
}

Outcome sampling_scaling() {
  const int n = 5, seeds = 20;
  const double tau = 0.05, tau_w = 10;
  std::vector<double> err256(n), err1024(n), gap64(n), gap1024(n);
  parallel_for(n, [&](int i) {
    const auto m = small_instance(2, 2, 2, 0.7, 700 + i);
    const auto w = Weight::uniform(2);
    const auto pi = Policy::uniform(2, 2);
    const auto exact = eval_exact(m, pi, w, tau);
    for (int s = 0; s < seeds; ++s) {
      const auto seed = derive_seed(700 + i, s);
      err256[i] += dist_inf(eval_sampled(m, pi, w, tau, {256, seed}).v_init_vec, exact.v_init_vec) / seeds;
      err1024[i] += dist_inf(eval_sampled(m, pi, w, tau, {1024, seed}).v_init_vec, exact.v_init_vec) / seeds;
    }
    const auto eq = solve_equilibrium(m, tau, tau_w);
    const auto steps = theory_stepsizes(m, tau, 0.1, tau_w);
    SolverConfig c;
    c.tau = tau;
    c.tau_w = tau_w;
    c.eta = steps.eta;
    c.lambda = steps.lambda;
    c.iters = 1500;
    c.trace_every = c.iters;
    c.record_nash_gap = false;
    c.eval_mode = EvalMode::sampled;
    c.sampling = {64, derive_seed(7000, i)};
    gap64[i] = *run(m, c, &eq).trace.rows.back().log_policy_gap;
    c.sampling.samples_per_pair = 1024;
    gap1024[i] = *run(m, c, &eq).trace.rows.back().log_policy_gap;
  });
  bool ratios_ok = true;
  int improved = 0;
  double lo = INFINITY, hi = 0;
  for (int i = 0; i < n; ++i) {
    const double ratio = err1024[i] / err256[i];
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    ratios_ok = ratios_ok && ratio >= 0.25 && ratio <= 1.0;
    improved += gap1024[i] <= gap64[i];
  }
  return {ratios_ok && improved >= 4,
          fmt("error ratio N=1024/N=256 in [%.3f, %.3f]; final gap N=1024 <= N=64 on %d/5", lo, hi, improved)};
}

Outcome cross_oracle() {
  const int n = 10;
  const double tau = 0.05;
  std::vector<double> diff(2 * n), residual(2 * n);
  parallel_for(2 * n, [&](int i) {
    const double tau_w = i < n ? 1e-3 : 1e-4;
    const auto m = small_instance(2, 2, 2, 0.95, 300 + i % n);
    const auto eq = solve_equilibrium(m, tau, tau_w);
    const auto reform = minimize_reformulation(m, tau);
    diff[i] = std::abs(reform.value_opt - eq.value_star) - (1e-4 + 10 * tau_w);
    residual[i] = eq.converged ? eq.max_residual() : INFINITY;
  });
  const double worst_excess = *std::max_element(diff.begin(), diff.end());
  const double worst_residual = *std::max_element(residual.begin(), residual.end());
  return {worst_excess <= 0 && worst_residual <= 1e-8,
          fmt("max (|diff| - allowance)=%.2e, max residual=%.2e", worst_excess, worst_residual)};
}

Outcome evaluator_consistency() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  double bellman = 0, reproduce = 0, excess = -INFINITY;
  for (int trial = 0; trial < 100; ++trial) {
    const int S = 2 + trial % 3, A = 2 + trial % 4, K = 2 + trial % 5;
    const double gamma = 0.5 + 0.45 * u(rng), tau = 0.01 + u(rng);
    const auto m = small_instance(S, A, K, gamma, 4000 + trial);
    Weight w{Eigen::VectorXd(K)};
    for (int k = 0; k < K; ++k) w.w(k) = -std::log(u(rng));
    w.w /= w.w.sum();
    const auto opt = soft_value_iteration(m, w, tau, 1e-12);
    bellman = std::max(bellman, (soft_bellman(m, w, tau, opt.v) - opt.v).cwiseAbs().maxCoeff());
    const auto e = eval_exact(m, opt.policy, w, tau);
    reproduce = std::max(reproduce, (e.soft_state - opt.v).cwiseAbs().maxCoeff());
    const double gap = opt.value(m) - hard_value_iteration(m, w, 1e-12).value;
    excess = std::max(excess, std::abs(gap) - tau * std::log(A) / (1 - gamma));
  }
  return {bellman <= 1e-10 && reproduce <= 1e-8 && excess <= 0,
          fmt("Bellman residual %.1e, V*(w) reproduction %.1e, max(|soft-hard| - bound)=%.2e", bellman, reproduce,
              excess)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks; prints one PASS/FAIL line per criterion"};
  std::vector<int> known;
  app.add_option("--known-failures", known, "Criteria expected to fail; the exit status ignores them");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"symmetric fixture equilibrium", symmetric_equilibrium},
      {"unregularized max-min recovery", maxmin_recovery},
      {"Nash gap reduction on random instances", gap_reduction},
      {"geometric decay to the reference", geometric_decay},
      {"last-iterate stability vs one-hot oscillation", last_iterate},
      {"algebraic invariants", invariants},
      {"sampling scaling", sampling_scaling},
      {"cross-oracle equivalence", cross_oracle},
      {"evaluator self-consistency", evaluator_consistency},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool expected = std::find(known.begin(), known.end(), static_cast<int>(i + 1)) != known.end();
    std::printf("%s %zu %s: %s [%.2fs]%s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(),
                secs, !o.pass && expected ? " (known failure)" : "");
    std::fflush(stdout);
    failed += !o.pass && !expected;
  }
  return failed ? 1 : 0;
}
