#include "mmrl/policy_eval.hpp"

#include <algorithm>
#include <cmath>

#include "mmrl/detail/kernels.hpp"
#include "mmrl/error.hpp"
#include "mmrl/rng.hpp"

namespace mmrl {

namespace {

void check_inputs(const MomdpInstance& m, const Policy& policy, const Weight& w, double tau) {
  if (policy.num_states() != m.num_states() || policy.num_actions() != m.num_actions())
    throw InvalidArgument("policy shape does not match instance");
  if (!is_row_stochastic(policy)) throw InvalidArgument("policy rows must lie in the simplex");
  if (w.size() != m.num_objectives() || !in_simplex(w.w)) throw InvalidArgument("weight must lie in the simplex");
  if (!(tau >= 0.0)) throw InvalidArgument("tau must be nonnegative");
}

}  // namespace

EvalReport eval_exact(const MomdpInstance& m, const Policy& policy, const Weight& w, double tau) {
  check_inputs(m, policy, w, tau);
  auto e = detail::evaluate<double>(m, policy.probs, w.w, tau);
  EvalReport out;
  out.v_vec = std::move(e.v_vec);
  out.v_init_vec = std::move(e.v_init);
  out.entropy_term = e.entropy;
  out.v_soft_vec = out.v_init_vec.array() + tau * e.entropy;
  out.q_scalar = std::move(e.q_scalar);
  out.occupancy = std::move(e.occupancy);
  out.soft_state = std::move(e.soft_state);
  out.tau = tau;
  return out;
}

double SoftOptimum::value(const MomdpInstance& m) const {
  double out = 0.0;
  for (int s = 0; s < m.num_states(); ++s) out += m.mu(s) * v(s);
  return out;
}

SoftOptimum soft_value_iteration(const MomdpInstance& m, const Weight& w, double tau, double tol, long max_iter) {
  if (!(tau > 0.0)) throw InvalidArgument("soft value iteration needs tau > 0");
  if (w.size() != m.num_objectives()) throw InvalidArgument("weight size does not match instance");
  auto sol = detail::soft_value_iteration<double>(m, w.w, tau, tol, max_iter);
  SoftOptimum out;
  out.v = std::move(sol.v);
  out.q = std::move(sol.q);
  out.log_policy = sol.log_pi;
  out.policy.probs = sol.log_pi.array().exp();
  for (int s = 0; s < m.num_states(); ++s) out.policy.probs.row(s) /= out.policy.probs.row(s).sum();
  out.residual = sol.residual;
  out.iterations = sol.iterations;
  return out;
}

Eigen::VectorXd soft_bellman(const MomdpInstance& m, const Weight& w, double tau, const Eigen::VectorXd& v) {
  return detail::soft_bellman<double>(m, w.w, tau, v);
}

HardOptimum hard_value_iteration(const MomdpInstance& m, const Weight& w, double tol, long max_iter) {
  if (w.size() != m.num_objectives()) throw InvalidArgument("weight size does not match instance");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(m.num_states());
  double diff = 0.0;
  for (long it = 0; it < max_iter; ++it) {
    Eigen::VectorXd next(m.num_states());
    for (int s = 0; s < m.num_states(); ++s) next(s) = detail::backup_row<double>(m, w.w, v, s).maxCoeff();
    diff = (next - v).cwiseAbs().maxCoeff();
    v = std::move(next);
    if (diff <= tol) break;
  }
  if (!(diff <= tol)) throw MaxIterExceeded(diff);
  HardOptimum out{v, 0.0};
  for (int s = 0; s < m.num_states(); ++s) out.value += m.mu(s) * v(s);
  return out;
}

MomdpInstance empirical_model(const MomdpInstance& m, const SampleEvalConfig& cfg) {
  if (cfg.samples_per_pair < 1) throw InvalidArgument("samples_per_pair must be >= 1");
  const int S = m.num_states(), A = m.num_actions();
  std::vector<double> counts(static_cast<std::size_t>(S) * A * S, 0.0);
  std::vector<double> cdf(S);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      double acc = 0.0;
      int support = 0;
      for (int t = 0; t < S; ++t) {
        acc += m.transition(s, a, t);
        cdf[t] = acc;
        if (m.transition(s, a, t) > 0.0) ++support;
      }
      double* row = &counts[(static_cast<std::size_t>(s) * A + a) * S];
      if (support == 1) {
        // A single successor is drawn with certainty; copy the row exactly.
        for (int t = 0; t < S; ++t) row[t] = m.transition(s, a, t);
        continue;
      }
      Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(s) * A + a));
      for (int n = 0; n < cfg.samples_per_pair; ++n) {
        const double u = rng.uniform() * acc;
        int t = static_cast<int>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        t = std::min(t, S - 1);
        row[t] += 1.0;
      }
      for (int t = 0; t < S; ++t) row[t] /= cfg.samples_per_pair;
    }
  }
  return m.with_transition(std::move(counts));
}

EvalReport eval_sampled(const MomdpInstance& m, const Policy& policy, const Weight& w, double tau,
                        const SampleEvalConfig& cfg) {
  return eval_exact(empirical_model(m, cfg), policy, w, tau);
}

}  // namespace mmrl
