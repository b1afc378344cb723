#include "mmrl/oracle.hpp"

#include <cmath>
#include <limits>

#include "mmrl/detail/kernels.hpp"
#include "mmrl/error.hpp"
#include "mmrl/simplex.hpp"
#include "mmrl/solvers.hpp"

namespace mmrl {

SoftOptimum best_response_policy(const MomdpInstance& m, const Weight& w, double tau, double tol) {
  return soft_value_iteration(m, w, tau, tol);
}

Weight best_response_weight(const MomdpInstance& m, const Policy& policy, double tau, double tau_w) {
  if (!(tau_w > 0.0)) throw InvalidArgument("tau_w must be positive");
  const EvalReport eval = eval_exact(m, policy, Weight::uniform(m.num_objectives()), tau);
  return {softmax(Eigen::VectorXd(-eval.v_soft_vec / tau_w))};
}

namespace {

using LD = long double;
using VecL = detail::Vec<LD>;
using MatL = detail::Mat<LD>;

/// Soft optimum and its gradient g = V_tau^{pi_w} at an arbitrary w in R^K.
struct DualPoint {
  VecL z;        // logits, w = softmax(z)
  VecL log_w;
  VecL w;
  MatL log_pi;
  VecL grad;     // V_tau^{pi_w}, K
  LD objective;  // V*_{w,tau}(mu) - tau_w H(w)
};

class Dual {
 public:
  Dual(const MomdpInstance& m, LD tau, LD tau_w) : m_(m), tau_(tau), tau_w_(tau_w) {
    const LD scale = (LD(m.max_abs_reward()) + tau * std::log(LD(m.num_actions()))) / (LD(1) - LD(m.gamma()));
    vi_tol_ = 64 * std::numeric_limits<LD>::epsilon() * std::max<LD>(LD(1), scale);
  }

  /// g(w) and V*_{w,tau}(mu) for any real w (the scalarization is linear).
  std::pair<VecL, LD> gradient(const VecL& w, MatL* log_pi = nullptr) const {
    auto sol = detail::soft_value_iteration<LD>(m_, w, tau_, vi_tol_, 10'000'000);
    const MatL pi = sol.log_pi.array().exp();
    const auto eval = detail::evaluate<LD>(m_, pi, w, tau_);
    VecL g = eval.v_init.array() + tau_ * eval.entropy;
    LD value = 0;
    for (int s = 0; s < m_.num_states(); ++s) value += LD(m_.mu(s)) * sol.v(s);
    if (log_pi) *log_pi = std::move(sol.log_pi);
    return {std::move(g), value};
  }

  DualPoint at(const VecL& z) const {
    DualPoint p;
    p.z = z;
    p.log_w = log_softmax(z);
    p.w = p.log_w.array().exp();
    auto [g, value] = gradient(p.w, &p.log_pi);
    p.grad = std::move(g);
    LD neg_entropy = 0;
    for (Eigen::Index k = 0; k < p.w.size(); ++k) neg_entropy += p.w(k) * p.log_w(k);
    p.objective = value + tau_w_ * neg_entropy;
    return p;
  }

  /// z + g / tau_w with the constant component removed; zero at the saddle.
  VecL residual(const DualPoint& p) const {
    VecL r = p.z + p.grad / tau_w_;
    return r.array() - r.mean();
  }

  /// dg/dw by central differences.
  MatL hessian(const VecL& w) const {
    const Eigen::Index K = w.size();
    MatL H(K, K);
    const LD h = LD(1e-7);
    for (Eigen::Index j = 0; j < K; ++j) {
      VecL up = w, down = w;
      up(j) += h;
      down(j) -= h;
      H.col(j) = (gradient(up).first - gradient(down).first) / (2 * h);
    }
    return (H + H.transpose()) / 2;
  }

  LD tau_w() const { return tau_w_; }

 private:
  const MomdpInstance& m_;
  LD tau_;
  LD tau_w_;
  LD vi_tol_;
};

Equilibrium to_equilibrium(const MomdpInstance& m, const DualPoint& p, double tau, double tau_w) {
  Equilibrium eq;
  eq.tau = tau;
  eq.tau_w = tau_w;
  eq.log_policy_star = p.log_pi.cast<double>();
  eq.policy_star.probs = eq.log_policy_star.array().exp();
  for (int s = 0; s < m.num_states(); ++s) eq.policy_star.probs.row(s) /= eq.policy_star.probs.row(s).sum();
  eq.log_weight_star = p.log_w.cast<double>();
  eq.weight_star.w = eq.log_weight_star.array().exp();
  eq.weight_star.w /= eq.weight_star.w.sum();
  return eq;
}

}  // namespace

void certify(const MomdpInstance& m, Equilibrium& eq) {
  const SoftOptimum br = best_response_policy(m, eq.weight_star, eq.tau);
  eq.residual_policy = (eq.log_policy_star - br.log_policy).cwiseAbs().maxCoeff();
  const Weight bw = best_response_weight(m, eq.policy_star, eq.tau, eq.tau_w);
  eq.residual_weight = (eq.weight_star.w - bw.w).cwiseAbs().maxCoeff();
  const EvalReport eval = eval_exact(m, eq.policy_star, eq.weight_star, eq.tau);
  eq.value_star = eval.scalar_soft_value(eq.weight_star);
  eq.q_star = eval.q_scalar;
}

Equilibrium solve_equilibrium(const MomdpInstance& m, double tau, double tau_w, const EquilibriumOptions& opt) {
  require_valid(m);
  if (!(tau > 0.0) || !(tau_w > 0.0)) throw InvalidArgument("tau and tau_w must be positive");
  const int K = m.num_objectives();
  const Dual dual(m, tau, tau_w);

  DualPoint cur = dual.at(VecL::Zero(K));
  Equilibrium best = to_equilibrium(m, cur, tau, tau_w);
  certify(m, best);
  long it = 0;
  // Polish past tol while Newton still makes progress.
  const double target = opt.tol * 1e-2;
  for (; it < opt.budget && best.max_residual() > target; ++it) {
    const VecL r = dual.residual(cur);
    // Newton system (I + H S / tau_w) d = -r with S the softmax Jacobian.
    const MatL S = MatL(cur.w.asDiagonal()) - cur.w * cur.w.transpose();
    const MatL J = MatL::Identity(K, K) + dual.hessian(cur.w) * S / dual.tau_w();
    VecL d = J.fullPivLu().solve(VecL(-r));
    if (!d.allFinite()) d = -r;
    d = d.array() - d.mean();

    const LD slope = dual.tau_w() * r.dot(S * d);  // directional derivative of the objective
    const LD r_norm = r.cwiseAbs().maxCoeff();
    // Armijo on the objective, or a decrease of the residual once the
    // objective change drops below working precision.
    const LD noise = 1024 * std::numeric_limits<LD>::epsilon() * std::max<LD>(LD(1), std::abs(cur.objective));
    auto acceptable = [&](const DualPoint& p, LD step) {
      if (p.objective <= cur.objective + LD(1e-4) * step * std::min<LD>(slope, LD(0))) return true;
      return std::abs(p.objective - cur.objective) <= noise &&
             dual.residual(p).cwiseAbs().maxCoeff() <= (1 - LD(1e-4) * step) * r_norm;
    };
    LD step = 1;
    DualPoint next = dual.at(cur.z + step * d);
    while (step > LD(1e-12) && !acceptable(next, step)) {
      step /= 2;
      next = dual.at(cur.z + step * d);
    }
    if (!(next.objective <= cur.objective) && !(dual.residual(next).cwiseAbs().maxCoeff() < r_norm))
      break;  // no further progress at working precision
    cur = std::move(next);
    Equilibrium candidate = to_equilibrium(m, cur, tau, tau_w);
    certify(m, candidate);
    if (candidate.max_residual() <= best.max_residual()) best = std::move(candidate);
  }
  best.iterations = it;
  best.method = "newton";
  best.converged = best.max_residual() <= opt.tol;

  if (opt.cross_check_eram) {
    SolverConfig cfg;
    cfg.tau = tau;
    cfg.tau_w = tau_w;
    // alpha = 1/2 and beta = 1 - eps^2 with eps just inside the admissible range.
    cfg.eta = (1.0 - m.gamma()) / (2.0 * tau);
    const double eps = std::min(0.1, 0.9 * 48.0 * (1.0 - m.gamma()) / 121.0);
    cfg.lambda = eps * eps / (tau_w * (1.0 - eps * eps));
    cfg.iters = opt.eram_iters;
    cfg.trace_every = opt.eram_iters;
    cfg.record_nash_gap = false;
    const RunResult eram = run(m, cfg);
    const double dw = (eram.weight.w - best.weight_star.w).cwiseAbs().maxCoeff();
    const double dpi = (eram.policy.probs - best.policy_star.probs).cwiseAbs().maxCoeff();
    if (!(dw <= opt.agreement && dpi <= opt.agreement))
      throw OracleDisagreement("ERAM and Newton equilibria differ: |dw|=" + std::to_string(dw) +
                               " |dpi|=" + std::to_string(dpi));
    best.method = "newton+eram";
  }
  return best;
}

Reformulation minimize_reformulation(const MomdpInstance& m, double tau, double tol, long budget) {
  require_valid(m);
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  const int K = m.num_objectives();
  constexpr double kInnerTol = 1e-12;

  struct Point {
    Eigen::VectorXd log_w;
    Weight w;
    double value;
    Eigen::VectorXd grad;
    double fw_gap;
  };
  auto at = [&](Eigen::VectorXd log_w) {
    Point p;
    p.log_w = log_softmax(log_w);
    p.w.w = p.log_w.array().exp();
    p.w.w /= p.w.w.sum();
    const SoftOptimum opt = soft_value_iteration(m, p.w, tau, kInnerTol);
    p.value = opt.value(m);
    p.grad = eval_exact(m, opt.policy, p.w, tau).v_soft_vec;
    p.fw_gap = std::max(0.0, p.w.w.dot(p.grad) - p.grad.minCoeff());
    return p;
  };

  const double r_max = m.max_abs_reward();
  // The objective is only known to the inner solver's accuracy, so
  // increases below that are noise and must not shrink the step.
  auto noise = [&](double v) {
    return 4.0 * (m.gamma() * kInnerTol / (1.0 - m.gamma()) + std::numeric_limits<double>::epsilon() * std::abs(v));
  };
  double step = r_max > 0.0 ? 0.1 * (1.0 - m.gamma()) / r_max : 0.1;
  Point cur = at(Eigen::VectorXd::Zero(K));
  long it = 0;
  for (; it < budget && cur.fw_gap > tol; ++it) {
    Point next = at(cur.log_w - step * cur.grad);
    while (next.value > cur.value + noise(cur.value) && step > 1e-300) {
      step /= 2;
      next = at(cur.log_w - step * cur.grad);
    }
    cur = std::move(next);
  }
  Reformulation out;
  out.w_opt = cur.w;
  out.value_opt = cur.value;
  out.fw_gap = cur.fw_gap;
  out.iterations = it;
  out.converged = cur.fw_gap <= tol;
  return out;
}

}  // namespace mmrl
