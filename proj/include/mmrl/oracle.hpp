#pragma once

#include "mmrl/equilibrium.hpp"
#include "mmrl/momdp.hpp"
#include "mmrl/policy_eval.hpp"

namespace mmrl {

/// Soft-optimal policy for the scalarized reward <w, r>.
SoftOptimum best_response_policy(const MomdpInstance& instance, const Weight& w, double tau, double tol = 1e-12);

/// softmax(-V_tau^pi / tau_w), the adversary's regularized best response.
Weight best_response_weight(const MomdpInstance& instance, const Policy& policy, double tau, double tau_w);

struct EquilibriumOptions {
  double tol = 1e-8;   ///< required bound on both residuals
  long budget = 200;   ///< Newton iterations
  /// Also run ERAM from the uniform start and fail loudly when it lands
  /// farther than `agreement` from the Newton solution.
  bool cross_check_eram = false;
  long eram_iters = 200000;
  double agreement = 1e-6;
};

/// Saddle point of the entropy-regularized game, found by damped Newton on
/// the strongly convex problem min_w V*_{w,tau} - tau_w H(w) in logit
/// coordinates (extended precision), then certified in double by the two
/// best-response residuals. `converged` is false when the budget runs out
/// before both residuals reach `tol`; the best iterate is still returned.
Equilibrium solve_equilibrium(const MomdpInstance& instance, double tau, double tau_w,
                              const EquilibriumOptions& options = {});

/// Recomputes both best-response residuals of (policy, log w) in double.
void certify(const MomdpInstance& instance, Equilibrium& eq);

struct Reformulation {
  Weight w_opt;
  double value_opt = 0.0;  ///< V*_{w_opt, tau}
  double fw_gap = 0.0;     ///< max_k <w, g> - g_k, bounds the suboptimality
  long iterations = 0;
  bool converged = false;
};

/// min_{w in simplex} V*_{w,tau} by exponentiated-gradient descent with
/// soft value iteration as the inner oracle. Step 0.1 (1 - gamma) / r_max,
/// halved whenever the objective would increase.
Reformulation minimize_reformulation(const MomdpInstance& instance, double tau, double tol = 1e-6,
                                     long budget = 100000);

}  // namespace mmrl
