#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmrl/equilibrium.hpp"
#include "mmrl/momdp.hpp"
#include "mmrl/policy_eval.hpp"
#include "mmrl/trace.hpp"

namespace mmrl {

struct GapReport {
  double nash_gap = 0.0;
  double exploit_learner = 0.0;    ///< max_pi' <w, V^pi'> - <w, V^pi>
  double exploit_adversary = 0.0;  ///< <w, V^pi> - min_k V_k^pi
  std::optional<double> log_policy_gap;
  std::optional<double> w_gap;
  std::optional<double> q_gap;
  std::optional<double> fitted_rate;
};

/// Nash gap of (policy, w) in the unregularized game. It is positive, of
/// order (tau, tau_w), at the regularized equilibrium.
GapReport nash_gap(const MomdpInstance& instance, const Policy& policy, const Weight& w, double tol = 1e-10);

struct OptimalityGaps {
  double log_policy_gap = 0.0;  ///< || log pi* - log pi ||_inf
  double w_gap = 0.0;           ///< || w* - w ||_inf
  double q_gap = 0.0;           ///< || Q^{pi*}_{w*,tau} - Q^{pi}_{w,tau} ||_inf
};

/// Distances to a reference equilibrium. Throws UnreliableReference when its
/// residuals exceed 1e-6.
OptimalityGaps optimality_gaps(const MomdpInstance& instance, const Policy& policy, const Weight& w,
                               const Equilibrium& reference, double tau);
/// Same, from log-probabilities and an exact evaluation of the iterate.
OptimalityGaps optimality_gaps(const Eigen::MatrixXd& log_policy, const Eigen::VectorXd& log_w,
                               const EvalReport& eval, const Equilibrium& reference);

struct RateFit {
  double rho = 1.0;        ///< exp(slope of log gap vs t)
  double r_squared = 1.0;  ///< of the log-linear fit
  int points = 0;
};

/// Least-squares fit of log(gap) against t over the last half of the
/// series. Entries at or below 1e-14 or non-finite are dropped.
RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& gap, int min_points = 20);

/// fit_rate over one trace column; rows missing the field are skipped.
RateFit fit_rate(const IterationTrace& trace, TraceField field = TraceField::log_policy_gap,
                 int min_points = 20);

}  // namespace mmrl
