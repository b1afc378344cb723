#include "mmrl/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "mmrl/error.hpp"

namespace mmrl {

GapReport nash_gap(const MomdpInstance& m, const Policy& policy, const Weight& w, double tol) {
  const EvalReport eval = eval_exact(m, policy, w, 0.0);
  const double current = w.w.dot(eval.v_init_vec);
  const double best = hard_value_iteration(m, w, tol).value;
  GapReport out;
  out.exploit_learner = best - current;
  out.exploit_adversary = current - eval.v_init_vec.minCoeff();
  out.nash_gap = out.exploit_learner + out.exploit_adversary;
  return out;
}

OptimalityGaps optimality_gaps(const Eigen::MatrixXd& log_pi, const Eigen::VectorXd& log_w, const EvalReport& eval,
                               const Equilibrium& ref) {
  if (!(ref.max_residual() <= 1e-6))
    throw UnreliableReference("reference residuals " + std::to_string(ref.max_residual()) + " exceed 1e-6");
  if (log_pi.rows() != ref.log_policy_star.rows() || log_pi.cols() != ref.log_policy_star.cols() ||
      log_w.size() != ref.log_weight_star.size())
    throw InvalidArgument("reference shape does not match");

  OptimalityGaps out;
  out.log_policy_gap = (ref.log_policy_star - log_pi).cwiseAbs().maxCoeff();
  out.w_gap = (ref.weight_star.w - log_w.array().exp().matrix()).cwiseAbs().maxCoeff();
  out.q_gap = (ref.q_star - eval.q_scalar).cwiseAbs().maxCoeff();

  const double log_w_gap = (ref.log_weight_star - log_w).cwiseAbs().maxCoeff();
  // Elementwise |e^x - e^y| <= |x - y| on (-inf, 0].
  if (!(out.w_gap <= log_w_gap * (1.0 + 1e-12) + 1e-15))
    throw std::logic_error("||w* - w||_inf exceeds ||log w* - log w||_inf");
  return out;
}

OptimalityGaps optimality_gaps(const MomdpInstance& m, const Policy& policy, const Weight& w,
                               const Equilibrium& ref, double tau) {
  return optimality_gaps(policy.probs.array().log().matrix(), w.w.array().log().matrix(),
                         eval_exact(m, policy, w, tau), ref);
}

RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& gap, int min_points) {
  if (t.size() != gap.size()) throw InvalidArgument("fit_rate: size mismatch");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (std::isfinite(gap[i]) && gap[i] > 1e-14) {
      xs.push_back(t[i]);
      ys.push_back(std::log(gap[i]));
    }
  }
  if (static_cast<int>(xs.size()) < std::max(min_points, 2))
    throw InsufficientData("fit_rate needs " + std::to_string(min_points) + " positive points, got " +
                           std::to_string(xs.size()));
  const std::size_t begin = xs.size() / 2;
  const double n = static_cast<double>(xs.size() - begin);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = begin; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = begin; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0.0) throw InsufficientData("fit_rate needs distinct abscissae");
  const double slope = sxy / sxx;
  RateFit out;
  out.rho = std::exp(slope);
  out.points = static_cast<int>(n);
  const double ss_res = syy - slope * sxy;
  out.r_squared = syy > 0.0 ? 1.0 - std::max(0.0, ss_res) / syy : 1.0;
  return out;
}

RateFit fit_rate(const IterationTrace& trace, TraceField field, int min_points) {
  std::vector<double> t, gap;
  for (const auto& row : trace.rows) {
    if (auto v = field_value(row, field)) {
      t.push_back(static_cast<double>(row.iter));
      gap.push_back(*v);
    }
  }
  return fit_rate(t, gap, min_points);
}

}  // namespace mmrl
