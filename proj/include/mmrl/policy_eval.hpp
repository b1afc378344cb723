#pragma once

#include <cstdint>

#include "mmrl/momdp.hpp"
#include "mmrl/types.hpp"

namespace mmrl {

/// Everything known about one policy under a fixed (w, tau).
struct EvalReport {
  Eigen::MatrixXd v_vec;       ///< V_k(s), K x S
  Eigen::VectorXd v_init_vec;  ///< mu-weighted per-objective values
  double entropy_term = 0.0;   ///< expected discounted entropy from mu
  Eigen::VectorXd v_soft_vec;  ///< v_init_vec + tau * entropy_term
  Eigen::MatrixXd q_scalar;    ///< Q_{w,tau}(s, a)
  Eigen::MatrixXd occupancy;   ///< normalized discounted state-action visitation
  Eigen::VectorXd soft_state;  ///< V_{w,tau}(s)
  double tau = 0.0;

  /// <w, v_soft_vec>
  double scalar_soft_value(const Weight& w) const { return w.w.dot(v_soft_vec); }
  double min_value() const { return v_init_vec.minCoeff(); }
};

EvalReport eval_exact(const MomdpInstance& instance, const Policy& policy, const Weight& w, double tau);

struct SoftOptimum {
  Eigen::VectorXd v;  ///< V*_{w,tau}(s)
  Eigen::MatrixXd q;  ///< Q*_{w,tau}(s, a)
  Policy policy;      ///< softmax(Q* / tau)
  Eigen::MatrixXd log_policy;
  double residual = 0.0;
  long iterations = 0;

  double value(const MomdpInstance& instance) const;
};

/// Fixed-point iteration of the soft Bellman operator from v = 0 until
/// successive iterates differ by at most `tol` in sup norm.
SoftOptimum soft_value_iteration(const MomdpInstance& instance, const Weight& w, double tau,
                                 double tol = 1e-10, long max_iter = 1'000'000);

/// Applies the soft Bellman operator once.
Eigen::VectorXd soft_bellman(const MomdpInstance& instance, const Weight& w, double tau,
                             const Eigen::VectorXd& v);

struct HardOptimum {
  Eigen::VectorXd v;
  double value = 0.0;  ///< mu-weighted
};

HardOptimum hard_value_iteration(const MomdpInstance& instance, const Weight& w, double tol = 1e-10,
                                 long max_iter = 1'000'000);

struct SampleEvalConfig {
  int samples_per_pair = 256;
  std::uint64_t seed = 0;
};

/// Plug-in transition model from `samples_per_pair` next-state draws per
/// (s, a); draw streams are derived from (seed, s * |A| + a).
MomdpInstance empirical_model(const MomdpInstance& instance, const SampleEvalConfig& config);

/// eval_exact against the empirical model.
EvalReport eval_sampled(const MomdpInstance& instance, const Policy& policy, const Weight& w, double tau,
                        const SampleEvalConfig& config);

}  // namespace mmrl
