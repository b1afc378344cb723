#pragma once

#include <optional>
#include <string>

#include "mmrl/equilibrium.hpp"
#include "mmrl/error.hpp"
#include "mmrl/momdp.hpp"
#include "mmrl/policy_eval.hpp"
#include "mmrl/trace.hpp"

namespace mmrl {

enum class Algorithm { eram, aram, onehot, uniform };
enum class EvalMode { exact, sampled };

Algorithm parse_algorithm(const std::string& name);
std::string to_string(Algorithm algorithm);
EvalMode parse_eval_mode(const std::string& name);
std::string to_string(EvalMode mode);

struct SolverConfig {
  double tau = 0.05;     ///< learner entropy coefficient
  double tau_w = 0.05;   ///< adversary entropy coefficient
  double eta = 0.01;     ///< NPG step size
  double lambda = 1e-4;  ///< mirror-descent step size
  long iters = 20000;
  EvalMode eval_mode = EvalMode::exact;
  SampleEvalConfig sampling;  ///< used when eval_mode == sampled
  Algorithm algorithm = Algorithm::eram;
  std::optional<Policy> init_policy;  ///< uniform when empty
  std::optional<Weight> init_weight;  ///< uniform when empty
  long trace_every = 100;
  bool record_nash_gap = true;

  /// 1 - eta * tau / (1 - gamma)
  double alpha(double gamma) const { return 1.0 - eta * tau / (1.0 - gamma); }
  /// 1 / (lambda * tau_w + 1)
  double beta() const { return 1.0 / (lambda * tau_w + 1.0); }

  /// Throws InvalidArgument unless alpha, beta lie in (0, 1) and the
  /// remaining fields are in range.
  void validate(double gamma) const;
};

/// Closed-form NPG step for softmax policies:
/// pi'(a|s) ∝ pi(a|s)^alpha * exp((1 - alpha) / tau * Q(s, a)), in log space.
Policy learner_step(const Policy& policy, const Eigen::MatrixXd& q_scalar, double alpha, double tau);
/// Log-space form of learner_step; returns normalized log-probabilities.
Eigen::MatrixXd learner_step_log(const Eigen::MatrixXd& log_policy, const Eigen::MatrixXd& q_scalar, double alpha,
                                 double tau);

/// w' = softmax(-(1 - beta) / tau_w * V + beta * log w).
Weight adversary_step_eram(const Weight& w, const Eigen::VectorXd& value_vec, double beta, double tau_w);
Eigen::VectorXd adversary_step_eram_log(const Eigen::VectorXd& log_w, const Eigen::VectorXd& value_vec, double beta,
                                        double tau_w);

/// Adaptive reference for the adversary's KL term.
struct AramState {
  Eigen::VectorXd c;
  Eigen::VectorXd log_c;
  int worst_index = 0;  ///< zero-based argmin of the value vector
};

/// c = softmax_i( sum_{s,a} d(s,a) r_i(s,a) r_{i'}(s,a) ) with i' the worst
/// objective (lowest index on ties).
AramState compute_reference_vector(const MomdpInstance& instance, const Eigen::MatrixXd& occupancy,
                                   const Eigen::VectorXd& value_vec);

/// w' = softmax(-(1 - beta) / tau_w * V + beta * log w + (1 - beta) * log c).
Weight adversary_step_aram(const Weight& w, const Eigen::VectorXd& value_vec, const AramState& reference,
                           double beta, double tau_w);
Eigen::VectorXd adversary_step_aram_log(const Eigen::VectorXd& log_w, const Eigen::VectorXd& value_vec,
                                        const AramState& reference, double beta, double tau_w);

/// Indicator of the worst objective, lowest index on ties.
Weight adversary_step_onehot(const Eigen::VectorXd& value_vec);

/// Step sizes from the linear-convergence analysis.
struct TheoryStepsizes {
  double eta = 0.0;
  double lambda = 0.0;
  double tau_w_lower_bound = 0.0;
  double epsilon_max = 0.0;  ///< 48 (1 - gamma) / 121
  double rate_bound = 1.0;   ///< 1 - epsilon^2 / 2
};

/// eta = eps (1 - gamma) / tau, lambda = eps^2 / (tau_w (1 - eps^2)),
/// tau_w >= 12 K (r_max + tau log|A|)^2 / (tau (1 - gamma)^4). When `tau_w`
/// is empty, lambda is computed at the lower bound.
TheoryStepsizes theory_stepsizes(const MomdpInstance& instance, double tau, double epsilon,
                                 std::optional<double> tau_w = std::nullopt);

struct RunResult {
  IterationTrace trace;
  Policy policy;  ///< final iterate
  Weight weight;
  Eigen::MatrixXd log_policy;  ///< solver state; finite where probabilities underflow
  Eigen::VectorXd log_weight;  ///< -inf only for the one-hot adversary
};

/// Raised when an iterate stops being finite; carries the rows recorded so far.
class NonFiniteIterate : public Error {
 public:
  NonFiniteIterate(long iter, IterationTrace trace)
      : Error("non-finite iterate at iteration " + std::to_string(iter)), iter_(iter), trace_(std::move(trace)) {}
  long iter() const { return iter_; }
  const IterationTrace& trace() const { return trace_; }

 private:
  long iter_;
  IterationTrace trace_;
};

/// Single-loop solver, iterating on log-probabilities. Each iteration evaluates (pi_t, w_t) once, then
/// updates the policy with Q_{w_t,tau}^{pi_t} and the weight with V^{pi_t}.
/// Rows are recorded when iter % trace_every == 0 and at iter == iters; they
/// always hold exact values even under sampled evaluation.
RunResult run(const MomdpInstance& instance, const SolverConfig& config,
              const Equilibrium* reference = nullptr);

}  // namespace mmrl
